#pragma once

#include "aas/types.hpp"

#include <memory>
#include <span>
#include <vector>

namespace aas
{

/// 1 - u.v / (|u||v|), clamped to [0, 2]. Throws ZeroVectorError on a zero norm.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(std::span<const float> u, std::span<const float> v);

/// Symmetric pairwise distance between sample indices.
class DistanceView
{
public:
  virtual ~DistanceView() = default;
  virtual std::size_t size() const = 0;
  virtual double operator()(std::size_t i, std::size_t j) const = 0;
};

/// Distances computed on demand from embeddings under a metric.
class MetricDistance final : public DistanceView
{
public:
  MetricDistance(const EmbeddingSet& set, Metric metric);

  std::size_t size() const override { return static_cast<std::size_t>(rows_.rows()); }
  double operator()(std::size_t i, std::size_t j) const override;
  Metric metric() const { return metric_; }

private:
  RowMatrixD rows_; // unit-normalised for cosine
  Metric metric_;
};

/// Precomputed dense distance matrix.
class DenseDistance final : public DistanceView
{
public:
  explicit DenseDistance(RowMatrixD values);

  std::size_t size() const override { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const override { return values_(i, j); }
  const RowMatrixD& values() const { return values_; }

private:
  RowMatrixD values_;
};

RowMatrixD pairwise_distances(const DistanceView& dist);

struct Neighbor
{
  std::size_t index;
  double distance;
};

/// Per-sample neighbours sorted by (distance, index), self excluded.
struct NeighborList
{
  std::size_t k = 0;
  std::vector<std::vector<Neighbor>> lists;
};

/// Exact k nearest neighbours. Requires k < n.
NeighborList knn(const DistanceView& dist, std::size_t k);
NeighborList knn(const EmbeddingSet& set, std::size_t k, Metric metric = Metric::Cosine);

/// Symmetric similarity with unit diagonal. Dense below a size threshold,
/// otherwise entries are evaluated on demand.
class SimilarityMatrix
{
public:
  static SimilarityMatrix from_dense(RowMatrixD values, SimilarityMode mode);

  std::size_t size() const { return n_; }
  SimilarityMode mode() const { return mode_; }
  bool is_dense() const { return dense_.size() > 0 || n_ == 0; }
  const RowMatrixD& dense() const { return dense_; }

  double operator()(std::size_t i, std::size_t j) const;

private:
  friend SimilarityMatrix k_reciprocal_similarity(const EmbeddingSet&, std::size_t, std::size_t, Metric);
  friend SimilarityMatrix cosine_similarity(const EmbeddingSet&, std::size_t);

  std::size_t n_ = 0;
  SimilarityMode mode_ = SimilarityMode::Cosine;
  RowMatrixD dense_;
  // lazy backing stores
  std::vector<std::vector<std::size_t>> reciprocal_sets_;
  std::shared_ptr<const MetricDistance> cosine_;
};

/// Jaccard overlap of k-reciprocal neighbour sets R(u) (each including u).
SimilarityMatrix k_reciprocal_similarity(const EmbeddingSet& set,
                                         std::size_t k,
                                         std::size_t dense_threshold = 20000,
                                         Metric metric = Metric::Cosine);

SimilarityMatrix cosine_similarity(const EmbeddingSet& set, std::size_t dense_threshold = 20000);

SimilarityMatrix make_similarity(const EmbeddingSet& set, SimilarityMode mode, std::size_t k,
                                 std::size_t dense_threshold = 20000);

/// k-reciprocal sets R(u) = {v : v in kNN(u), u in kNN(v)} plus u, sorted.
std::vector<std::vector<std::size_t>> reciprocal_sets(const NeighborList& nn);

/// Distance 1 - s (Jaccard) or 1 - s (cosine) over a similarity matrix.
class SimilarityDistance final : public DistanceView
{
public:
  explicit SimilarityDistance(const SimilarityMatrix& sim) : sim_(&sim) {}

  std::size_t size() const override { return sim_->size(); }
  double operator()(std::size_t i, std::size_t j) const override { return 1.0 - (*sim_)(i, j); }

private:
  const SimilarityMatrix* sim_;
};

} // namespace aas
