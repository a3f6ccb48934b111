#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aas
{

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unordered sample pair stored canonically with a < b.
class PairKey
{
public:
  PairKey() = default;
  PairKey(std::size_t x, std::size_t y);

  std::size_t a() const { return a_; }
  std::size_t b() const { return b_; }

  auto operator<=>(const PairKey&) const = default;

private:
  std::size_t a_ = 0;
  std::size_t b_ = 1;
};

struct PairKeyHash
{
  std::size_t operator()(const PairKey& p) const noexcept
  {
    std::uint64_t h = (static_cast<std::uint64_t>(p.a()) << 32) ^ static_cast<std::uint64_t>(p.b());
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

/// n samples with d-dimensional features, optional URIs and ground-truth identities.
class EmbeddingSet
{
public:
  EmbeddingSet() = default;
  EmbeddingSet(std::vector<std::string> ids,
               RowMatrixF vectors,
               std::optional<std::vector<std::string>> image_uris = std::nullopt,
               std::optional<std::vector<std::string>> identities = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }

  const std::vector<std::string>& ids() const { return ids_; }
  const RowMatrixF& vectors() const { return vectors_; }
  const std::optional<std::vector<std::string>>& image_uris() const { return image_uris_; }
  const std::optional<std::vector<std::string>>& identities() const { return identities_; }
  bool has_identities() const { return identities_.has_value(); }

  /// Index of a sample id; throws ValidationError when absent.
  std::size_t index_of(std::string_view id) const;

  /// Same ids and metadata, new feature matrix (shape must match).
  EmbeddingSet with_vectors(RowMatrixF vectors) const;

private:
  void validate() const;

  std::vector<std::string> ids_;
  RowMatrixF vectors_;
  std::optional<std::vector<std::string>> image_uris_;
  std::optional<std::vector<std::string>> identities_;
};

enum class MethodTag
{
  A,
  B,
  Refined
};

/// Cluster assignment over samples. Outliers sit in singleton clusters.
struct Partition
{
  std::vector<int> labels;
  std::vector<bool> outliers;
  MethodTag method = MethodTag::Refined;

  Partition() = default;
  Partition(std::vector<int> labels_, MethodTag method_ = MethodTag::Refined);
  Partition(std::vector<int> labels_, std::vector<bool> outliers_, MethodTag method_);

  std::size_t size() const { return labels.size(); }
  std::size_t num_clusters() const;

  /// Member lists indexed by label; requires consecutive labels.
  std::vector<std::vector<std::size_t>> clusters() const;

  /// Relabels to 0..k-1 in order of first occurrence.
  Partition renumbered() const;
};

/// True if both partitions group the samples identically.
bool same_grouping(const Partition& p, const Partition& q);

enum class Relation
{
  MustLink,
  CannotLink,
  Unknown
};

enum class ConstraintSource
{
  Oracle,
  Seed,
  Inferred
};

struct Constraint
{
  PairKey pair;
  Relation relation = Relation::MustLink;
  ConstraintSource source = ConstraintSource::Oracle;
  int cycle = 0;
};

std::string_view to_string(Relation r);
std::string_view to_string(ConstraintSource s);
std::string_view to_string(MethodTag m);

enum class Metric
{
  Cosine,
  Euclidean
};

enum class SimilarityMode
{
  Cosine,
  KReciprocalJaccard
};

enum class SamplingStrategy
{
  Ambiguity,
  UniformRandom
};

enum class BaseView
{
  Dbscan,
  Finch
};

struct RunConfig
{
  double epsilon = 0.6;
  int k_max = 5;
  double s_min = 0.3;
  double budget_fraction_per_cycle = 0.0002;
  int num_cycles = 5;
  double dbscan_eps = 0.6;
  int dbscan_min_samples = 4;
  int knn_k = 30;
  int finch_level = 0;
  std::uint64_t rng_seed = 0;

  SimilarityMode similarity_mode = SimilarityMode::KReciprocalJaccard;
  SamplingStrategy strategy = SamplingStrategy::Ambiguity;
  BaseView base_view = BaseView::Dbscan;
  std::vector<double> beta = {1.0, 1.0, 1.0};
  std::size_t dense_threshold = 20000;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

} // namespace aas
