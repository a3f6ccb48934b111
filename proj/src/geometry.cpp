#include "aas/geometry.hpp"

#include "aas/errors.hpp"
#include "aas/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace aas
{

namespace
{

// Fixed summation order so d(i, j) == d(j, i) bit for bit.
double dot(const double* a, const double* b, std::size_t d)
{
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

template <typename T>
double cosine_distance_impl(std::span<const T> u, std::span<const T> v)
{
  if (u.size() != v.size())
  {
    throw ValidationError("cosine_distance: dimension mismatch");
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
  {
    uv += static_cast<double>(u[k]) * static_cast<double>(v[k]);
    uu += static_cast<double>(u[k]) * static_cast<double>(u[k]);
    vv += static_cast<double>(v[k]) * static_cast<double>(v[k]);
  }
  if (uu == 0.0 || vv == 0.0)
  {
    throw ZeroVectorError("cosine_distance: zero-norm vector");
  }
  return std::clamp(1.0 - uv / (std::sqrt(uu) * std::sqrt(vv)), 0.0, 2.0);
}

bool neighbor_less(const Neighbor& l, const Neighbor& r)
{
  return l.distance < r.distance || (l.distance == r.distance && l.index < r.index);
}

double jaccard_sorted(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b)
{
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end())
  {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else
    {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v)
{
  return cosine_distance_impl(u, v);
}

double cosine_distance(std::span<const float> u, std::span<const float> v)
{
  return cosine_distance_impl(u, v);
}

MetricDistance::MetricDistance(const EmbeddingSet& set, Metric metric)
    : rows_(set.vectors().cast<double>()), metric_(metric)
{
  if (metric_ == Metric::Cosine)
  {
    for (Eigen::Index i = 0; i < rows_.rows(); ++i)
    {
      const double norm = std::sqrt(dot(rows_.row(i).data(), rows_.row(i).data(), static_cast<std::size_t>(rows_.cols())));
      if (norm == 0.0)
      {
        throw ZeroVectorError("sample '" + set.ids()[static_cast<std::size_t>(i)] + "' has a zero feature vector");
      }
      rows_.row(i) /= norm;
    }
  }
}

double MetricDistance::operator()(std::size_t i, std::size_t j) const
{
  if (i == j)
  {
    return 0.0;
  }
  const auto d = static_cast<std::size_t>(rows_.cols());
  const double* a = rows_.row(static_cast<Eigen::Index>(i)).data();
  const double* b = rows_.row(static_cast<Eigen::Index>(j)).data();
  if (metric_ == Metric::Cosine)
  {
    return std::clamp(1.0 - dot(a, b, d), 0.0, 2.0);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k)
  {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

DenseDistance::DenseDistance(RowMatrixD values) : values_(std::move(values))
{
  if (values_.rows() != values_.cols())
  {
    throw ValidationError("distance matrix must be square");
  }
}

RowMatrixD pairwise_distances(const DistanceView& dist)
{
  const auto n = dist.size();
  RowMatrixD out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
    {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(i, j);
    }
  });
  return out;
}

NeighborList knn(const DistanceView& dist, std::size_t k)
{
  const auto n = dist.size();
  if (k == 0 || k >= n)
  {
    throw ValidationError("knn: need 0 < k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  NeighborList out;
  out.k = k;
  out.lists.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<Neighbor> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
    {
      if (j != i) row.push_back({j, dist(i, j)});
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(), neighbor_less);
    row.resize(k);
    out.lists[i] = std::move(row);
  });
  return out;
}

NeighborList knn(const EmbeddingSet& set, std::size_t k, Metric metric)
{
  return knn(MetricDistance(set, metric), k);
}

std::vector<std::vector<std::size_t>> reciprocal_sets(const NeighborList& nn)
{
  const auto n = nn.lists.size();
  std::vector<std::vector<std::size_t>> sorted_nn(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    for (const auto& nb : nn.lists[i]) sorted_nn[i].push_back(nb.index);
    std::sort(sorted_nn[i].begin(), sorted_nn[i].end());
  }
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t u = 0; u < n; ++u)
  {
    out[u].push_back(u);
    for (auto v : sorted_nn[u])
    {
      if (std::binary_search(sorted_nn[v].begin(), sorted_nn[v].end(), u))
      {
        out[u].push_back(v);
      }
    }
    std::sort(out[u].begin(), out[u].end());
  }
  return out;
}

SimilarityMatrix SimilarityMatrix::from_dense(RowMatrixD values, SimilarityMode mode)
{
  if (values.rows() != values.cols())
  {
    throw ValidationError("similarity matrix must be square");
  }
  SimilarityMatrix s;
  s.n_ = static_cast<std::size_t>(values.rows());
  s.mode_ = mode;
  s.dense_ = std::move(values);
  return s;
}

double SimilarityMatrix::operator()(std::size_t i, std::size_t j) const
{
  if (dense_.size() > 0)
  {
    return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  if (i == j)
  {
    return 1.0;
  }
  if (mode_ == SimilarityMode::KReciprocalJaccard)
  {
    return jaccard_sorted(reciprocal_sets_[i], reciprocal_sets_[j]);
  }
  return 1.0 - (*cosine_)(i, j);
}

SimilarityMatrix k_reciprocal_similarity(const EmbeddingSet& set, std::size_t k, std::size_t dense_threshold,
                                         Metric metric)
{
  SimilarityMatrix s;
  s.n_ = set.size();
  s.mode_ = SimilarityMode::KReciprocalJaccard;
  s.reciprocal_sets_ = reciprocal_sets(knn(set, k, metric));
  if (s.n_ <= dense_threshold)
  {
    const auto n = s.n_;
    RowMatrixD dense(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t i) {
      dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j)
      {
        const double v = jaccard_sorted(s.reciprocal_sets_[i], s.reciprocal_sets_[j]);
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        dense(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    });
    s.dense_ = std::move(dense);
  }
  return s;
}

SimilarityMatrix cosine_similarity(const EmbeddingSet& set, std::size_t dense_threshold)
{
  SimilarityMatrix s;
  s.n_ = set.size();
  s.mode_ = SimilarityMode::Cosine;
  s.cosine_ = std::make_shared<const MetricDistance>(set, Metric::Cosine);
  if (s.n_ <= dense_threshold)
  {
    const auto n = s.n_;
    RowMatrixD dense(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j)
      {
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0 - (*s.cosine_)(i, j);
      }
    });
    s.dense_ = std::move(dense);
  }
  return s;
}

SimilarityMatrix make_similarity(const EmbeddingSet& set, SimilarityMode mode, std::size_t k,
                                 std::size_t dense_threshold)
{
  if (mode == SimilarityMode::Cosine)
  {
    return cosine_similarity(set, dense_threshold);
  }
  return k_reciprocal_similarity(set, k, dense_threshold);
}

} // namespace aas
