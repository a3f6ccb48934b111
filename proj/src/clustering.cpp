#include "aas/clustering.hpp"

#include "aas/errors.hpp"
#include "aas/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aas
{

namespace
{

std::vector<std::vector<std::size_t>> eps_neighborhoods(const DistanceView& dist, double eps)
{
  const auto n = dist.size();
  std::vector<std::vector<std::size_t>> out(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
    {
      if (i == j || dist(i, j) <= eps) out[i].push_back(j);
    }
  });
  return out;
}

class DisjointSet
{
public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x)
  {
    while (parent_[x] != x)
    {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b)
  {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

private:
  std::vector<std::size_t> parent_;
};

// First neighbour of each row under the metric; ties to the lower index.
std::vector<std::size_t> first_neighbors(const RowMatrixD& points, Metric metric)
{
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  RowMatrixD rows = points;
  std::vector<bool> zero(n, false);
  if (metric == Metric::Cosine)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      const double norm = rows.row(static_cast<Eigen::Index>(i)).norm();
      if (norm == 0.0) zero[i] = true;
      else rows.row(static_cast<Eigen::Index>(i)) /= norm;
    }
  }
  auto distance = [&](std::size_t i, std::size_t j) {
    const double* a = rows.row(static_cast<Eigen::Index>(i)).data();
    const double* b = rows.row(static_cast<Eigen::Index>(j)).data();
    if (metric == Metric::Cosine)
    {
      // a zero-norm cluster mean is treated as orthogonal to everything
      if (zero[i] || zero[j]) return 1.0;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
      return std::clamp(1.0 - s, 0.0, 2.0);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };
  std::vector<std::size_t> out(n);
  parallel_for(n, [&](std::size_t i) {
    std::size_t best = i == 0 ? 1 : 0;
    double best_d = distance(i, best);
    for (std::size_t j = best + 1; j < n; ++j)
    {
      if (j == i) continue;
      const double dj = distance(i, j);
      if (dj < best_d)
      {
        best = j;
        best_d = dj;
      }
    }
    out[i] = best;
  });
  return out;
}

} // namespace

std::vector<bool> dbscan_core_points(const DistanceView& dist, const DbscanParams& params)
{
  if (!(params.eps > 0.0) || !std::isfinite(params.eps) || params.min_samples < 1)
  {
    throw ValidationError("dbscan: eps must be positive and min_samples >= 1");
  }
  const auto hoods = eps_neighborhoods(dist, params.eps);
  std::vector<bool> core(hoods.size());
  for (std::size_t i = 0; i < hoods.size(); ++i)
  {
    core[i] = hoods[i].size() >= static_cast<std::size_t>(params.min_samples);
  }
  return core;
}

Partition dbscan(const DistanceView& dist, const DbscanParams& params)
{
  if (!(params.eps > 0.0) || !std::isfinite(params.eps) || params.min_samples < 1)
  {
    throw ValidationError("dbscan: eps must be positive and min_samples >= 1");
  }
  const auto n = dist.size();
  const auto hoods = eps_neighborhoods(dist, params.eps);
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    core[i] = hoods[i].size() >= static_cast<std::size_t>(params.min_samples);
  }

  // density-connected core components, rooted at their lowest index
  DisjointSet ds(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!core[i]) continue;
    for (auto j : hoods[i])
    {
      if (core[j]) ds.unite(i, j);
    }
  }

  std::vector<int> labels(n, -1);
  std::vector<bool> outliers(n, false);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!core[i]) continue;
    const auto r = ds.find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    if (core[i]) continue;
    // hoods are in ascending index order
    for (auto j : hoods[i])
    {
      if (core[j])
      {
        labels[i] = labels[j];
        break;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    if (labels[i] < 0)
    {
      labels[i] = next++;
      outliers[i] = true;
    }
  }
  return Partition(std::move(labels), std::move(outliers), MethodTag::A).renumbered();
}

std::vector<int> first_neighbor_components(const std::vector<std::size_t>& first_neighbor)
{
  const auto n = first_neighbor.size();
  DisjointSet ds(n);
  // j == kappa(i) or i == kappa(j) or kappa(i) == kappa(j): all covered by
  // joining every i with its first neighbour.
  for (std::size_t i = 0; i < n; ++i)
  {
    ds.unite(i, first_neighbor[i]);
  }
  std::vector<int> labels(n);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto r = ds.find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

FinchHierarchy finch(const EmbeddingSet& set, Metric metric)
{
  const auto n = set.size();
  if (n < 2)
  {
    throw ValidationError("finch: need at least two samples");
  }
  RowMatrixD points = set.vectors().cast<double>();
  if (metric == Metric::Cosine)
  {
    for (Eigen::Index i = 0; i < points.rows(); ++i)
    {
      const double norm = points.row(i).norm();
      if (norm == 0.0)
      {
        throw ZeroVectorError("finch: sample '" + set.ids()[static_cast<std::size_t>(i)] + "' has a zero vector");
      }
      points.row(i) /= norm;
    }
  }

  FinchHierarchy h;
  std::vector<int> sample_labels(n);
  std::iota(sample_labels.begin(), sample_labels.end(), 0);
  std::size_t clusters = n;
  RowMatrixD current = points;
  while (clusters > 1)
  {
    const auto group = first_neighbor_components(first_neighbors(current, metric));
    const auto next_count = static_cast<std::size_t>(*std::max_element(group.begin(), group.end()) + 1);
    if (next_count == clusters) break;

    for (auto& l : sample_labels) l = group[static_cast<std::size_t>(l)];
    h.levels.emplace_back(Partition(sample_labels, MethodTag::B).renumbered());
    // renumbered() keeps first-occurrence order, which matches component order
    sample_labels = h.levels.back().labels;

    RowMatrixD means = RowMatrixD::Zero(static_cast<Eigen::Index>(next_count), points.cols());
    std::vector<double> counts(next_count, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
      const auto l = static_cast<Eigen::Index>(sample_labels[i]);
      means.row(l) += points.row(static_cast<Eigen::Index>(i));
      counts[static_cast<std::size_t>(l)] += 1.0;
    }
    for (std::size_t c = 0; c < next_count; ++c) means.row(static_cast<Eigen::Index>(c)) /= counts[c];
    current = std::move(means);
    clusters = next_count;
  }
  return h;
}

Partition select_view(const FinchHierarchy& hierarchy, std::size_t level)
{
  if (level >= hierarchy.levels.size())
  {
    throw LevelOutOfRange("finch level " + std::to_string(level) + " out of range (" +
                          std::to_string(hierarchy.levels.size()) + " levels)");
  }
  Partition p = hierarchy.levels[level];
  p.method = MethodTag::B;
  return p;
}

} // namespace aas
