#pragma once

#include "aas/geometry.hpp"
#include "aas/types.hpp"

#include <vector>

namespace aas
{

struct DbscanParams
{
  double eps = 0.6;
  int min_samples = 4;
};

/// DBSCAN over an arbitrary distance. Core points have >= min_samples
/// neighbours within eps counting themselves. Clusters are numbered by their
/// lowest core index; a border point joins the cluster of its lowest-index
/// core neighbour. Noise points become flagged singleton clusters.
Partition dbscan(const DistanceView& dist, const DbscanParams& params);

/// Core-point mask for the same neighbourhood rule.
std::vector<bool> dbscan_core_points(const DistanceView& dist, const DbscanParams& params);

/// FINCH levels, finest first. Each level merges the previous level's
/// clusters through the first-neighbour graph of their means.
struct FinchHierarchy
{
  std::vector<Partition> levels;
};

/// Components of the first-neighbour graph: i ~ j if j is i's first
/// neighbour, i is j's, or both share a first neighbour.
std::vector<int> first_neighbor_components(const std::vector<std::size_t>& first_neighbor);

FinchHierarchy finch(const EmbeddingSet& set, Metric metric = Metric::Cosine);

/// Level `level` tagged as view B. Throws LevelOutOfRange.
Partition select_view(const FinchHierarchy& hierarchy, std::size_t level);

} // namespace aas
