#pragma once

#include "aas/constraint_store.hpp"
#include "aas/geometry.hpp"
#include "aas/types.hpp"

#include <utility>
#include <vector>

namespace aas
{

struct Assignment
{
  std::vector<std::size_t> column_of_row;
  double total_cost = 0.0;
};

/// Minimum-cost injective row -> column assignment for r <= c.
/// Throws InfeasibleShape when r > c.
Assignment hungarian(const RowMatrixD& cost);

struct Coloring
{
  std::vector<int> color;
  int num_colors = 0;
};

/// Largest-degree-first greedy colouring, ties to the lower node index.
Coloring greedy_color(std::size_t num_nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Cannot-link conflict graph over the must-link groups of one cluster.
struct ConflictGraph
{
  std::vector<std::vector<std::size_t>> nodes; // sorted members, ordered by first member
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> components; // node indices, ordered by first node
  std::vector<int> component_colors;                // greedy colour count per component
};

/// Nodes are the store's must-link components restricted to the cluster;
/// an edge joins two nodes whose components carry a cannot-link.
ConflictGraph build_conflict_graph(const std::vector<std::size_t>& cluster_members, const ConstraintStore& store);

enum class Linkage
{
  Single,
  Average
};

struct Np3Options
{
  Linkage linkage = Linkage::Single;
  double virtual_margin = 0.1; // fraction of the largest real cost
};

struct PurifyResult
{
  std::vector<std::pair<std::size_t, int>> labels; // sample -> new label
  int next_id = 0;
};

/// Splits one cluster so that every cannot-link inside it is separated:
/// colour the hardest conflict component, then match the remaining
/// components onto the labels created so far.
PurifyResult purify_cluster(const std::vector<std::size_t>& cluster_members,
                            const ConstraintStore& store,
                            const DistanceView& dist,
                            int next_id,
                            const Np3Options& options = {});

/// Unions every pair of clusters joined by a must-link; result renumbered.
Partition merge_must_links(const Partition& part, const ConstraintStore& store);

/// Merge must-links, purify every cluster with a violated cannot-link, renumber.
Partition refine(const Partition& part,
                 const ConstraintStore& store,
                 const DistanceView& dist,
                 const Np3Options& options = {});

/// Count of must-link pairs split and cannot-link pairs joined under `part`.
std::size_t count_violations(const Partition& part, const ConstraintStore& store);

} // namespace aas
