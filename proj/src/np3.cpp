#include "aas/np3.hpp"

#include "aas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace aas
{

Assignment hungarian(const RowMatrixD& cost)
{
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  if (rows > cols)
  {
    throw InfeasibleShape("hungarian: " + std::to_string(rows) + " rows exceed " + std::to_string(cols) +
                          " columns; pad the matrix first");
  }
  if (!cost.allFinite())
  {
    throw ValidationError("hungarian: costs must be finite");
  }
  Assignment out;
  if (rows == 0)
  {
    return out;
  }

  // Shortest augmenting path with row/column potentials, 1-based with a
  // sentinel column 0.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i)
  {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<bool> used(cols + 1, false);
    do
    {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j)
      {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j])
        {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta)
        {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j)
      {
        if (used[j])
        {
          u[match[j]] += delta;
          v[j] -= delta;
        }
        else
        {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do
    {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  out.column_of_row.assign(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j)
  {
    if (match[j] != 0) out.column_of_row[match[j] - 1] = j - 1;
  }
  for (std::size_t i = 0; i < rows; ++i)
  {
    out.total_cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.column_of_row[i]));
  }
  return out;
}

Coloring greedy_color(std::size_t num_nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
{
  std::vector<std::vector<std::size_t>> adj(num_nodes);
  for (const auto& [a, b] : edges)
  {
    if (a == b)
    {
      throw ValidationError("greedy_color: self-loop on node " + std::to_string(a));
    }
    if (a >= num_nodes || b >= num_nodes)
    {
      throw ValidationError("greedy_color: edge endpoint out of range");
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nb : adj)
  {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  std::vector<std::size_t> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return adj[l].size() > adj[r].size(); });

  Coloring out;
  out.color.assign(num_nodes, -1);
  std::vector<bool> taken;
  for (auto node : order)
  {
    taken.assign(adj[node].size() + 1, false);
    for (auto nb : adj[node])
    {
      const int c = out.color[nb];
      if (c >= 0 && static_cast<std::size_t>(c) < taken.size()) taken[static_cast<std::size_t>(c)] = true;
    }
    int c = 0;
    while (taken[static_cast<std::size_t>(c)]) ++c;
    out.color[node] = c;
    out.num_colors = std::max(out.num_colors, c + 1);
  }
  return out;
}

ConflictGraph build_conflict_graph(const std::vector<std::size_t>& cluster_members, const ConstraintStore& store)
{
  ConflictGraph g;
  std::map<std::size_t, std::size_t> node_of_component;
  std::vector<std::size_t> members = cluster_members;
  std::sort(members.begin(), members.end());
  for (auto s : members)
  {
    const auto comp = store.component_of(s);
    auto [it, inserted] = node_of_component.try_emplace(comp, g.nodes.size());
    if (inserted) g.nodes.emplace_back();
    g.nodes[it->second].push_back(s);
  }
  for (const auto& [comp, node] : node_of_component)
  {
    for (auto other : store.conflicting_components(comp))
    {
      auto it = node_of_component.find(other);
      if (it != node_of_component.end() && node < it->second)
      {
        g.edges.emplace_back(node, it->second);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());

  // components of the conflict graph
  const auto n = g.nodes.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x)
    {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : g.edges)
  {
    const auto ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<std::size_t, std::size_t> comp_index;
  for (std::size_t i = 0; i < n; ++i)
  {
    auto [it, inserted] = comp_index.try_emplace(find(i), g.components.size());
    if (inserted) g.components.emplace_back();
    g.components[it->second].push_back(i);
  }
  for (const auto& comp : g.components)
  {
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t k = 0; k < comp.size(); ++k) local[comp[k]] = k;
    std::vector<std::pair<std::size_t, std::size_t>> sub;
    for (const auto& [a, b] : g.edges)
    {
      if (local.count(a)) sub.emplace_back(local[a], local[b]);
    }
    g.component_colors.push_back(greedy_color(comp.size(), sub).num_colors);
  }
  return g;
}

namespace
{

double group_distance(const std::vector<std::size_t>& a,
                      const std::vector<std::size_t>& b,
                      const DistanceView& dist,
                      Linkage linkage)
{
  double best = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (auto u : a)
  {
    for (auto v : b)
    {
      const double d = u == v ? 0.0 : dist(u, v);
      best = std::min(best, d);
      total += d;
    }
  }
  if (linkage == Linkage::Average)
  {
    return total / static_cast<double>(a.size() * b.size());
  }
  return best;
}

} // namespace

PurifyResult purify_cluster(const std::vector<std::size_t>& cluster_members,
                            const ConstraintStore& store,
                            const DistanceView& dist,
                            int next_id,
                            const Np3Options& options)
{
  const auto g = build_conflict_graph(cluster_members, store);
  PurifyResult out;
  out.next_id = next_id;
  if (g.nodes.empty())
  {
    return out;
  }

  std::vector<std::size_t> order(g.components.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (g.component_colors[l] != g.component_colors[r]) return g.component_colors[l] > g.component_colors[r];
    return g.components[l].size() > g.components[r].size();
  });

  std::vector<int> label_ids;
  std::vector<std::vector<std::size_t>> label_members;
  auto assign_node = [&](std::size_t node, std::size_t label_slot) {
    for (auto s : g.nodes[node])
    {
      out.labels.emplace_back(s, label_ids[label_slot]);
      label_members[label_slot].push_back(s);
    }
  };

  // hardest component: one fresh label per colour class
  {
    const auto& comp = g.components[order.front()];
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t k = 0; k < comp.size(); ++k) local[comp[k]] = k;
    std::vector<std::pair<std::size_t, std::size_t>> sub;
    for (const auto& [a, b] : g.edges)
    {
      if (local.count(a)) sub.emplace_back(local[a], local[b]);
    }
    const auto coloring = greedy_color(comp.size(), sub);
    for (int c = 0; c < coloring.num_colors; ++c)
    {
      label_ids.push_back(out.next_id++);
      label_members.emplace_back();
    }
    for (std::size_t k = 0; k < comp.size(); ++k)
    {
      assign_node(comp[k], static_cast<std::size_t>(coloring.color[k]));
    }
  }

  for (std::size_t oi = 1; oi < order.size(); ++oi)
  {
    const auto& comp = g.components[order[oi]];
    const auto rows = comp.size();
    const auto real_cols = label_ids.size();
    const auto cols = std::max(rows, real_cols);
    RowMatrixD cost(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    double max_cost = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
    {
      for (std::size_t c = 0; c < real_cols; ++c)
      {
        const double d = group_distance(g.nodes[comp[r]], label_members[c], dist, options.linkage);
        cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = d;
        max_cost = std::max(max_cost, d);
      }
    }
    if (cols > real_cols)
    {
      const double virtual_cost = max_cost + std::max(options.virtual_margin * max_cost, 1e-9);
      cost.rightCols(static_cast<Eigen::Index>(cols - real_cols)).setConstant(virtual_cost);
    }
    const auto assignment = hungarian(cost);
    // label sets grow only after the whole component is placed
    std::vector<std::pair<std::size_t, std::size_t>> placements;
    for (std::size_t r = 0; r < rows; ++r)
    {
      auto col = assignment.column_of_row[r];
      if (col >= real_cols)
      {
        label_ids.push_back(out.next_id++);
        label_members.emplace_back();
        col = label_ids.size() - 1;
      }
      placements.emplace_back(comp[r], col);
    }
    for (const auto& [node, slot] : placements) assign_node(node, slot);
  }
  std::sort(out.labels.begin(), out.labels.end());
  return out;
}

Partition merge_must_links(const Partition& part, const ConstraintStore& store)
{
  if (part.size() != store.num_samples())
  {
    throw ValidationError("partition and constraint store cover different sample counts");
  }
  const auto n = part.size();
  const auto base = part.renumbered();
  const auto k = base.num_clusters();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x)
    {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto& mates = store.component_members(store.component_of(i));
    const auto rep = mates.front();
    const auto ra = find(static_cast<std::size_t>(base.labels[i]));
    const auto rb = find(static_cast<std::size_t>(base.labels[rep]));
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> labels(n);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i)
  {
    labels[i] = static_cast<int>(find(static_cast<std::size_t>(base.labels[i])));
    ++sizes[static_cast<std::size_t>(labels[i])];
  }
  std::vector<bool> outliers = base.outliers;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (sizes[static_cast<std::size_t>(labels[i])] > 1) outliers[i] = false;
  }
  return Partition(std::move(labels), std::move(outliers), part.method).renumbered();
}

Partition refine(const Partition& part, const ConstraintStore& store, const DistanceView& dist, const Np3Options& options)
{
  if (dist.size() != part.size())
  {
    throw ValidationError("distance view and partition cover different sample counts");
  }
  auto merged = merge_must_links(part, store);
  const auto clusters = merged.clusters();
  int next_id = static_cast<int>(clusters.size());
  std::vector<int> labels = merged.labels;
  for (const auto& members : clusters)
  {
    bool violated = false;
    for (std::size_t x = 0; x < members.size() && !violated; ++x)
    {
      const auto cx = store.component_of(members[x]);
      for (auto other : store.conflicting_components(cx))
      {
        // the other component is entirely inside this cluster after merging
        if (merged.labels[store.component_members(other).front()] == merged.labels[members[x]])
        {
          violated = true;
          break;
        }
      }
    }
    if (!violated) continue;
    const auto result = purify_cluster(members, store, dist, next_id, options);
    next_id = result.next_id;
    for (const auto& [sample, label] : result.labels) labels[sample] = label;
  }

  std::vector<std::size_t> sizes(static_cast<std::size_t>(next_id), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  std::vector<bool> outliers = merged.outliers;
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    if (sizes[static_cast<std::size_t>(labels[i])] > 1) outliers[i] = false;
  }
  return Partition(std::move(labels), std::move(outliers), MethodTag::Refined).renumbered();
}

std::size_t count_violations(const Partition& part, const ConstraintStore& store)
{
  std::size_t bad = 0;
  for (const auto& c : store.constraints())
  {
    const bool same = part.labels[c.pair.a()] == part.labels[c.pair.b()];
    if ((c.relation == Relation::MustLink) != same) ++bad;
  }
  return bad;
}

} // namespace aas
