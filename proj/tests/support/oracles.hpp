#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Nothing here calls into the library's algorithms; each oracle
// recomputes its answer from first principles on small inputs.

#include "aas/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle
{

using Rng = std::mt19937_64;

inline aas::EmbeddingSet make_set(const aas::RowMatrixF& vectors,
                                  std::optional<std::vector<std::string>> identities = std::nullopt)
{
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) ids.push_back("x" + std::to_string(i));
  return aas::EmbeddingSet(std::move(ids), vectors, std::nullopt, std::move(identities));
}

inline aas::EmbeddingSet points_1d(const std::vector<double>& xs)
{
  aas::RowMatrixF m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = static_cast<float>(xs[i]);
  return make_set(m);
}

inline aas::RowMatrixF gaussian_matrix(std::size_t n, std::size_t d, Rng& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  aas::RowMatrixF m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<float>(g(rng));
  return m;
}

inline double cosine(const aas::RowMatrixF& m, std::size_t i, std::size_t j)
{
  double dot = 0, ni = 0, nj = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
  {
    const double a = m(static_cast<Eigen::Index>(i), c), b = m(static_cast<Eigen::Index>(j), c);
    dot += a * b;
    ni += a * a;
    nj += b * b;
  }
  return dot / std::sqrt(ni * nj);
}

inline aas::RowMatrixD cosine_distance_matrix(const aas::RowMatrixF& m)
{
  const auto n = static_cast<std::size_t>(m.rows());
  aas::RowMatrixD d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : std::clamp(1.0 - cosine(m, i, j), 0.0, 2.0);
  // exact symmetry so both orders compare equal
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  return d;
}

inline std::vector<int> random_labels(std::size_t n, int max_clusters, Rng& rng)
{
  std::uniform_int_distribution<int> pick(0, std::max(0, max_clusters - 1));
  std::vector<int> labels(n);
  for (auto& l : labels) l = pick(rng);
  return labels;
}

// ---------------------------------------------------------------- partitions

/// True when the two labelings induce the same grouping.
inline bool isomorphic(const std::vector<int>& x, const std::vector<int>& y)
{
  if (x.size() != y.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    auto [f, fi] = fwd.emplace(x[i], y[i]);
    auto [b, bi] = bwd.emplace(y[i], x[i]);
    if (f->second != y[i] || b->second != x[i]) return false;
  }
  return true;
}

struct RawConstraint
{
  std::size_t a, b;
  bool must_link;
};

/// Random consistent constraints: a hidden labeling decides each relation.
inline std::vector<RawConstraint> random_constraints(std::size_t n, std::size_t count, int hidden_clusters, Rng& rng)
{
  const auto hidden = random_labels(n, hidden_clusters, rng);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<RawConstraint> out;
  const std::size_t total = n * (n - 1) / 2;
  count = std::min(count, total);
  while (out.size() < count)
  {
    auto a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.emplace(a, b).second) continue;
    out.push_back({a, b, hidden[a] == hidden[b]});
  }
  return out;
}

inline std::size_t count_violations(const std::vector<int>& labels, const std::vector<RawConstraint>& cs)
{
  std::size_t bad = 0;
  for (const auto& c : cs)
  {
    const bool same = labels[c.a] == labels[c.b];
    if (same != c.must_link) ++bad;
  }
  return bad;
}

/// Pair-counting ARI straight from the definition.
inline double ari(const std::vector<int>& x, const std::vector<int>& y)
{
  const std::size_t n = x.size();
  double both = 0, in_x = 0, in_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
    {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      both += sx && sy;
      in_x += sx;
      in_y += sy;
    }
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  const double expected = in_x * in_y / pairs;
  const double max_index = (in_x + in_y) / 2.0;
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

// ------------------------------------------------------------- assignment

/// Minimum over all injective row -> column maps.
inline double brute_assignment(const aas::RowMatrixD& cost)
{
  const auto r = static_cast<std::size_t>(cost.rows()), c = static_cast<std::size_t>(cost.cols());
  std::vector<bool> used(c, false);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> go = [&](std::size_t row, double acc) {
    if (row == r)
    {
      best = std::min(best, acc);
      return;
    }
    for (std::size_t col = 0; col < c; ++col)
    {
      if (used[col]) continue;
      used[col] = true;
      go(row + 1, acc + cost(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)));
      used[col] = false;
    }
  };
  go(0, 0.0);
  return best;
}

// ---------------------------------------------------------------- colouring

using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

inline bool proper(const std::vector<int>& color, const Edges& edges)
{
  return std::none_of(edges.begin(), edges.end(), [&](auto e) { return color[e.first] == color[e.second]; });
}

/// Smallest k admitting a proper colouring (exhaustive backtracking).
inline int chromatic_number(std::size_t n, const Edges& edges)
{
  if (n == 0) return 0;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [u, v] : edges)
  {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (int k = 1; k <= static_cast<int>(n); ++k)
  {
    std::vector<int> color(n, -1);
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
      if (i == n) return true;
      for (int c = 0; c < k; ++c)
      {
        bool ok = true;
        for (auto j : adj[i]) ok = ok && color[j] != c;
        if (!ok) continue;
        color[i] = c;
        if (go(i + 1)) return true;
        color[i] = -1;
      }
      return false;
    };
    if (go(0)) return k;
  }
  return static_cast<int>(n);
}

inline Edges random_graph(std::size_t n, double density, Rng& rng)
{
  std::bernoulli_distribution coin(density);
  Edges e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

// ------------------------------------------------------------------ retrieval

/// Reference metrics from raw similarity lists. Ranks come from counting,
/// not sorting: rank(j) = 1 + #{i : s_i > s_j or (s_i == s_j and i < j)}.
struct RetrievalTruth
{
  double map = 0, minp = 0, baks = 0, auc = 0;
  std::map<std::size_t, double> top_k;
  bool auc_defined = false;
};

inline RetrievalTruth brute_metrics(const std::vector<std::vector<double>>& sims,
                                    const std::vector<std::string>& query_ids,
                                    const std::vector<std::string>& gallery_ids)
{
  RetrievalTruth t;
  std::set<std::string> gallery_set(gallery_ids.begin(), gallery_ids.end());
  std::vector<double> ap, inp, known_scores, unknown_scores;
  std::map<std::size_t, std::vector<double>> hits;
  std::map<std::string, std::pair<double, double>> per_identity; // correct, total
  for (std::size_t q = 0; q < sims.size(); ++q)
  {
    const auto& s = sims[q];
    const double best = *std::max_element(s.begin(), s.end());
    if (!gallery_set.count(query_ids[q]))
    {
      unknown_scores.push_back(best);
      continue;
    }
    known_scores.push_back(best);
    std::vector<std::size_t> pos_ranks;
    for (std::size_t j = 0; j < s.size(); ++j)
    {
      if (gallery_ids[j] != query_ids[q]) continue;
      std::size_t rank = 1;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] > s[j] || (s[i] == s[j] && i < j)) ++rank;
      pos_ranks.push_back(rank);
    }
    std::sort(pos_ranks.begin(), pos_ranks.end());
    double sum = 0;
    for (std::size_t p = 0; p < pos_ranks.size(); ++p) sum += static_cast<double>(p + 1) / pos_ranks[p];
    ap.push_back(sum / pos_ranks.size());
    inp.push_back(static_cast<double>(pos_ranks.size()) / pos_ranks.back());
    for (std::size_t k : {1, 3, 5, 10}) hits[k].push_back(pos_ranks.front() <= k ? 1.0 : 0.0);
    auto& [correct, total] = per_identity[query_ids[q]];
    correct += pos_ranks.front() == 1;
    total += 1;
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  t.map = mean(ap);
  t.minp = mean(inp);
  for (auto& [k, v] : hits) t.top_k[k] = mean(v);
  std::vector<double> per;
  for (auto& [id, ct] : per_identity) per.push_back(ct.first / ct.second);
  t.baks = mean(per);
  if (!known_scores.empty() && !unknown_scores.empty())
  {
    double wins = 0;
    for (double k : known_scores)
      for (double u : unknown_scores) wins += k > u ? 1.0 : (k == u ? 0.5 : 0.0);
    t.auc = wins / (static_cast<double>(known_scores.size()) * unknown_scores.size());
    t.auc_defined = true;
  }
  return t;
}

// ------------------------------------------------------------------ regions

struct BruteRegion
{
  std::set<std::size_t> members;
};

/// Regions from explicit IoU over cluster member sets.
inline std::vector<BruteRegion> brute_regions(const std::vector<int>& a, const std::vector<int>& b)
{
  std::map<int, std::set<std::size_t>> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    ca[a[i]].insert(i);
    cb[b[i]].insert(i);
  }
  std::vector<std::set<std::size_t>> nodes;
  for (auto& [k, s] : ca) nodes.push_back(s);
  const std::size_t na = nodes.size();
  for (auto& [k, s] : cb) nodes.push_back(s);
  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::vector<bool> has_edge(nodes.size(), false);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = na; j < nodes.size(); ++j)
    {
      std::size_t inter = 0;
      for (auto x : nodes[i]) inter += nodes[j].count(x);
      const std::size_t uni = nodes[i].size() + nodes[j].size() - inter;
      if (inter > 0 && inter < uni)
      {
        parent[find(i)] = find(j);
        has_edge[i] = has_edge[j] = true;
      }
    }
  std::map<std::size_t, BruteRegion> by_root;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    if (!has_edge[i]) continue;
    by_root[find(i)].members.insert(nodes[i].begin(), nodes[i].end());
  }
  std::vector<BruteRegion> out;
  for (auto& [r, reg] : by_root) out.push_back(reg);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return *x.members.begin() < *y.members.begin(); });
  return out;
}

/// I_k = (A+ sym-diff B+) intersected with the closest cross-cluster pairs of
/// both views, unioned over regions.
inline std::set<std::pair<std::size_t, std::size_t>> brute_us_pairs(const std::vector<int>& a,
                                                                    const std::vector<int>& b,
                                                                    const aas::RowMatrixD& dist)
{
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& region : brute_regions(a, b))
  {
    std::vector<std::size_t> m(region.members.begin(), region.members.end());
    std::set<std::pair<std::size_t, std::size_t>> sym;
    for (std::size_t x = 0; x < m.size(); ++x)
      for (std::size_t y = x + 1; y < m.size(); ++y)
        if ((a[m[x]] == a[m[y]]) != (b[m[x]] == b[m[y]])) sym.emplace(m[x], m[y]);
    std::set<std::pair<std::size_t, std::size_t>> cand;
    for (const auto* view : {&a, &b})
    {
      std::set<int> labels;
      for (auto i : m) labels.insert((*view)[i]);
      for (int l1 : labels)
        for (int l2 : labels)
        {
          if (l1 >= l2) continue;
          std::pair<std::size_t, std::size_t> best{0, 0};
          double best_d = std::numeric_limits<double>::infinity();
          for (auto i : m)
            for (auto j : m)
            {
              if ((*view)[i] != l1 || (*view)[j] != l2) continue;
              const std::pair<std::size_t, std::size_t> p{std::min(i, j), std::max(i, j)};
              const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
              if (d < best_d || (d == best_d && p < best))
              {
                best_d = d;
                best = p;
              }
            }
          cand.insert(best);
        }
    }
    for (const auto& p : sym)
      if (cand.count(p)) out.insert(p);
  }
  return out;
}

} // namespace oracle
