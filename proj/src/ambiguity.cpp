#include "aas/ambiguity.hpp"

#include "aas/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace aas
{

namespace
{

void check_same_samples(const Partition& a, const Partition& b)
{
  if (a.size() != b.size())
  {
    throw ValidationError("partitions cover different sample counts");
  }
}

struct ClosestPair
{
  double distance = std::numeric_limits<double>::infinity();
  PairKey pair;
  bool set = false;
};

void closest_for_view(const std::vector<std::size_t>& members,
                      const std::vector<int>& labels,
                      const DistanceView& dist,
                      std::set<PairKey>& out)
{
  std::map<std::pair<int, int>, ClosestPair> best;
  for (std::size_t x = 0; x < members.size(); ++x)
  {
    for (std::size_t y = x + 1; y < members.size(); ++y)
    {
      const auto u = members[x];
      const auto v = members[y];
      const int lu = labels[u];
      const int lv = labels[v];
      if (lu == lv) continue;
      const auto key = std::minmax(lu, lv);
      const double d = dist(u, v);
      PairKey p(u, v);
      auto& slot = best[{key.first, key.second}];
      if (!slot.set || d < slot.distance || (d == slot.distance && p < slot.pair))
      {
        slot = {d, p, true};
      }
    }
  }
  for (const auto& [_, c] : best) out.insert(c.pair);
}

} // namespace

PairType pair_type_of(bool outlier_u, bool outlier_v)
{
  if (outlier_u && outlier_v) return PairType::OutlierOutlier;
  if (outlier_u || outlier_v) return PairType::InlierOutlier;
  return PairType::InlierInlier;
}

std::string_view to_string(PoolOrigin o)
{
  return o == PoolOrigin::OverSegmentation ? "os" : "us";
}

std::string_view to_string(PairType t)
{
  switch (t)
  {
    case PairType::InlierInlier: return "inlier_inlier";
    case PairType::InlierOutlier: return "inlier_outlier";
    case PairType::OutlierOutlier: return "outlier_outlier";
  }
  return "inlier_inlier";
}

double cluster_iou(const std::vector<std::size_t>& members_1, const std::vector<std::size_t>& members_2)
{
  if (members_1.empty() || members_2.empty())
  {
    throw ValidationError("cluster_iou: both sets must be nonempty");
  }
  std::vector<std::size_t> a = members_1, b = members_2;
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<std::size_t> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(a.size() + b.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

std::vector<UncertaintyRegion> find_uncertainty_regions(const Partition& part_a,
                                                        const Partition& part_b,
                                                        const DistanceView& medoid_distance)
{
  check_same_samples(part_a, part_b);
  const auto clusters_a = part_a.clusters();
  const auto clusters_b = part_b.clusters();
  const auto ka = clusters_a.size();
  const auto kb = clusters_b.size();

  std::map<std::pair<int, int>, std::size_t> overlap;
  for (std::size_t i = 0; i < part_a.size(); ++i)
  {
    ++overlap[{part_a.labels[i], part_b.labels[i]}];
  }

  // bipartite cluster graph: A clusters are nodes [0, ka), B clusters [ka, ka + kb)
  std::vector<std::size_t> parent(ka + kb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x)
    {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::vector<bool> has_edge(ka + kb, false);
  for (const auto& [key, inter] : overlap)
  {
    const auto la = static_cast<std::size_t>(key.first);
    const auto lb = static_cast<std::size_t>(key.second);
    const bool identical = inter == clusters_a[la].size() && inter == clusters_b[lb].size();
    if (identical) continue; // IoU == 1
    has_edge[la] = has_edge[ka + lb] = true;
    const auto ra = find(la);
    const auto rb = find(ka + lb);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<std::size_t, UncertaintyRegion> by_root;
  for (std::size_t la = 0; la < ka; ++la)
  {
    if (!has_edge[la]) continue;
    auto& r = by_root[find(la)];
    r.clusters_a.push_back(static_cast<int>(la));
    r.members.insert(r.members.end(), clusters_a[la].begin(), clusters_a[la].end());
  }
  for (std::size_t lb = 0; lb < kb; ++lb)
  {
    if (!has_edge[ka + lb]) continue;
    by_root[find(ka + lb)].clusters_b.push_back(static_cast<int>(lb));
  }

  std::vector<UncertaintyRegion> regions;
  for (auto& [_, r] : by_root)
  {
    std::sort(r.members.begin(), r.members.end());
    regions.push_back(std::move(r));
  }
  std::sort(regions.begin(), regions.end(),
            [](const UncertaintyRegion& l, const UncertaintyRegion& r) { return l.members.front() < r.members.front(); });

  for (std::size_t k = 0; k < regions.size(); ++k)
  {
    auto& r = regions[k];
    r.id = k;
    double best = std::numeric_limits<double>::infinity();
    for (auto u : r.members)
    {
      double total = 0.0;
      for (auto v : r.members)
      {
        if (u != v) total += medoid_distance(u, v);
      }
      if (total < best)
      {
        best = total;
        r.medoid = u;
      }
    }
  }
  return regions;
}

std::vector<CandidatePair> build_os_pool(const std::vector<UncertaintyRegion>& regions,
                                         const SimilarityMatrix& sim,
                                         std::size_t k_max,
                                         double s_min,
                                         const ConstraintStore* store)
{
  std::map<PairKey, CandidatePair> pool;
  const auto m = regions.size();
  for (std::size_t i = 0; i < m; ++i)
  {
    std::vector<std::pair<double, std::size_t>> peers;
    for (std::size_t j = 0; j < m; ++j)
    {
      if (j != i) peers.emplace_back(sim(regions[i].medoid, regions[j].medoid), j);
    }
    std::sort(peers.begin(), peers.end(), [](const auto& l, const auto& r) {
      return l.first > r.first || (l.first == r.first && l.second < r.second);
    });
    const auto take = std::min(k_max, peers.size());
    for (std::size_t t = 0; t < take; ++t)
    {
      const auto [s, j] = peers[t];
      if (s < s_min) continue;
      PairKey p(regions[i].medoid, regions[j].medoid);
      if (store && store->relation_of(p) != Relation::Unknown) continue;
      CandidatePair c;
      c.pair = p;
      c.origin = PoolOrigin::OverSegmentation;
      c.pair_type = PairType::InlierInlier;
      c.region = std::min(i, j);
      c.other_region = std::max(i, j);
      c.similarity = s;
      pool.emplace(p, c);
    }
  }
  std::vector<CandidatePair> out;
  out.reserve(pool.size());
  for (auto& [_, c] : pool) out.push_back(c);
  return out;
}

std::set<PairKey> inconsistent_pairs(const UncertaintyRegion& region, const Partition& part_a, const Partition& part_b)
{
  check_same_samples(part_a, part_b);
  std::set<PairKey> out;
  const auto& mem = region.members;
  for (std::size_t x = 0; x < mem.size(); ++x)
  {
    for (std::size_t y = x + 1; y < mem.size(); ++y)
    {
      const bool same_a = part_a.labels[mem[x]] == part_a.labels[mem[y]];
      const bool same_b = part_b.labels[mem[x]] == part_b.labels[mem[y]];
      if (same_a != same_b) out.emplace(mem[x], mem[y]);
    }
  }
  return out;
}

std::set<PairKey> candidate_closest_pairs(const UncertaintyRegion& region,
                                          const Partition& part_a,
                                          const Partition& part_b,
                                          const DistanceView& dist)
{
  check_same_samples(part_a, part_b);
  std::set<PairKey> out;
  closest_for_view(region.members, part_a.labels, dist, out);
  closest_for_view(region.members, part_b.labels, dist, out);
  return out;
}

std::vector<CandidatePair> build_us_pool(const std::vector<UncertaintyRegion>& regions,
                                         const Partition& part_a,
                                         const Partition& part_b,
                                         const DistanceView& dist,
                                         const SimilarityMatrix& sim,
                                         const std::vector<bool>& outlier_flags,
                                         const ConstraintStore* store)
{
  check_same_samples(part_a, part_b);
  if (outlier_flags.size() != part_a.size())
  {
    throw ValidationError("outlier flag count does not match partition size");
  }
  std::vector<CandidatePair> out;
  for (const auto& region : regions)
  {
    for (const auto& p : candidate_closest_pairs(region, part_a, part_b, dist))
    {
      const bool same_a = part_a.labels[p.a()] == part_a.labels[p.b()];
      const bool same_b = part_b.labels[p.a()] == part_b.labels[p.b()];
      if (same_a == same_b) continue; // not in the symmetric difference
      if (store && store->relation_of(p) != Relation::Unknown) continue;
      CandidatePair c;
      c.pair = p;
      c.origin = PoolOrigin::UnderSegmentation;
      c.pair_type = pair_type_of(outlier_flags[p.a()], outlier_flags[p.b()]);
      c.region = c.other_region = region.id;
      c.similarity = sim(p.a(), p.b());
      out.push_back(c);
    }
  }
  return out;
}

} // namespace aas
