#pragma once

#include "aas/constraint_store.hpp"
#include "aas/geometry.hpp"
#include "aas/types.hpp"

#include <set>
#include <vector>

namespace aas
{

/// Connected component of partially overlapping clusters from views A and B.
struct UncertaintyRegion
{
  std::size_t id = 0;
  std::vector<std::size_t> members; // sorted
  std::vector<int> clusters_a;      // sorted
  std::vector<int> clusters_b;      // sorted
  std::size_t medoid = 0;
};

enum class PoolOrigin
{
  OverSegmentation,
  UnderSegmentation
};

enum class PairType
{
  InlierInlier = 0,
  InlierOutlier = 1,
  OutlierOutlier = 2
};

PairType pair_type_of(bool outlier_u, bool outlier_v);
std::string_view to_string(PoolOrigin o);
std::string_view to_string(PairType t);

struct CandidatePair
{
  PairKey pair;
  PoolOrigin origin = PoolOrigin::UnderSegmentation;
  PairType pair_type = PairType::InlierInlier;
  std::size_t region = 0;       // us: region id; os: first region
  std::size_t other_region = 0; // os: second region; us: same as region
  double similarity = 0.0;
};

double cluster_iou(const std::vector<std::size_t>& members_1, const std::vector<std::size_t>& members_2);

/// Regions are ordered by their smallest member. Medoids minimise summed
/// cosine distance to the other members, ties to the lowest index.
std::vector<UncertaintyRegion> find_uncertainty_regions(const Partition& part_a,
                                                        const Partition& part_b,
                                                        const DistanceView& medoid_distance);

/// Cross-region medoid pairs: each medoid's k_max most similar other medoids,
/// kept when sim >= s_min and the store has no relation for them.
std::vector<CandidatePair> build_os_pool(const std::vector<UncertaintyRegion>& regions,
                                         const SimilarityMatrix& sim,
                                         std::size_t k_max,
                                         double s_min,
                                         const ConstraintStore* store = nullptr);

/// Symmetric difference of within-region same-cluster pairs under A and B.
std::set<PairKey> inconsistent_pairs(const UncertaintyRegion& region, const Partition& part_a, const Partition& part_b);

/// Closest cross-cluster pair for every pair of distinct clusters inside the
/// region, for both views (ties to the smallest PairKey).
std::set<PairKey> candidate_closest_pairs(const UncertaintyRegion& region,
                                          const Partition& part_a,
                                          const Partition& part_b,
                                          const DistanceView& dist);

/// Per region: inconsistent pairs intersected with closest candidates, typed by
/// the outlier flags of `outlier_view`, unknown relations only.
std::vector<CandidatePair> build_us_pool(const std::vector<UncertaintyRegion>& regions,
                                         const Partition& part_a,
                                         const Partition& part_b,
                                         const DistanceView& dist,
                                         const SimilarityMatrix& sim,
                                         const std::vector<bool>& outlier_flags,
                                         const ConstraintStore* store = nullptr);

} // namespace aas
