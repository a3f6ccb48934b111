#pragma once

#include "aas/ambiguity.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <vector>

namespace aas
{

struct ConditionalDistribution
{
  std::vector<double> probabilities;
  bool degenerate = false; // all weights were zero; uniform fallback used
};

/// P(Y | Y in U_os) proportional to similarity (negative values clamp to 0).
ConditionalDistribution os_conditional(std::span<const CandidatePair> pool_os);

/// Weighting knobs for the under-segmentation conditional.
struct UsWeighting
{
  std::array<double, 3> beta{1.0, 1.0, 1.0}; // inlier-inlier, inlier-outlier, outlier-outlier
  bool region_by_count = true;               // false: uniform over regions holding the type
  bool pair_by_similarity = true;            // false: uniform within (type, region)
};

/// P(Y | Y in U_us) = pi_type * rho_region|type * omega_pair|type,region.
ConditionalDistribution us_conditional(std::span<const CandidatePair> pool_us, const UsWeighting& weighting = {});

struct WeightedPairPool
{
  std::vector<CandidatePair> pairs; // os pairs first, then us pairs
  std::vector<double> probabilities;
  double epsilon_effective = 0.0;
  bool empty = true;
  bool degenerate_os = false;
  bool degenerate_us = false;
  std::map<std::tuple<PoolOrigin, PairType, std::size_t>, std::size_t> totals;

  std::size_t size() const { return pairs.size(); }
};

/// eps * P(.|os) + (1 - eps) * P(.|us); all mass moves to the nonempty pool
/// when the other is empty.
WeightedPairPool marginal(std::span<const CandidatePair> pool_os,
                          std::span<const CandidatePair> pool_us,
                          double epsilon,
                          const UsWeighting& weighting = {});

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::mt19937_64& rng);

/// Draws pool entries one at a time without replacement, each draw
/// proportional to the remaining probabilities. Entries with zero mass are
/// only reached once positive mass is exhausted (uniformly among them).
class SequentialDrawer
{
public:
  SequentialDrawer(const WeightedPairPool& pool, std::uint64_t seed);

  /// Index into pool.pairs, or nullopt when exhausted.
  std::optional<std::size_t> next();
  std::size_t remaining() const { return remaining_; }

private:
  std::vector<double> weights_;
  std::vector<bool> taken_;
  std::size_t remaining_;
  std::mt19937_64 rng_;
};

std::vector<PairKey> draw_batch(const WeightedPairPool& pool, std::size_t budget_pairs, std::uint64_t seed);

/// floor(fraction * n(n-1)/2).
std::size_t pair_budget(std::size_t n, double fraction);

} // namespace aas
