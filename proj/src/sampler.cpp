#include "aas/sampler.hpp"

#include "aas/errors.hpp"

#include <algorithm>
#include <cmath>

namespace aas
{

namespace
{

ConditionalDistribution normalised(std::vector<double> weights)
{
  ConditionalDistribution out;
  double total = 0.0;
  for (double w : weights) total += w;
  if (weights.empty())
  {
    return out;
  }
  if (!(total > 0.0))
  {
    out.degenerate = true;
    out.probabilities.assign(weights.size(), 1.0 / static_cast<double>(weights.size()));
    return out;
  }
  for (auto& w : weights) w /= total;
  out.probabilities = std::move(weights);
  return out;
}

} // namespace

ConditionalDistribution os_conditional(std::span<const CandidatePair> pool_os)
{
  std::vector<double> w;
  w.reserve(pool_os.size());
  for (const auto& c : pool_os) w.push_back(std::max(0.0, c.similarity));
  return normalised(std::move(w));
}

ConditionalDistribution us_conditional(std::span<const CandidatePair> pool_us, const UsWeighting& weighting)
{
  ConditionalDistribution out;
  if (pool_us.empty())
  {
    return out;
  }
  const auto type_of = [](const CandidatePair& c) { return static_cast<std::size_t>(c.pair_type); };

  std::array<std::size_t, 3> type_count{0, 0, 0};
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> group_count; // (type, region) -> pairs
  std::map<std::pair<std::size_t, std::size_t>, double> group_sim;
  for (const auto& c : pool_us)
  {
    ++type_count[type_of(c)];
    ++group_count[{type_of(c), c.region}];
    group_sim[{type_of(c), c.region}] += std::max(0.0, c.similarity);
  }
  std::array<std::size_t, 3> regions_per_type{0, 0, 0};
  for (const auto& [key, _] : group_count) ++regions_per_type[key.first];

  double beta_total = 0.0;
  for (std::size_t t = 0; t < 3; ++t)
  {
    if (type_count[t] > 0) beta_total += weighting.beta[t];
  }
  const bool uniform_types = !(beta_total > 0.0);
  std::size_t present_types = 0;
  for (auto c : type_count) present_types += c > 0 ? 1 : 0;

  out.probabilities.reserve(pool_us.size());
  for (const auto& c : pool_us)
  {
    const auto t = type_of(c);
    const std::pair<std::size_t, std::size_t> key{t, c.region};
    const double pi = uniform_types ? 1.0 / static_cast<double>(present_types) : weighting.beta[t] / beta_total;
    const double rho = weighting.region_by_count
                           ? static_cast<double>(group_count[key]) / static_cast<double>(type_count[t])
                           : 1.0 / static_cast<double>(regions_per_type[t]);
    double omega = 1.0 / static_cast<double>(group_count[key]);
    if (weighting.pair_by_similarity && group_sim[key] > 0.0)
    {
      omega = std::max(0.0, c.similarity) / group_sim[key];
    }
    else if (weighting.pair_by_similarity)
    {
      out.degenerate = true;
    }
    out.probabilities.push_back(pi * rho * omega);
  }
  return out;
}

WeightedPairPool marginal(std::span<const CandidatePair> pool_os,
                          std::span<const CandidatePair> pool_us,
                          double epsilon,
                          const UsWeighting& weighting)
{
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
  {
    throw ValidationError("epsilon must lie in [0,1]");
  }
  WeightedPairPool pool;
  if (pool_os.empty() && pool_us.empty())
  {
    return pool;
  }
  pool.empty = false;
  pool.epsilon_effective = pool_os.empty() ? 0.0 : pool_us.empty() ? 1.0 : epsilon;

  const auto os = os_conditional(pool_os);
  const auto us = us_conditional(pool_us, weighting);
  pool.degenerate_os = os.degenerate;
  pool.degenerate_us = us.degenerate;
  for (std::size_t i = 0; i < pool_os.size(); ++i)
  {
    pool.pairs.push_back(pool_os[i]);
    pool.probabilities.push_back(pool.epsilon_effective * os.probabilities[i]);
  }
  for (std::size_t i = 0; i < pool_us.size(); ++i)
  {
    pool.pairs.push_back(pool_us[i]);
    pool.probabilities.push_back((1.0 - pool.epsilon_effective) * us.probabilities[i]);
  }
  for (const auto& c : pool.pairs)
  {
    ++pool.totals[{c.origin, c.pair_type, c.region}];
  }
  return pool;
}

double unit_uniform(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SequentialDrawer::SequentialDrawer(const WeightedPairPool& pool, std::uint64_t seed)
    : weights_(pool.probabilities), taken_(pool.probabilities.size(), false),
      remaining_(pool.probabilities.size()), rng_(seed)
{
}

std::optional<std::size_t> SequentialDrawer::next()
{
  if (remaining_ == 0)
  {
    return std::nullopt;
  }
  double mass = 0.0;
  std::size_t last_positive = weights_.size();
  for (std::size_t i = 0; i < weights_.size(); ++i)
  {
    if (!taken_[i] && weights_[i] > 0.0)
    {
      mass += weights_[i];
      last_positive = i;
    }
  }
  const double u = unit_uniform(rng_);
  std::size_t pick = weights_.size();
  if (mass > 0.0)
  {
    const double target = u * mass;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
    {
      if (taken_[i] || !(weights_[i] > 0.0)) continue;
      cumulative += weights_[i];
      if (target < cumulative)
      {
        pick = i;
        break;
      }
    }
    if (pick == weights_.size()) pick = last_positive;
  }
  else
  {
    auto slot = static_cast<std::size_t>(u * static_cast<double>(remaining_));
    slot = std::min(slot, remaining_ - 1);
    for (std::size_t i = 0; i < weights_.size(); ++i)
    {
      if (taken_[i]) continue;
      if (slot == 0)
      {
        pick = i;
        break;
      }
      --slot;
    }
  }
  taken_[pick] = true;
  --remaining_;
  return pick;
}

std::vector<PairKey> draw_batch(const WeightedPairPool& pool, std::size_t budget_pairs, std::uint64_t seed)
{
  std::vector<PairKey> out;
  SequentialDrawer drawer(pool, seed);
  while (out.size() < budget_pairs)
  {
    auto i = drawer.next();
    if (!i) break;
    out.push_back(pool.pairs[*i].pair);
  }
  return out;
}

std::size_t pair_budget(std::size_t n, double fraction)
{
  if (n < 2)
  {
    throw ValidationError("pair_budget: need n >= 2");
  }
  if (!(fraction > 0.0 && fraction < 1.0))
  {
    throw ValidationError("pair_budget: fraction must lie in (0,1)");
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  // guard against products like 0.0005 * 2000 landing just under an integer
  return static_cast<std::size_t>(std::floor(fraction * pairs * (1.0 + 1e-12)));
}

} // namespace aas
