#pragma once

// The synthetic benchmark shared by the pipeline tests and the acceptance
// binary: 30 identities of 10 samples, 220 oracle answers over 5 cycles.

#include "aas/pipeline.hpp"

namespace scenario
{

inline aas::SyntheticSpec benchmark_data(std::uint64_t seed)
{
  aas::SyntheticSpec s;
  s.num_identities = 30;
  s.samples_per_identity = 10;
  s.dim = 16;
  s.within_spread = 0.75;
  s.between_spread = 1.0;
  s.rng_seed = seed;
  return s;
}

inline aas::RunConfig benchmark_config(std::uint64_t seed)
{
  aas::RunConfig c;
  c.knn_k = 10;
  c.dbscan_eps = 0.5;
  c.budget_fraction_per_cycle = 0.001;
  c.num_cycles = 5;
  c.rng_seed = seed;
  return c;
}

} // namespace scenario
