#pragma once

#include "aas/ambiguity.hpp"
#include "aas/clustering.hpp"
#include "aas/constraint_store.hpp"
#include "aas/geometry.hpp"
#include "aas/np3.hpp"
#include "aas/sampler.hpp"
#include "aas/types.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aas
{

struct SyntheticSpec
{
  std::size_t num_identities = 10;
  std::size_t samples_per_identity = 10;
  std::size_t dim = 16;
  double within_spread = 0.1;
  double between_spread = 1.0;
  std::uint64_t rng_seed = 0;
};

/// Gaussian identity centres (scale between_spread) with Gaussian samples
/// around them (scale within_spread). Ids are "s<index>", identities "id<k>".
EmbeddingSet generate_synthetic(const SyntheticSpec& spec);

/// Ground-truth answer: must-link iff identities match.
Constraint simulated_oracle(const EmbeddingSet& set, const PairKey& pair, int cycle);

/// Source of pair answers. nullopt means the oracle gave up (timeout).
class Oracle
{
public:
  virtual ~Oracle() = default;
  virtual std::optional<Relation> answer(const PairKey& pair) = 0;
};

class SimulatedOracle final : public Oracle
{
public:
  explicit SimulatedOracle(const EmbeddingSet& set);
  std::optional<Relation> answer(const PairKey& pair) override;
  std::size_t calls() const { return calls_; }

private:
  const EmbeddingSet* set_;
  std::size_t calls_ = 0;
};

struct CycleRecord
{
  int cycle = 0;
  std::size_t regions = 0;
  std::size_t pool_os = 0;
  std::size_t pool_us = 0;
  double epsilon_effective = 0.0;
  std::size_t budget_allotted = 0;
  std::size_t queries_charged = 0;
  std::size_t derivable_skipped = 0;
  std::size_t annotator_skipped = 0;
  std::size_t new_must_links = 0;
  std::size_t new_cannot_links = 0;
  std::size_t total_must_links = 0;
  std::size_t total_cannot_links = 0;
  std::size_t clusters = 0;
  std::optional<double> ari_base;
  std::optional<double> ari_refined;
};

struct ALState
{
  int cycle = 0;
  EmbeddingSet embeddings;
  ConstraintStore store;
  Partition current_partition;
  std::size_t budget_allotted_pairs = 0;
  std::size_t budget_used_pairs = 0;
  std::vector<CycleRecord> history;
};

ALState initial_state(EmbeddingSet embeddings, std::optional<ConstraintStore> seed = std::nullopt);

/// Both clustering views, each refined against the store's constraints.
struct ClusterViews
{
  Partition raw_a;
  Partition raw_b;
  Partition a;
  Partition b;
};

ClusterViews build_views(const EmbeddingSet& set, const SimilarityMatrix& sim, const ConstraintStore& store,
                         const RunConfig& config);

/// Everything one sampling round produces before any query is asked.
struct SamplingPlan
{
  ClusterViews views;
  std::vector<UncertaintyRegion> regions;
  std::vector<CandidatePair> pool_os;
  std::vector<CandidatePair> pool_us;
  WeightedPairPool pool;
};

SamplingPlan plan_sampling(const EmbeddingSet& set, const ConstraintStore& store, const RunConfig& config);

struct PendingQuery
{
  std::uint64_t query_id = 0;
  PairKey pair;
  PoolOrigin origin = PoolOrigin::UnderSegmentation;
  double probability = 0.0;
};

/// Per-cycle seed derived from the run seed.
std::uint64_t cycle_seed(std::uint64_t run_seed, int cycle);

/// One annotation cycle in progress. Queries are drawn lazily; a drawn pair
/// whose relation is already derivable is dropped uncharged and replaced.
/// The budget bounds charged answers plus outstanding queries.
class CycleSession
{
public:
  CycleSession(ALState& state, const RunConfig& config);

  /// Next query, or nullopt when budget or pool is exhausted.
  std::optional<PendingQuery> draw();

  /// Records an answer. Throws ContradictionError (query stays outstanding)
  /// or ValidationError for an unknown query id. Outstanding queries made
  /// derivable by this answer are dropped.
  void answer(std::uint64_t query_id, Relation relation);

  /// Drops a query without charging it.
  void skip(std::uint64_t query_id);

  /// Refines the base view into state.current_partition and appends history.
  /// Throws ValidationError while queries are outstanding.
  const CycleRecord& finish();

  const std::vector<PendingQuery>& outstanding() const { return outstanding_; }
  const std::vector<PendingQuery>& charged() const { return charged_; }
  const SamplingPlan& plan() const { return plan_; }
  std::size_t allotted() const { return allotted_; }
  std::size_t used() const { return charged_.size(); }
  bool finished() const { return finished_; }
  int cycle() const { return cycle_; }

private:
  std::optional<PendingQuery> draw_ambiguity();
  std::optional<PendingQuery> draw_random();
  bool is_open(const PairKey& p) const;
  void prune_outstanding();

  ALState& state_;
  RunConfig config_;
  int cycle_;
  SamplingPlan plan_;
  SequentialDrawer drawer_;
  std::mt19937_64 random_rng_;
  std::size_t allotted_;
  std::uint64_t next_query_id_;
  std::vector<PendingQuery> outstanding_;
  std::vector<PendingQuery> charged_;
  std::vector<PairKey> issued_pairs_;
  std::size_t derivable_skipped_ = 0;
  std::size_t annotator_skipped_ = 0;
  std::size_t ml_before_;
  std::size_t cl_before_;
  bool finished_ = false;
};

/// Draw, ask, record until the batch is exhausted, then finish the cycle.
/// Throws CycleIncomplete when the oracle gives up; answers so far stay in
/// the store.
CycleRecord run_cycle(ALState& state, const RunConfig& config, Oracle& oracle);

enum class RefreshMode
{
  Static,
  External,
  Synthetic
};

struct RefreshOptions
{
  RefreshMode mode = RefreshMode::Static;
  std::filesystem::path export_dir;       // external: refined partition + constraints written here
  std::filesystem::path replacement_path; // external: embeddings file to wait for
  std::chrono::milliseconds timeout{std::chrono::minutes(60)};
  std::chrono::milliseconds poll_interval{200};
  double contraction = 0.1;
};

/// Embeddings for the next cycle according to the refresh mode.
EmbeddingSet refresh_embeddings(const ALState& state, const RefreshOptions& options);

/// Moves each sample `fraction` of the way to its cluster centroid.
RowMatrixF contract_to_centroids(const RowMatrixF& vectors, const Partition& part, double fraction);

struct LoopResult
{
  ALState state;
  Partition final_partition;
};

/// num_cycles cycles with a refresh between consecutive cycles. When
/// run_dir is given, the run directory is written as cycles complete.
LoopResult run_loop(EmbeddingSet embeddings,
                    const RunConfig& config,
                    Oracle& oracle,
                    const RefreshOptions& refresh,
                    const std::optional<std::filesystem::path>& run_dir = std::nullopt,
                    std::optional<ConstraintStore> seed = std::nullopt);

/// Run-directory writers shared by the loop driver and the service.
namespace rundir
{
void write_config(const std::filesystem::path& dir, const RunConfig& config);
void write_cycle(const std::filesystem::path& dir, const ALState& state, const CycleSession& session);
void write_state(const std::filesystem::path& dir, const ALState& state);
std::string history_json(const ALState& state);
std::string metrics_json(const ALState& state);
std::string queries_jsonl(const CycleSession& session, const EmbeddingSet& set);
std::string pool_jsonl(const WeightedPairPool& pool, const EmbeddingSet& set);
} // namespace rundir

} // namespace aas
