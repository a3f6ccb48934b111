#include "aas/pipeline.hpp"

#include "aas/errors.hpp"
#include "aas/evaluation.hpp"
#include "aas/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <thread>

namespace aas
{

namespace fs = std::filesystem;

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t clamp_k(int k, std::size_t n)
{
  return std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), n - 1);
}

} // namespace

EmbeddingSet generate_synthetic(const SyntheticSpec& spec)
{
  if (spec.num_identities == 0 || spec.samples_per_identity == 0 || spec.dim == 0)
  {
    throw ValidationError("synthetic spec needs positive counts and dimension");
  }
  if (!(spec.within_spread >= 0.0) || !(spec.between_spread > 0.0))
  {
    throw ValidationError("synthetic spreads must be non-negative (within) and positive (between)");
  }
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = spec.num_identities * spec.samples_per_identity;
  RowMatrixF vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
  std::vector<std::string> ids, identities;
  ids.reserve(n);
  identities.reserve(n);
  std::vector<double> centre(spec.dim);
  std::size_t row = 0;
  for (std::size_t k = 0; k < spec.num_identities; ++k)
  {
    for (auto& c : centre) c = spec.between_spread * gauss(rng);
    for (std::size_t s = 0; s < spec.samples_per_identity; ++s, ++row)
    {
      for (std::size_t d = 0; d < spec.dim; ++d)
      {
        vectors(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d)) =
            static_cast<float>(centre[d] + spec.within_spread * gauss(rng));
      }
      ids.push_back("s" + std::to_string(row));
      identities.push_back("id" + std::to_string(k));
    }
  }
  return EmbeddingSet(std::move(ids), std::move(vectors), std::nullopt, std::move(identities));
}

Constraint simulated_oracle(const EmbeddingSet& set, const PairKey& pair, int cycle)
{
  if (!set.has_identities())
  {
    throw MissingIdentities("simulated oracle needs ground-truth identities");
  }
  const auto& ids = *set.identities();
  Constraint c;
  c.pair = pair;
  c.relation = ids.at(pair.a()) == ids.at(pair.b()) ? Relation::MustLink : Relation::CannotLink;
  c.source = ConstraintSource::Oracle;
  c.cycle = cycle;
  return c;
}

SimulatedOracle::SimulatedOracle(const EmbeddingSet& set) : set_(&set)
{
  if (!set.has_identities())
  {
    throw MissingIdentities("simulated oracle needs ground-truth identities");
  }
}

std::optional<Relation> SimulatedOracle::answer(const PairKey& pair)
{
  ++calls_;
  return simulated_oracle(*set_, pair, 0).relation;
}

ALState initial_state(EmbeddingSet embeddings, std::optional<ConstraintStore> seed)
{
  ALState s;
  const auto n = embeddings.size();
  if (seed && seed->num_samples() != n)
  {
    throw ValidationError("seed constraint store covers a different sample count");
  }
  s.store = seed ? std::move(*seed) : ConstraintStore(n);
  s.embeddings = std::move(embeddings);
  std::vector<int> singleton(n);
  for (std::size_t i = 0; i < n; ++i) singleton[i] = static_cast<int>(i);
  s.current_partition = Partition(std::move(singleton), MethodTag::Refined);
  return s;
}

ClusterViews build_views(const EmbeddingSet& set, const SimilarityMatrix& jaccard, const ConstraintStore& store,
                         const RunConfig& config)
{
  const MetricDistance cosine(set, Metric::Cosine);
  ClusterViews v;
  v.raw_a = dbscan(SimilarityDistance(jaccard), DbscanParams{config.dbscan_eps, config.dbscan_min_samples});
  v.raw_a.method = MethodTag::A;
  v.raw_b = select_view(finch(set, Metric::Cosine), static_cast<std::size_t>(config.finch_level));
  v.a = refine(v.raw_a, store, cosine);
  v.a.method = MethodTag::A;
  v.b = refine(v.raw_b, store, cosine);
  v.b.method = MethodTag::B;
  return v;
}

SamplingPlan plan_sampling(const EmbeddingSet& set, const ConstraintStore& store, const RunConfig& config)
{
  config.validate();
  if (set.size() < 2)
  {
    throw ValidationError("need at least two samples");
  }
  const auto k = clamp_k(config.knn_k, set.size());
  const auto jaccard = k_reciprocal_similarity(set, k, config.dense_threshold);
  SamplingPlan plan;
  plan.views = build_views(set, jaccard, store, config);
  if (config.strategy != SamplingStrategy::Ambiguity)
  {
    return plan;
  }
  const MetricDistance cosine(set, Metric::Cosine);
  const SimilarityMatrix pool_sim = config.similarity_mode == SimilarityMode::KReciprocalJaccard
                                        ? jaccard
                                        : cosine_similarity(set, config.dense_threshold);
  plan.regions = find_uncertainty_regions(plan.views.a, plan.views.b, cosine);
  plan.pool_os = build_os_pool(plan.regions, pool_sim, static_cast<std::size_t>(config.k_max), config.s_min, &store);
  plan.pool_us = build_us_pool(plan.regions, plan.views.a, plan.views.b, cosine, pool_sim, plan.views.a.outliers, &store);
  UsWeighting weighting;
  std::copy(config.beta.begin(), config.beta.end(), weighting.beta.begin());
  plan.pool = marginal(plan.pool_os, plan.pool_us, config.epsilon, weighting);
  return plan;
}

std::uint64_t cycle_seed(std::uint64_t run_seed, int cycle)
{
  return splitmix64(run_seed ^ splitmix64(static_cast<std::uint64_t>(cycle) + 1));
}

CycleSession::CycleSession(ALState& state, const RunConfig& config)
    : state_(state),
      config_(config),
      cycle_(state.cycle),
      plan_(plan_sampling(state.embeddings, state.store, config)),
      drawer_(plan_.pool, cycle_seed(config.rng_seed, state.cycle)),
      random_rng_(cycle_seed(config.rng_seed, state.cycle) ^ 0x5bd1e995ULL),
      allotted_(pair_budget(state.embeddings.size(), config.budget_fraction_per_cycle)),
      next_query_id_((static_cast<std::uint64_t>(state.cycle) + 1) << 32),
      ml_before_(state.store.count(Relation::MustLink)),
      cl_before_(state.store.count(Relation::CannotLink))
{
  state_.budget_allotted_pairs += allotted_;
}

bool CycleSession::is_open(const PairKey& p) const
{
  return state_.store.relation_of(p) == Relation::Unknown;
}

std::optional<PendingQuery> CycleSession::draw_ambiguity()
{
  auto idx = drawer_.next();
  if (!idx) return std::nullopt;
  const auto& c = plan_.pool.pairs[*idx];
  PendingQuery q;
  q.pair = c.pair;
  q.origin = c.origin;
  q.probability = plan_.pool.probabilities[*idx];
  return q;
}

std::optional<PendingQuery> CycleSession::draw_random()
{
  const auto n = state_.embeddings.size();
  const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::set<PairKey> issued(issued_pairs_.begin(), issued_pairs_.end());
  auto fresh = [&](const PairKey& p) { return issued.count(p) == 0 && is_open(p); };
  for (int attempt = 0; attempt < 1000; ++attempt)
  {
    const auto u = pick(random_rng_);
    const auto v = pick(random_rng_);
    if (u == v) continue;
    PairKey p(u, v);
    if (!fresh(p)) continue;
    return PendingQuery{0, p, PoolOrigin::UnderSegmentation, 1.0 / total};
  }
  std::vector<PairKey> open;
  for (std::size_t u = 0; u < n; ++u)
  {
    for (std::size_t v = u + 1; v < n; ++v)
    {
      if (fresh(PairKey(u, v))) open.emplace_back(u, v);
    }
  }
  if (open.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> which(0, open.size() - 1);
  return PendingQuery{0, open[which(random_rng_)], PoolOrigin::UnderSegmentation, 1.0 / total};
}

std::optional<PendingQuery> CycleSession::draw()
{
  while (!finished_ && charged_.size() + outstanding_.size() < allotted_)
  {
    auto q = config_.strategy == SamplingStrategy::Ambiguity ? draw_ambiguity() : draw_random();
    if (!q) return std::nullopt;
    issued_pairs_.push_back(q->pair);
    if (!is_open(q->pair))
    {
      ++derivable_skipped_;
      continue;
    }
    q->query_id = next_query_id_++;
    outstanding_.push_back(*q);
    return q;
  }
  return std::nullopt;
}

void CycleSession::answer(std::uint64_t query_id, Relation relation)
{
  auto it = std::find_if(outstanding_.begin(), outstanding_.end(),
                         [&](const PendingQuery& q) { return q.query_id == query_id; });
  if (it == outstanding_.end())
  {
    throw ValidationError("unknown or already resolved query id " + std::to_string(query_id));
  }
  state_.store.add(Constraint{it->pair, relation, ConstraintSource::Oracle, cycle_});
  charged_.push_back(*it);
  outstanding_.erase(it);
  prune_outstanding();
}

void CycleSession::skip(std::uint64_t query_id)
{
  auto it = std::find_if(outstanding_.begin(), outstanding_.end(),
                         [&](const PendingQuery& q) { return q.query_id == query_id; });
  if (it == outstanding_.end())
  {
    throw ValidationError("unknown or already resolved query id " + std::to_string(query_id));
  }
  outstanding_.erase(it);
  ++annotator_skipped_;
}

void CycleSession::prune_outstanding()
{
  const auto before = outstanding_.size();
  std::erase_if(outstanding_, [&](const PendingQuery& q) { return !is_open(q.pair); });
  derivable_skipped_ += before - outstanding_.size();
}

const CycleRecord& CycleSession::finish()
{
  if (finished_)
  {
    return state_.history.back();
  }
  if (!outstanding_.empty())
  {
    throw ValidationError(std::to_string(outstanding_.size()) + " queries are still outstanding");
  }
  const MetricDistance cosine(state_.embeddings, Metric::Cosine);
  const Partition& base = config_.base_view == BaseView::Dbscan ? plan_.views.raw_a : plan_.views.raw_b;
  state_.current_partition = refine(base, state_.store, cosine);

  CycleRecord r;
  r.cycle = cycle_;
  r.regions = plan_.regions.size();
  r.pool_os = plan_.pool_os.size();
  r.pool_us = plan_.pool_us.size();
  r.epsilon_effective = plan_.pool.epsilon_effective;
  r.budget_allotted = allotted_;
  r.queries_charged = charged_.size();
  r.derivable_skipped = derivable_skipped_;
  r.annotator_skipped = annotator_skipped_;
  r.total_must_links = state_.store.count(Relation::MustLink);
  r.total_cannot_links = state_.store.count(Relation::CannotLink);
  r.new_must_links = r.total_must_links - ml_before_;
  r.new_cannot_links = r.total_cannot_links - cl_before_;
  r.clusters = state_.current_partition.num_clusters();
  if (state_.embeddings.has_identities())
  {
    r.ari_base = adjusted_rand_index(base, *state_.embeddings.identities());
    r.ari_refined = adjusted_rand_index(state_.current_partition, *state_.embeddings.identities());
  }
  state_.budget_used_pairs += charged_.size();
  state_.history.push_back(r);
  ++state_.cycle;
  finished_ = true;
  return state_.history.back();
}

CycleRecord run_cycle(ALState& state, const RunConfig& config, Oracle& oracle)
{
  CycleSession session(state, config);
  while (auto q = session.draw())
  {
    auto rel = oracle.answer(q->pair);
    if (!rel)
    {
      throw CycleIncomplete("oracle stopped answering after " + std::to_string(session.used()) +
                            " charged queries in cycle " + std::to_string(session.cycle()));
    }
    session.answer(q->query_id, *rel);
  }
  return session.finish();
}

RowMatrixF contract_to_centroids(const RowMatrixF& vectors, const Partition& part, double fraction)
{
  const auto clusters = part.renumbered().clusters();
  const auto labels = part.renumbered().labels;
  RowMatrixD centroids = RowMatrixD::Zero(static_cast<Eigen::Index>(clusters.size()), vectors.cols());
  for (std::size_t c = 0; c < clusters.size(); ++c)
  {
    for (auto i : clusters[c]) centroids.row(static_cast<Eigen::Index>(c)) += vectors.row(static_cast<Eigen::Index>(i)).cast<double>();
    centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(clusters[c].size());
  }
  RowMatrixF out(vectors.rows(), vectors.cols());
  for (Eigen::Index i = 0; i < vectors.rows(); ++i)
  {
    const auto c = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    const Eigen::RowVectorXd x = vectors.row(i).cast<double>();
    out.row(i) = (x + fraction * (centroids.row(c) - x)).cast<float>();
  }
  return out;
}

EmbeddingSet refresh_embeddings(const ALState& state, const RefreshOptions& options)
{
  switch (options.mode)
  {
    case RefreshMode::Static: return state.embeddings;
    case RefreshMode::Synthetic:
      return state.embeddings.with_vectors(
          contract_to_centroids(state.embeddings.vectors(), state.current_partition, options.contraction));
    case RefreshMode::External: break;
  }

  const auto tag = "cycle" + std::to_string(state.cycle);
  io::write_atomic(options.export_dir / "partition.csv", io::encode_partition(state.current_partition, state.embeddings));
  io::write_atomic(options.export_dir / "constraints.jsonl", io::encode_store(state.store, state.embeddings, true));
  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  while (!fs::exists(options.replacement_path))
  {
    if (std::chrono::steady_clock::now() >= deadline)
    {
      throw RefreshTimeout("no replacement embeddings at '" + options.replacement_path.string() + "' after " +
                           std::to_string(options.timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(options.poll_interval);
  }
  auto vectors = io::decode_embeddings(io::read_text(options.replacement_path));
  auto consumed = options.replacement_path;
  consumed += "." + tag + ".consumed";
  fs::rename(options.replacement_path, consumed);
  return state.embeddings.with_vectors(std::move(vectors));
}

LoopResult run_loop(EmbeddingSet embeddings,
                    const RunConfig& config,
                    Oracle& oracle,
                    const RefreshOptions& refresh,
                    const std::optional<fs::path>& run_dir,
                    std::optional<ConstraintStore> seed)
{
  config.validate();
  LoopResult result{initial_state(std::move(embeddings), std::move(seed)), {}};
  auto& state = result.state;
  if (run_dir)
  {
    rundir::write_config(*run_dir, config);
  }
  for (int c = 0; c < config.num_cycles; ++c)
  {
    if (c > 0)
    {
      state.embeddings = refresh_embeddings(state, refresh);
    }
    CycleSession session(state, config);
    while (auto q = session.draw())
    {
      auto rel = oracle.answer(q->pair);
      if (!rel)
      {
        if (run_dir) rundir::write_state(*run_dir, state);
        throw CycleIncomplete("oracle stopped answering in cycle " + std::to_string(session.cycle()));
      }
      session.answer(q->query_id, *rel);
    }
    session.finish();
    if (run_dir)
    {
      rundir::write_cycle(*run_dir, state, session);
      rundir::write_state(*run_dir, state);
    }
  }
  result.final_partition = state.current_partition;
  return result;
}

namespace rundir
{

using ojson = nlohmann::ordered_json;

namespace
{
fs::path cycle_dir(const fs::path& dir, int cycle)
{
  return dir / ("cycle_" + std::to_string(cycle));
}
} // namespace

void write_config(const fs::path& dir, const RunConfig& config)
{
  io::write_atomic(dir / "config.json", io::encode_config(config));
}

std::string queries_jsonl(const CycleSession& session, const EmbeddingSet& set)
{
  std::string out;
  for (const auto& q : session.charged())
  {
    ojson j;
    j["a"] = set.ids()[q.pair.a()];
    j["b"] = set.ids()[q.pair.b()];
    j["origin"] = to_string(q.origin);
    j["probability"] = q.probability;
    j["cycle"] = session.cycle();
    out += j.dump() + "\n";
  }
  return out;
}

std::string pool_jsonl(const WeightedPairPool& pool, const EmbeddingSet& set)
{
  std::string out;
  for (std::size_t i = 0; i < pool.pairs.size(); ++i)
  {
    const auto& c = pool.pairs[i];
    ojson j;
    j["a"] = set.ids()[c.pair.a()];
    j["b"] = set.ids()[c.pair.b()];
    j["origin"] = to_string(c.origin);
    j["pair_type"] = to_string(c.pair_type);
    if (c.origin == PoolOrigin::OverSegmentation) j["region"] = {c.region, c.other_region};
    else j["region"] = c.region;
    j["similarity"] = c.similarity;
    j["probability"] = pool.probabilities[i];
    out += j.dump() + "\n";
  }
  return out;
}

void write_cycle(const fs::path& dir, const ALState& state, const CycleSession& session)
{
  const auto cdir = cycle_dir(dir, session.cycle());
  io::write_atomic(cdir / "queries.jsonl", queries_jsonl(session, state.embeddings));
  io::write_atomic(cdir / "pool.jsonl", pool_jsonl(session.plan().pool, state.embeddings));
  io::write_atomic(cdir / "partition.csv", io::encode_partition(state.current_partition, state.embeddings));
}

std::string history_json(const ALState& state)
{
  ojson arr = ojson::array();
  for (const auto& r : state.history)
  {
    ojson j;
    j["cycle"] = r.cycle;
    j["regions"] = r.regions;
    j["pool_os"] = r.pool_os;
    j["pool_us"] = r.pool_us;
    j["epsilon_effective"] = r.epsilon_effective;
    j["budget_allotted"] = r.budget_allotted;
    j["queries_charged"] = r.queries_charged;
    j["derivable_skipped"] = r.derivable_skipped;
    j["annotator_skipped"] = r.annotator_skipped;
    j["new_must_links"] = r.new_must_links;
    j["new_cannot_links"] = r.new_cannot_links;
    j["total_must_links"] = r.total_must_links;
    j["total_cannot_links"] = r.total_cannot_links;
    j["clusters"] = r.clusters;
    j["ari_base"] = r.ari_base ? ojson(*r.ari_base) : ojson(nullptr);
    j["ari_refined"] = r.ari_refined ? ojson(*r.ari_refined) : ojson(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string metrics_json(const ALState& state)
{
  const auto n = static_cast<double>(state.embeddings.size());
  ojson j;
  j["cycles_completed"] = state.history.size();
  j["budget_allotted_pairs"] = state.budget_allotted_pairs;
  j["budget_used_pairs"] = state.budget_used_pairs;
  j["used_fraction_of_all_pairs"] = static_cast<double>(state.budget_used_pairs) / (n * (n - 1.0) / 2.0);
  j["must_links"] = state.store.count(Relation::MustLink);
  j["cannot_links"] = state.store.count(Relation::CannotLink);
  j["clusters"] = state.current_partition.num_clusters();
  if (state.embeddings.has_identities())
  {
    j["final_ari"] = adjusted_rand_index(state.current_partition, *state.embeddings.identities());
  }
  return j.dump(2) + "\n";
}

void write_state(const fs::path& dir, const ALState& state)
{
  io::write_atomic(dir / "constraints.jsonl", io::encode_store(state.store, state.embeddings, false));
  io::write_atomic(dir / "history.json", history_json(state));
  io::write_atomic(dir / "metrics.json", metrics_json(state));
}

} // namespace rundir

} // namespace aas
