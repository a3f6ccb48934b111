// aas: command-line front end for ambiguity-aware pair sampling and
// constrained pseudo-label refinement.

#include "aas/clustering.hpp"
#include "aas/errors.hpp"
#include "aas/evaluation.hpp"
#include "aas/io.hpp"
#include "aas/np3.hpp"
#include "aas/parallel.hpp"
#include "aas/pipeline.hpp"
#include "aas/service.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <random>

namespace fs = std::filesystem;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitContradiction = 2;

/// Flags that mirror RunConfig fields one-to-one.
struct ConfigFlags
{
  std::optional<std::string> config_file;
  std::optional<double> epsilon;
  std::optional<int> k_max;
  std::optional<double> s_min;
  std::optional<double> budget_fraction_per_cycle;
  std::optional<int> num_cycles;
  std::optional<double> dbscan_eps;
  std::optional<int> dbscan_min_samples;
  std::optional<int> knn_k;
  std::optional<int> finch_level;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> similarity_mode;
  std::optional<std::string> strategy;
  std::optional<std::string> base_view;

  void attach(CLI::App* app, bool sampling)
  {
    app->add_option("--config", config_file, "JSON config file (RunConfig keys); flags override it")
        ->check(CLI::ExistingFile);
    app->add_option("--dbscan_eps", dbscan_eps, "DBSCAN radius on Jaccard distance");
    app->add_option("--dbscan_min_samples", dbscan_min_samples, "DBSCAN core-point neighbourhood size");
    app->add_option("--knn_k", knn_k, "k for k-reciprocal similarity");
    app->add_option("--finch_level", finch_level, "FINCH partition level used as view B");
    if (!sampling) return;
    app->add_option("--epsilon", epsilon, "prior mass on the over-segmentation pool");
    app->add_option("--k_max", k_max, "medoid neighbours per region");
    app->add_option("--s_min", s_min, "minimum medoid-pair similarity");
    app->add_option("--budget_fraction_per_cycle", budget_fraction_per_cycle, "fraction of all pairs per cycle");
    app->add_option("--num_cycles", num_cycles, "active-learning cycles");
    app->add_option("--seed", seed, "random seed (drawn and printed when omitted)");
    app->add_option("--similarity_mode", similarity_mode, "k_reciprocal_jaccard | cosine");
    app->add_option("--strategy", strategy, "ambiguity | random");
    app->add_option("--base_view", base_view, "dbscan | finch");
  }

  aas::RunConfig resolve(bool needs_seed) const
  {
    aas::RunConfig cfg;
    bool seeded = seed.has_value();
    if (config_file)
    {
      const auto text = aas::io::read_text(*config_file);
      cfg = aas::io::decode_config(text);
      seeded = seeded || nlohmann::json::parse(text).contains("rng_seed");
    }
    nlohmann::json overrides = nlohmann::json::object();
    if (epsilon) overrides["epsilon"] = *epsilon;
    if (k_max) overrides["k_max"] = *k_max;
    if (s_min) overrides["s_min"] = *s_min;
    if (budget_fraction_per_cycle) overrides["budget_fraction_per_cycle"] = *budget_fraction_per_cycle;
    if (num_cycles) overrides["num_cycles"] = *num_cycles;
    if (dbscan_eps) overrides["dbscan_eps"] = *dbscan_eps;
    if (dbscan_min_samples) overrides["dbscan_min_samples"] = *dbscan_min_samples;
    if (knn_k) overrides["knn_k"] = *knn_k;
    if (finch_level) overrides["finch_level"] = *finch_level;
    if (seed) overrides["rng_seed"] = *seed;
    if (similarity_mode) overrides["similarity_mode"] = *similarity_mode;
    if (strategy) overrides["strategy"] = *strategy;
    if (base_view) overrides["base_view"] = *base_view;
    cfg = aas::io::decode_config(overrides.dump(), cfg);
    if (needs_seed && !seeded)
    {
      std::random_device rd;
      cfg.rng_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::cerr << "seed: " << cfg.rng_seed << "\n";
    }
    return cfg;
  }
};

struct RefreshFlags
{
  std::string mode = "static";
  std::string export_dir;
  std::string replacement;
  long timeout_ms = 3600000;
  double contraction = 0.1;

  void attach(CLI::App* app)
  {
    app->add_option("--refresh", mode, "static | synthetic | external")
        ->check(CLI::IsMember({"static", "synthetic", "external"}));
    app->add_option("--export-dir", export_dir, "external refresh: where partition + constraints are written");
    app->add_option("--replacement", replacement, "external refresh: embeddings file to wait for");
    app->add_option("--refresh-timeout-ms", timeout_ms, "external refresh wait limit");
    app->add_option("--contraction", contraction, "synthetic refresh: pull toward cluster centroid");
  }

  aas::RefreshOptions resolve(const fs::path& run_dir) const
  {
    aas::RefreshOptions r;
    r.mode = mode == "static" ? aas::RefreshMode::Static
             : mode == "synthetic" ? aas::RefreshMode::Synthetic
                                   : aas::RefreshMode::External;
    r.export_dir = export_dir.empty() ? run_dir / "export" : fs::path(export_dir);
    r.replacement_path = replacement.empty() ? r.export_dir / "embeddings.aase" : fs::path(replacement);
    r.timeout = std::chrono::milliseconds(timeout_ms);
    r.contraction = contraction;
    return r;
  }
};

aas::EmbeddingSet load_set(const std::string& path, const std::string& manifest)
{
  return manifest.empty() ? aas::io::load_embeddings(path) : aas::io::load_embeddings(path, manifest);
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Ambiguity-aware active learning and constrained clustering over embeddings"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "cap on worker threads (0 = all cores)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled embedding set");
  aas::SyntheticSpec spec;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--out", synth_out, "embeddings file (manifest written to <out>.json)")->required();
  synth->add_option("--identities", spec.num_identities, "number of identities");
  synth->add_option("--per-identity", spec.samples_per_identity, "samples per identity");
  synth->add_option("--dim", spec.dim, "feature dimension");
  synth->add_option("--within", spec.within_spread, "within-identity spread");
  synth->add_option("--between", spec.between_spread, "between-identity spread");
  synth->add_option("--seed", synth_seed, "random seed (drawn and printed when omitted)");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "cluster embeddings with DBSCAN or FINCH");
  std::string emb_path, manifest_path, out_path;
  std::string method = "dbscan";
  ConfigFlags cluster_flags;
  cluster->add_option("--embeddings", emb_path, "embeddings file")->required()->check(CLI::ExistingFile);
  cluster->add_option("--manifest", manifest_path, "manifest (default <embeddings>.json)");
  cluster->add_option("--method", method, "dbscan | finch")->check(CLI::IsMember({"dbscan", "finch"}));
  cluster->add_option("--out", out_path, "partition CSV")->required();
  cluster_flags.attach(cluster, false);

  // sample
  auto* sample = app.add_subcommand("sample", "draw an annotation batch from the disagreement pools");
  std::string constraints_path, pool_out;
  int cycle = 0;
  ConfigFlags sample_flags;
  sample->add_option("--embeddings", emb_path, "embeddings file")->required()->check(CLI::ExistingFile);
  sample->add_option("--manifest", manifest_path, "manifest (default <embeddings>.json)");
  sample->add_option("--constraints", constraints_path, "existing constraints (JSON Lines)")->check(CLI::ExistingFile);
  sample->add_option("--cycle", cycle, "cycle index stamped on queries");
  sample->add_option("--out", out_path, "query file (JSON Lines)")->required();
  sample->add_option("--pool-out", pool_out, "pool audit file (JSON Lines)");
  sample_flags.attach(sample, true);

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "refine any partition so it satisfies all constraints");
  std::string partition_path;
  refine_cmd->add_option("--embeddings", emb_path, "embeddings file")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--manifest", manifest_path, "manifest (default <embeddings>.json)");
  refine_cmd->add_option("--partition", partition_path, "input partition CSV")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--constraints", constraints_path, "constraints (JSON Lines)")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--out", out_path, "refined partition CSV")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "closed- and open-set retrieval metrics");
  std::string gallery_path, query_path;
  evaluate->add_option("--gallery", gallery_path, "gallery embeddings (manifest with identities)")
      ->required()->check(CLI::ExistingFile);
  evaluate->add_option("--query", query_path, "query embeddings (manifest with identities)")
      ->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out_path, "metrics JSON")->required();

  // loop
  auto* loop = app.add_subcommand("loop", "run the full active-learning loop with a simulated oracle");
  std::string run_dir;
  ConfigFlags loop_flags;
  RefreshFlags loop_refresh;
  loop->add_option("--embeddings", emb_path, "embeddings file (manifest needs identities)")
      ->required()->check(CLI::ExistingFile);
  loop->add_option("--manifest", manifest_path, "manifest (default <embeddings>.json)");
  loop->add_option("--constraints", constraints_path, "seed constraints (JSON Lines)")->check(CLI::ExistingFile);
  loop->add_option("--run-dir", run_dir, "output run directory")->required();
  loop_flags.attach(loop, true);
  loop_refresh.attach(loop);

  // serve
  auto* serve = app.add_subcommand("serve", "serve the annotation API for human answers");
  std::string host = "127.0.0.1", ui_dir;
  int port = 8080;
  ConfigFlags serve_flags;
  RefreshFlags serve_refresh;
  serve->add_option("--embeddings", emb_path, "embeddings file")->required()->check(CLI::ExistingFile);
  serve->add_option("--manifest", manifest_path, "manifest (default <embeddings>.json)");
  serve->add_option("--constraints", constraints_path, "seed constraints (JSON Lines)")->check(CLI::ExistingFile);
  serve->add_option("--run-dir", run_dir, "run directory")->required();
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port");
  serve->add_option("--ui-dir", ui_dir, "static UI bundle directory");
  serve_flags.attach(serve, true);
  serve_refresh.attach(serve);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try
  {
    aas::set_num_threads(threads);

    if (*synth)
    {
      if (!synth_seed)
      {
        std::random_device rd;
        synth_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "seed: " << *synth_seed << "\n";
      }
      spec.rng_seed = *synth_seed;
      aas::io::save_embeddings(synth_out, aas::generate_synthetic(spec));
    }
    else if (*cluster)
    {
      const auto cfg = cluster_flags.resolve(false);
      const auto set = load_set(emb_path, manifest_path);
      aas::Partition part;
      if (method == "dbscan")
      {
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.knn_k), set.size() - 1);
        const auto sim = aas::k_reciprocal_similarity(set, k, cfg.dense_threshold);
        part = aas::dbscan(aas::SimilarityDistance(sim), {cfg.dbscan_eps, cfg.dbscan_min_samples});
      }
      else
      {
        part = aas::select_view(aas::finch(set), static_cast<std::size_t>(cfg.finch_level));
      }
      aas::io::write_atomic(out_path, aas::io::encode_partition(part, set));
    }
    else if (*sample)
    {
      const auto cfg = sample_flags.resolve(true);
      const auto set = load_set(emb_path, manifest_path);
      const auto store = constraints_path.empty() ? aas::ConstraintStore(set.size())
                                                  : aas::io::load_constraint_store(constraints_path, set);
      aas::ALState state = aas::initial_state(set, store);
      state.cycle = cycle;
      aas::CycleSession session(state, cfg);
      std::string out;
      while (auto q = session.draw())
      {
        nlohmann::ordered_json j;
        j["a"] = set.ids()[q->pair.a()];
        j["b"] = set.ids()[q->pair.b()];
        j["origin"] = aas::to_string(q->origin);
        j["probability"] = q->probability;
        j["cycle"] = cycle;
        out += j.dump() + "\n";
      }
      aas::io::write_atomic(out_path, out);
      if (!pool_out.empty())
      {
        aas::io::write_atomic(pool_out, aas::rundir::pool_jsonl(session.plan().pool, set));
      }
    }
    else if (*refine_cmd)
    {
      const auto set = load_set(emb_path, manifest_path);
      const auto part = aas::io::decode_partition(aas::io::read_text(partition_path), set);
      const auto store = aas::io::load_constraint_store(constraints_path, set);
      const auto refined = aas::refine(part, store, aas::MetricDistance(set, aas::Metric::Cosine));
      aas::io::write_atomic(out_path, aas::io::encode_partition(refined, set));
    }
    else if (*evaluate)
    {
      aas::RetrievalProblem problem(aas::io::load_embeddings(gallery_path), aas::io::load_embeddings(query_path));
      aas::io::write_atomic(out_path, aas::to_json(aas::evaluate(problem)));
    }
    else if (*loop)
    {
      const auto cfg = loop_flags.resolve(true);
      auto set = load_set(emb_path, manifest_path);
      std::optional<aas::ConstraintStore> seed;
      if (!constraints_path.empty()) seed = aas::io::load_constraint_store(constraints_path, set);
      const aas::EmbeddingSet truth = set;
      aas::SimulatedOracle oracle(truth);
      auto result = aas::run_loop(std::move(set), cfg, oracle, loop_refresh.resolve(run_dir), fs::path(run_dir),
                                  std::move(seed));
      std::cout << aas::rundir::metrics_json(result.state);
    }
    else if (*serve)
    {
      const auto cfg = serve_flags.resolve(true);
      auto set = load_set(emb_path, manifest_path);
      std::optional<aas::ConstraintStore> seed;
      if (!constraints_path.empty()) seed = aas::io::load_constraint_store(constraints_path, set);
      aas::AnnotationService service(std::move(set), cfg, serve_refresh.resolve(run_dir), run_dir, std::move(seed));
      if (!ui_dir.empty()) service.set_ui_dir(ui_dir);
      std::cerr << "serving session " << service.session_id() << " on http://" << host << ":" << port << "\n";
      if (!service.listen(host, port))
      {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitInvalid;
      }
    }
  }
  catch (const aas::ContradictionError& e)
  {
    std::cerr << "contradiction: " << e.what() << "\n";
    return kExitContradiction;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
