#include "aas/service.hpp"

#include "aas/errors.hpp"
#include "aas/io.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>

namespace aas
{

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace
{

std::string error_body(const std::string& message)
{
  ojson j;
  j["error"] = message;
  return j.dump();
}

ojson sample_json(const EmbeddingSet& set, std::size_t i)
{
  ojson j;
  j["id"] = set.ids()[i];
  j["image_uri"] = set.image_uris() ? ojson((*set.image_uris())[i]) : ojson(nullptr);
  return j;
}

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Pair annotation</title></head>
<body>
<p>The annotation UI bundle is not installed. The JSON API is live:</p>
<ul>
<li>GET /api/session</li><li>GET /api/next-pair</li><li>POST /api/answer</li>
<li>POST /api/advance</li><li>GET /api/progress</li>
</ul>
</body></html>
)";

} // namespace

AnnotationService::AnnotationService(EmbeddingSet embeddings,
                                     RunConfig config,
                                     RefreshOptions refresh,
                                     fs::path run_dir,
                                     std::optional<ConstraintStore> seed)
    : config_(std::move(config)), refresh_(std::move(refresh)), run_dir_(std::move(run_dir))
{
  config_.validate();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(cycle_seed(config_.rng_seed, -1)));
  session_id_ = buf;
  state_ = initial_state(std::move(embeddings), std::move(seed));
  rundir::write_config(run_dir_, config_);
  std::lock_guard lock(mutex_);
  start_cycle();
  publish();
}

AnnotationService::~AnnotationService()
{
  stop();
}

void AnnotationService::start_cycle()
{
  session_ = std::make_unique<CycleSession>(state_, config_);
  fill_queue();
}

void AnnotationService::fill_queue()
{
  while (auto q = session_->draw())
  {
    issued_.emplace(q->query_id, q->pair);
  }
}

void AnnotationService::publish()
{
  ojson s;
  s["session_id"] = session_id_;
  s["cycle"] = state_.cycle;
  s["num_cycles"] = config_.num_cycles;
  s["done"] = done_;
  s["budget_allotted"] = state_.budget_allotted_pairs;
  s["budget_used"] = state_.budget_used_pairs + (session_ && !session_->finished() ? session_->used() : 0);
  s["cycle_budget_allotted"] = session_ ? session_->allotted() : 0;
  s["cycle_budget_used"] = session_ ? session_->used() : 0;
  s["regions"] = session_ ? session_->plan().regions.size() : 0;
  s["pool_os"] = session_ ? session_->plan().pool_os.size() : 0;
  s["pool_us"] = session_ ? session_->plan().pool_us.size() : 0;

  ojson p = s;
  p["answered"] = answered_;
  p["skipped"] = skipped_;
  ojson pending = ojson::array();
  if (session_)
  {
    for (const auto& q : session_->outstanding()) pending.push_back(q.query_id);
  }
  p["outstanding"] = pending.size();
  p["pending_query_ids"] = pending;
  p["history"] = ojson::parse(rundir::history_json(state_));

  std::atomic_store(&session_snapshot_, std::make_shared<const std::string>(s.dump()));
  std::atomic_store(&progress_snapshot_, std::make_shared<const std::string>(p.dump()));
}

void AnnotationService::persist_constraints()
{
  io::write_atomic(run_dir_ / "constraints.jsonl", io::encode_store(state_.store, state_.embeddings, false));
}

void AnnotationService::audit(const std::string& line)
{
  std::ofstream out(run_dir_ / "audit.jsonl", std::ios::app);
  out << line << '\n';
}

AnnotationService::Response AnnotationService::get_session() const
{
  return {200, *std::atomic_load(&session_snapshot_)};
}

AnnotationService::Response AnnotationService::get_progress() const
{
  return {200, *std::atomic_load(&progress_snapshot_)};
}

AnnotationService::Response AnnotationService::get_next_pair()
{
  std::lock_guard lock(mutex_);
  if (done_ || !session_ || session_->outstanding().empty())
  {
    return {204, ""};
  }
  const auto& q = session_->outstanding().front();
  ojson j;
  j["query_id"] = q.query_id;
  j["a"] = sample_json(state_.embeddings, q.pair.a());
  j["b"] = sample_json(state_.embeddings, q.pair.b());
  j["probability"] = q.probability;
  j["origin"] = to_string(q.origin);
  j["cycle"] = session_->cycle();
  return {200, j.dump()};
}

AnnotationService::Response AnnotationService::post_answer(const std::string& body)
{
  std::uint64_t query_id = 0;
  std::string label;
  try
  {
    const auto j = nlohmann::json::parse(body);
    query_id = j.at("query_id").get<std::uint64_t>();
    label = j.at("label").get<std::string>();
  }
  catch (const nlohmann::json::exception& e)
  {
    return {400, error_body(std::string("malformed answer: ") + e.what())};
  }
  if (label != "ml" && label != "cl" && label != "skip")
  {
    return {400, error_body("label must be ml, cl or skip")};
  }

  std::lock_guard lock(mutex_);
  audit(body);
  if (done_ || !session_)
  {
    return {409, error_body("run is complete")};
  }
  const auto issued = issued_.find(query_id);
  if (issued == issued_.end())
  {
    return {404, error_body("unknown query_id " + std::to_string(query_id))};
  }
  const auto& outstanding = session_->outstanding();
  const bool pending = std::any_of(outstanding.begin(), outstanding.end(),
                                   [&](const PendingQuery& q) { return q.query_id == query_id; });
  const Relation rel = label == "ml" ? Relation::MustLink : Relation::CannotLink;
  if (!pending)
  {
    if (label != "skip" && state_.store.would_contradict(issued->second, rel))
    {
      return {409, error_body("answer contradicts existing constraints")};
    }
    return {409, error_body("query already resolved")};
  }
  try
  {
    if (label == "skip")
    {
      session_->skip(query_id);
      ++skipped_;
    }
    else
    {
      session_->answer(query_id, rel);
      ++answered_;
      persist_constraints();
    }
  }
  catch (const ContradictionError& e)
  {
    return {409, error_body(e.what())};
  }
  fill_queue();
  publish();
  return {200, *progress_snapshot_};
}

AnnotationService::Response AnnotationService::post_advance()
{
  std::lock_guard lock(mutex_);
  if (done_)
  {
    return {409, error_body("run is complete")};
  }
  if (!session_->outstanding().empty())
  {
    return {423, error_body(std::to_string(session_->outstanding().size()) + " queries are still unanswered")};
  }
  session_->finish();
  rundir::write_cycle(run_dir_, state_, *session_);
  rundir::write_state(run_dir_, state_);
  if (state_.cycle >= config_.num_cycles)
  {
    done_ = true;
  }
  else
  {
    try
    {
      state_.embeddings = refresh_embeddings(state_, refresh_);
    }
    catch (const RefreshTimeout& e)
    {
      publish();
      return {504, error_body(e.what())};
    }
    start_cycle();
  }
  publish();
  return {200, *session_snapshot_};
}

ALState AnnotationService::state_copy() const
{
  std::lock_guard lock(mutex_);
  return state_;
}

bool AnnotationService::done() const
{
  std::lock_guard lock(mutex_);
  return done_;
}

void AnnotationService::install_routes()
{
  server_ = std::make_unique<httplib::Server>();
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, "application/json; charset=utf-8");
  };
  server_->Get("/api/session", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, get_session()); });
  server_->Get("/api/progress", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, get_progress()); });
  server_->Get("/api/next-pair", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, get_next_pair()); });
  server_->Post("/api/answer", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_answer(req.body));
  });
  server_->Post("/api/advance", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, post_advance()); });
  if (ui_dir_ && fs::is_directory(*ui_dir_))
  {
    server_->set_mount_point("/", ui_dir_->string());
  }
  else
  {
    server_->Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

bool AnnotationService::listen(const std::string& host, int port)
{
  install_routes();
  return server_->listen(host, port);
}

int AnnotationService::bind_any_port(const std::string& host)
{
  install_routes();
  return server_->bind_to_any_port(host);
}

bool AnnotationService::listen_after_bind()
{
  return server_->listen_after_bind();
}

void AnnotationService::stop()
{
  if (server_) server_->stop();
}

} // namespace aas
