#pragma once

#include "aas/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib
{
class Server;
}

namespace aas
{

/// Live annotation loop behind a JSON API. One session per run directory.
///
/// Mutating requests are serialised through one mutex; /api/session and
/// /api/progress read an immutable snapshot swapped in after every change.
class AnnotationService
{
public:
  struct Response
  {
    int status = 200;
    std::string body;
  };

  AnnotationService(EmbeddingSet embeddings,
                    RunConfig config,
                    RefreshOptions refresh,
                    std::filesystem::path run_dir,
                    std::optional<ConstraintStore> seed = std::nullopt);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  Response get_session() const;
  Response get_next_pair();
  Response post_answer(const std::string& body);
  Response post_advance();
  Response get_progress() const;

  /// Serves the static UI bundle from this directory at "/".
  void set_ui_dir(std::filesystem::path dir) { ui_dir_ = std::move(dir); }

  /// Blocking listen; returns false if the socket cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it (serve with listen_after_bind()).
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

  const std::string& session_id() const { return session_id_; }

  /// Copy of the driver state (takes the lock).
  ALState state_copy() const;
  bool done() const;

private:
  void start_cycle();
  void fill_queue();
  void publish();
  void persist_constraints();
  void audit(const std::string& line);
  void install_routes();

  RunConfig config_;
  RefreshOptions refresh_;
  std::filesystem::path run_dir_;
  std::optional<std::filesystem::path> ui_dir_;
  std::string session_id_;

  mutable std::mutex mutex_;
  ALState state_;
  std::unique_ptr<CycleSession> session_;
  std::map<std::uint64_t, PairKey> issued_;
  std::size_t answered_ = 0;
  std::size_t skipped_ = 0;
  bool done_ = false;

  std::shared_ptr<const std::string> session_snapshot_;
  std::shared_ptr<const std::string> progress_snapshot_;

  std::unique_ptr<httplib::Server> server_;
};

} // namespace aas
