#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "simulmt/annotation.hpp"

namespace httplib {
class Server;
}

namespace simulmt {

/// Environment variable naming the journal directory for `serve`.
inline constexpr const char* kJournalDirEnv = "SIMULMT_JOURNAL_DIR";

struct ServerOptions {
  /// Directory of UI assets served at "/" when set.
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP/JSON front end of a SessionStore.
///
///   POST /sessions              {"source_tokens":[...], "item_id"?}
///   GET  /sessions              session ids and states, creation order
///   GET  /sessions/{id}         visible state
///   POST /sessions/{id}/read    {"expected_events"?}
///   POST /sessions/{id}/write   {"token", "expected_events"?}
///   POST /sessions/{id}/finish  {"expected_events"?} -> stream-log record
///   POST /ratings               {"item_id","rater_id","score"}
///   GET  /ratings/ap?threshold=3
///   GET  /export                {"files":{"references.txt","logs.jsonl"}}
///
/// Errors carry {"error": message} with 400 (bad request or protocol
/// violation), 404 (unknown session) or 409 (illegal state transition).
class AnnotationServer {
 public:
  AnnotationServer(SessionStore& store, ServerOptions options = {});
  ~AnnotationServer();

  /// Binds to an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Serves until stop(); call after a successful bind.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  SessionStore& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace simulmt
