/// @file server.h
/// @brief REST service for interactive clients.
///
/// Endpoints (JSON bodies only):
///   GET  /health    -> {"status": "ok"}
///   GET  /artworks  -> [{"id", "title", "question_count"}]
///   POST /ask       {"artwork_id", "question", "mode"?, "qa_backend"?}
///                   -> {"answer", "span": {"char_start", "char_end"}, "context",
///                       "mode", "cached", "latency_ms"}
///   POST /describe  {"artwork_id", "mode"?, "question"?} -> {"context", "cached"}
/// Errors: {"error": {"code", "message"}} with 404 (unknown artwork or
/// route), 422 (invalid body), 502 (generation or QA backend failure; code is
/// the backend error class), 503 (no corpus loaded), 500 otherwise.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "artqa/cache.h"
#include "artqa/corpus.h"
#include "artqa/qa.h"
#include "artqa/textgen.h"

namespace artqa::server {

struct ServerConfig {
  std::string cors_origin = "*";
  double request_timeout_s = 30.0;
  qa::RemoteQaConfig remote_qa;
  std::optional<textgen::DecodingParams> general_decoding;
  std::optional<textgen::DecodingParams> question_decoding;
};

/// "host:port" or ":port". Throws PreconditionError.
std::pair<std::string, int> parse_bind(std::string_view bind);

class Server {
 public:
  /// `corpus` may be null; corpus-dependent endpoints then answer 503.
  Server(std::shared_ptr<const Corpus> corpus, textgen::GenerationBackend& backend,
         const textgen::GenerationCache& cache, ServerConfig config = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to an ephemeral port and returns it (-1 on failure).
  int bind_to_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);

  /// Serves until stop(); blocks.
  bool listen_after_bind();
  bool listen(const std::string& host, int port);

  void stop();
  void wait_until_ready() const;
  bool is_running() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace artqa::server
