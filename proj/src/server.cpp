#include "artqa/server.h"

#include <chrono>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "artqa/errors.h"
#include "artqa/experiment.h"
#include "artqa/text.h"

namespace artqa::server {

using json = nlohmann::json;

std::pair<std::string, int> parse_bind(std::string_view bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos) {
    throw PreconditionError("bind address must be host:port, got \"" + std::string(bind) + "\"");
  }
  std::string host(bind.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(std::string(bind.substr(colon + 1)), &used);
    if (used != bind.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw PreconditionError("invalid port in bind address \"" + std::string(bind) + "\"");
  }
  if (port < 0 || port > 65535) throw PreconditionError("port out of range");
  return {host, port};
}

namespace {

// Client-side request problems.
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(),
                  "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw HttpError{422, "ValidationError", "body must be a JSON object"};
    return body;
  } catch (const json::parse_error& e) {
    throw HttpError{422, "ValidationError", std::string("malformed JSON: ") + e.what()};
  }
}

std::string required_string(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_string()) {
    throw HttpError{422, "ValidationError",
                    std::string("field \"") + field + "\" must be a string"};
  }
  return body[field].get<std::string>();
}

textgen::PromptTemplateKind mode_of(const json& body) {
  if (!body.contains("mode") || body["mode"].is_null()) {
    return textgen::PromptTemplateKind::kGeneral;
  }
  if (!body["mode"].is_string()) {
    throw HttpError{422, "ValidationError", "field \"mode\" must be a string"};
  }
  const auto mode = textgen::parse_template_kind(body["mode"].get<std::string>());
  if (!mode) {
    throw HttpError{422, "ValidationError", "mode must be \"general\" or \"question_based\""};
  }
  return *mode;
}

bool is_backend_error(const std::string& code) {
  return code == "BackendUnavailable" || code == "BackendRefused" ||
         code == "EmptyGeneration" || code == "RemoteQaUnavailable" ||
         code == "SpanOutOfBounds";
}

}  // namespace

class Server::Impl {
 public:
  Impl(std::shared_ptr<const Corpus> corpus, textgen::GenerationBackend& backend,
       const textgen::GenerationCache& cache, ServerConfig config)
      : corpus_(std::move(corpus)), backend_(backend), cache_(cache), config_(std::move(config)) {
    if (corpus_) idf_ = experiment::qa_idf(*corpus_);
    routes();
  }

  httplib::Server http;

 private:
  void routes() {
    const auto seconds = static_cast<time_t>(config_.request_timeout_s);
    http.set_read_timeout(seconds, 0);
    http.set_write_timeout(seconds, 0);

    http.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", config_.cors_origin);
    });
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError",
                   "no route for " + req.method + " " + req.path);
      }
    });

    http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"status", "ok"}}.dump(), "application/json");
    });
    http.Get("/artworks", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { list_artworks(res); });
    });
    http.Post("/ask", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { ask(req, res); });
    });
    http.Post("/describe", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { describe(req, res); });
    });
  }

  template <typename Fn>
  void guarded(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const HttpError& e) {
      send_error(res, e.status, e.code, e.message);
    } catch (const UnknownArtwork& e) {
      send_error(res, 404, e.code(), e.what());
    } catch (const Error& e) {
      const bool upstream = is_backend_error(e.code());
      if (!upstream) spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
      send_error(res, upstream ? 502 : 500, e.code(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
      send_error(res, 500, "InternalError", e.what());
    }
  }

  const Corpus& corpus() const {
    if (!corpus_) throw HttpError{503, "CorpusNotLoaded", "no corpus loaded"};
    return *corpus_;
  }

  void list_artworks(httplib::Response& res) const {
    json out = json::array();
    for (const auto& record : corpus().records()) {
      out.push_back({{"id", record.id},
                     {"title", record.title},
                     {"question_count", record.questions.size()}});
    }
    res.set_content(out.dump(), "application/json");
  }

  textgen::GenerationResult describe_artwork(const ArtworkRecord& record,
                                             textgen::PromptTemplateKind mode,
                                             const std::optional<std::string>& question) {
    textgen::GenerationRequest request;
    request.prompt_head = textgen::render_prompt(mode, record.title, question);
    const auto& override_params = mode == textgen::PromptTemplateKind::kGeneral
                                      ? config_.general_decoding
                                      : config_.question_decoding;
    request.decoding = override_params.value_or(textgen::DecodingParams::defaults_for(mode));
    request.backend_id = backend_.id();
    return textgen::cached_generate(cache_, backend_, request);
  }

  void ask(const httplib::Request& req, httplib::Response& res) {
    const auto started = std::chrono::steady_clock::now();
    const json body = parse_body(req);
    const std::string artwork_id = required_string(body, "artwork_id");
    const std::string question = required_string(body, "question");
    if (text::trim(question).empty()) {
      throw HttpError{422, "ValidationError", "question must be nonempty"};
    }
    const auto mode = mode_of(body);
    auto qa_kind = qa::QaBackendKind::kLexical;
    if (body.contains("qa_backend") && !body["qa_backend"].is_null()) {
      const auto parsed = body["qa_backend"].is_string()
                              ? qa::parse_qa_backend(body["qa_backend"].get<std::string>())
                              : std::nullopt;
      if (!parsed) {
        throw HttpError{422, "ValidationError", "qa_backend must be \"lexical\" or \"remote\""};
      }
      qa_kind = *parsed;
    }
    const ArtworkRecord& record = corpus().find(artwork_id);
    const auto generation = describe_artwork(
        record, mode,
        mode == textgen::PromptTemplateKind::kQuestionBased ? std::optional(question)
                                                            : std::nullopt);
    const qa::AnswerSpan span =
        qa::answer(qa_kind, generation.text, question, idf_, config_.remote_qa);
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    const json out = {{"answer", span.text},
                      {"span", {{"char_start", span.char_start}, {"char_end", span.char_end}}},
                      {"context", generation.text},
                      {"mode", std::string(textgen::to_string(mode))},
                      {"cached", generation.cached},
                      {"latency_ms", latency.count()}};
    res.set_content(out.dump(), "application/json");
  }

  void describe(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string artwork_id = required_string(body, "artwork_id");
    const auto mode = mode_of(body);
    std::optional<std::string> question;
    if (body.contains("question") && !body["question"].is_null()) {
      question = required_string(body, "question");
    }
    if (mode == textgen::PromptTemplateKind::kQuestionBased &&
        (!question || text::trim(*question).empty())) {
      throw HttpError{422, "ValidationError", "question_based mode requires a question"};
    }
    if (mode == textgen::PromptTemplateKind::kGeneral && question) {
      throw HttpError{422, "ValidationError", "general mode does not take a question"};
    }
    const ArtworkRecord& record = corpus().find(artwork_id);
    const auto generation = describe_artwork(record, mode, question);
    res.set_content(json{{"context", generation.text}, {"cached", generation.cached}}.dump(),
                    "application/json");
  }

  std::shared_ptr<const Corpus> corpus_;
  textgen::GenerationBackend& backend_;
  const textgen::GenerationCache& cache_;
  ServerConfig config_;
  metrics::IdfTable idf_;
};

Server::Server(std::shared_ptr<const Corpus> corpus, textgen::GenerationBackend& backend,
               const textgen::GenerationCache& cache, ServerConfig config)
    : impl_(std::make_unique<Impl>(std::move(corpus), backend, cache, std::move(config))) {}

Server::~Server() { stop(); }

int Server::bind_to_any_port(const std::string& host) {
  return impl_->http.bind_to_any_port(host);
}

bool Server::bind(const std::string& host, int port) {
  return impl_->http.bind_to_port(host, port);
}

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

bool Server::listen(const std::string& host, int port) {
  return impl_->http.listen(host, port);
}

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

bool Server::is_running() const { return impl_->http.is_running(); }

}  // namespace artqa::server
