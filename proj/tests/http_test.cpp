/// @file http_test.cpp
/// @brief HTTP paths: remote generation backend and remote QA against local
///        stub servers, and the REST service end to end.

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "artqa/backends.h"
#include "artqa/cache.h"
#include "artqa/errors.h"
#include "artqa/qa.h"
#include "artqa/server.h"
#include "artqa/text.h"
#include "test_support.h"

namespace artqa {
namespace {

using json = nlohmann::json;

/// httplib server on an ephemeral loopback port, served from a thread.
class StubServer {
 public:
  StubServer() { port_ = server.bind_to_any_port("127.0.0.1"); }
  ~StubServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }
  void start() {
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server;

 private:
  int port_ = -1;
  std::thread thread_;
};

textgen::GenerationRequest request_for(const std::string& head) {
  textgen::GenerationRequest r;
  r.prompt_head = head;
  r.backend_id = "remote";
  return r;
}

textgen::RemoteBackendConfig remote_config(const StubServer& stub) {
  textgen::RemoteBackendConfig c;
  c.base_url = stub.base() + "/v1";
  c.api_key = "secret";
  c.timeout_s = 5;
  c.max_retries = 2;
  c.backoff_s = 0.01;
  return c;
}

// ---------------------------------------------------------------------------
// Remote generation backend
// ---------------------------------------------------------------------------

TEST(RemoteBackend, SendsWireFormatAndReadsUsage) {
  StubServer stub;
  json seen;
  std::string auth;
  stub.server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices": [{"text": " A portrait."}],
                        "usage": {"prompt_tokens": 9, "completion_tokens": 3}})",
                    "application/json");
  });
  stub.start();
  textgen::RemoteBackend backend(remote_config(stub));
  const auto result = textgen::generate(backend, request_for("Painting X Who?"));
  EXPECT_EQ(result.text, " A portrait.");
  EXPECT_EQ(result.prompt_tokens, 9);
  EXPECT_EQ(result.completion_tokens, 3);
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(seen["prompt"], "Painting X Who?");
  EXPECT_EQ(seen["max_tokens"], 256);
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["model"], "text-davinci-002");
}

TEST(RemoteBackend, EstimatesMissingUsage) {
  StubServer stub;
  stub.server.Post("/v1/completions", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": [{"text": "one two three."}]})", "application/json");
  });
  stub.start();
  textgen::RemoteBackend backend(remote_config(stub));
  const auto result = textgen::generate(backend, request_for("p"));
  EXPECT_EQ(result.completion_tokens, textgen::estimate_tokens("one two three."));
}

TEST(RemoteBackend, InvalidCredentialIsRefused) {
  StubServer stub;
  std::atomic<int> hits{0};
  stub.server.Post("/v1/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
    res.set_content(R"({"error": {"message": "invalid api key"}})", "application/json");
  });
  stub.start();
  textgen::RemoteBackend backend(remote_config(stub));
  try {
    textgen::generate(backend, request_for("p"));
    FAIL() << "expected BackendRefused";
  } catch (const BackendRefused& e) {
    EXPECT_EQ(e.http_status(), 401);
    EXPECT_NE(std::string(e.what()).find("invalid api key"), std::string::npos);
  }
  EXPECT_EQ(hits.load(), 1);
}

TEST(RemoteBackend, ServerErrorsRetriedThenUnavailable) {
  StubServer stub;
  std::atomic<int> hits{0};
  stub.server.Post("/v1/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
    res.set_header("Retry-After", "7");
    res.set_content("overloaded", "text/plain");
  });
  stub.start();
  textgen::RemoteBackend backend(remote_config(stub));
  try {
    textgen::generate(backend, request_for("p"));
    FAIL() << "expected BackendUnavailable";
  } catch (const BackendUnavailable& e) {
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_EQ(e.http_status(), 503);
    EXPECT_EQ(e.retry_after_s(), 7.0);
  }
  EXPECT_EQ(hits.load(), 3);
}

TEST(RemoteBackend, TransientFailureRecovers) {
  StubServer stub;
  std::atomic<int> hits{0};
  stub.server.Post("/v1/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 500;
      return;
    }
    res.set_content(R"({"choices": [{"text": "ok"}]})", "application/json");
  });
  stub.start();
  textgen::RemoteBackend backend(remote_config(stub));
  EXPECT_EQ(textgen::generate(backend, request_for("p")).text, "ok");
  EXPECT_EQ(hits.load(), 2);
}

TEST(RemoteBackend, UnreachableHost) {
  textgen::RemoteBackendConfig c;
  c.base_url = "http://127.0.0.1:1";
  c.max_retries = 0;
  c.timeout_s = 1;
  textgen::RemoteBackend backend(c);
  EXPECT_THROW(textgen::generate(backend, request_for("p")), BackendUnavailable);
}

// ---------------------------------------------------------------------------
// Remote QA
// ---------------------------------------------------------------------------

TEST(RemoteQa, ValidSpanIsContextSlice) {
  StubServer stub;
  stub.server.Post("/qa", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    EXPECT_EQ(body["question"], "Who?");
    res.set_content(R"({"text": "Sofía", "start": 11, "end": 16, "score": 0.8})",
                    "application/json");
  });
  stub.start();
  const std::string context = "Painted by Sofía in 1900.";
  const auto span = qa::answer(qa::QaBackendKind::kRemote, context, "Who?",
                               metrics::IdfTable{}, {stub.base(), 5});
  EXPECT_EQ(span.text, "Sofía");
  EXPECT_EQ(text::slice_codepoints(context, span.char_start, span.char_end), span.text);
  EXPECT_DOUBLE_EQ(span.score, 0.8);
}

TEST(RemoteQa, InvertedOffsetsRejected) {
  StubServer stub;
  stub.server.Post("/qa", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text": "x", "start": 3, "end": 1, "score": 0.5})", "application/json");
  });
  stub.start();
  EXPECT_THROW(qa::answer(qa::QaBackendKind::kRemote, "Some context.", "Who?",
                          metrics::IdfTable{}, {stub.base(), 5}),
               SpanOutOfBounds);
}

TEST(RemoteQa, ServiceErrorIsUnavailable) {
  StubServer stub;
  stub.server.Post("/qa", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
  });
  stub.start();
  EXPECT_THROW(qa::answer(qa::QaBackendKind::kRemote, "Some context.", "Who?",
                          metrics::IdfTable{}, {stub.base(), 5}),
               RemoteQaUnavailable);
}

// ---------------------------------------------------------------------------
// REST service
// ---------------------------------------------------------------------------

class ServerTest : public ::testing::Test {
 protected:
  ServerTest()
      : corpus_(std::make_shared<const Corpus>(load_corpus(test::fixture_path("corpus.json")))),
        backend_(textgen::FixtureBackend::load(test::fixture_path("generations.json"))),
        cache_(dir_.path()) {}

  void start(std::shared_ptr<const Corpus> corpus) {
    server::ServerConfig config;
    config.cors_origin = "http://localhost:5173";
    server_ = std::make_unique<server::Server>(std::move(corpus), backend_, cache_, config);
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void SetUp() override { start(corpus_); }

  void TearDown() override {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  test::TempDir dir_;
  std::shared_ptr<const Corpus> corpus_;
  textgen::FixtureBackend backend_;
  textgen::GenerationCache cache_;
  std::unique_ptr<server::Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ServerTest, HealthAndArtworks) {
  auto res = client_->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "ok");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");

  res = client_->Get("/artworks");
  ASSERT_TRUE(res);
  const auto list = json::parse(res->body);
  ASSERT_EQ(list.size(), 10u);
  EXPECT_EQ(list[0]["id"], "mona-lisa");
  EXPECT_EQ(list[0]["title"], "Mona Lisa");
  EXPECT_EQ(list[0]["question_count"], 2);
}

TEST_F(ServerTest, AskBothModesSatisfiesSpanInvariant) {
  for (const auto& record : corpus_->records()) {
    for (const auto& q : record.questions) {
      for (const char* mode : {"general", "question_based"}) {
        const auto res =
            post("/ask", {{"artwork_id", record.id}, {"question", q.question}, {"mode", mode}});
        ASSERT_TRUE(res);
        ASSERT_EQ(res->status, 200) << res->body;
        const auto body = json::parse(res->body);
        const std::string context = body["context"];
        EXPECT_EQ(text::slice_codepoints(context, body["span"]["char_start"],
                                         body["span"]["char_end"]),
                  body["answer"].get<std::string>());
        EXPECT_EQ(body["mode"], mode);
        EXPECT_TRUE(body["latency_ms"].is_number());
      }
    }
  }
}

TEST_F(ServerTest, AskGoldenAndCaching) {
  const json request = {{"artwork_id", "mona-lisa"},
                        {"question", "Who painted it?"},
                        {"mode", "question_based"}};
  auto first = json::parse(post("/ask", request)->body);
  EXPECT_EQ(first["answer"], "Leonardo da Vinci");
  EXPECT_FALSE(first["cached"].get<bool>());
  auto second = json::parse(post("/ask", request)->body);
  EXPECT_TRUE(second["cached"].get<bool>());
  first.erase("latency_ms");
  second.erase("latency_ms");
  first.erase("cached");
  second.erase("cached");
  EXPECT_EQ(first, second);
}

TEST_F(ServerTest, RestartWithWarmCacheGivesIdenticalResponses) {
  const json request = {{"artwork_id", "guernica"}, {"question", "When was it painted?"}};
  auto before = json::parse(post("/ask", request)->body);
  TearDown();
  backend_.reset_call_count();
  start(corpus_);
  auto after = json::parse(post("/ask", request)->body);
  EXPECT_EQ(backend_.call_count(), 0u);
  for (auto* body : {&before, &after}) {
    body->erase("latency_ms");
    body->erase("cached");
  }
  EXPECT_EQ(before, after);
}

TEST_F(ServerTest, Describe) {
  auto res = post("/describe", {{"artwork_id", "the-kiss"}});
  ASSERT_EQ(res->status, 200);
  EXPECT_NE(json::parse(res->body)["context"].get<std::string>().find("Klimt"),
            std::string::npos);
  res = post("/describe",
             {{"artwork_id", "the-kiss"}, {"mode", "question_based"}, {"question", "Who painted it?"}});
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["context"], "It was painted by Gustav Klimt in Vienna.");
  res = post("/describe", {{"artwork_id", "the-kiss"}, {"mode", "question_based"}});
  EXPECT_EQ(res->status, 422);
}

TEST_F(ServerTest, ErrorStatuses) {
  auto res = post("/ask", {{"artwork_id", "nope"}, {"question", "Who?"}});
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "UnknownArtwork");

  res = post("/ask", {{"artwork_id", "mona-lisa"}, {"question", ""}});
  EXPECT_EQ(res->status, 422);
  res = post("/ask", {{"artwork_id", "mona-lisa"}, {"question", "Who?"}, {"mode", "bogus"}});
  EXPECT_EQ(res->status, 422);
  res = post("/ask", {{"question", "Who?"}});
  EXPECT_EQ(res->status, 422);
  res = client_->Post("/ask", "{not json", "application/json");
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "ValidationError");

  // No fixture for this question: the generation backend fails.
  res = post("/ask", {{"artwork_id", "mona-lisa"},
                      {"question", "Is there a bridge?"},
                      {"mode", "question_based"}});
  EXPECT_EQ(res->status, 502);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "BackendUnavailable");

  res = client_->Get("/missing");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "NotFound");
}

TEST_F(ServerTest, CorsPreflight) {
  const auto res = client_->Options("/ask");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"),
            std::string::npos);
}

TEST_F(ServerTest, NoCorpusAnswers503) {
  TearDown();
  start(nullptr);
  const auto res = client_->Get("/artworks");
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "CorpusNotLoaded");
  EXPECT_EQ(client_->Get("/health")->status, 200);
}

TEST(ParseBind, Forms) {
  EXPECT_EQ(server::parse_bind("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_EQ(server::parse_bind(":9000").first, "0.0.0.0");
  EXPECT_THROW(server::parse_bind("localhost"), PreconditionError);
  EXPECT_THROW(server::parse_bind("h:99999"), PreconditionError);
  EXPECT_THROW(server::parse_bind("h:80x"), PreconditionError);
}

}  // namespace
}  // namespace artqa
