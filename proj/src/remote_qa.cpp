#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "artqa/errors.h"
#include "artqa/qa.h"
#include "http_util.h"

namespace artqa::qa {

RemoteQaConfig RemoteQaConfig::from_env() {
  RemoteQaConfig config;
  if (const char* base = std::getenv("ARTQA_QA_BASE")) config.base_url = base;
  return config;
}

RemoteQaReply call_remote_qa(const RemoteQaConfig& config, std::string_view context,
                             std::string_view question) {
  if (config.base_url.empty()) {
    throw RemoteQaUnavailable("remote QA base URL not configured (ARTQA_QA_BASE)");
  }
  http::Endpoint endpoint;
  try {
    endpoint = http::parse_url(config.base_url);
  } catch (const std::invalid_argument& e) {
    throw RemoteQaUnavailable(e.what());
  }
  auto client = http::make_client(endpoint, config.timeout_s);
  const nlohmann::json body = {{"context", std::string(context)},
                               {"question", std::string(question)}};
  const auto response =
      client->Post(endpoint.path + "/qa", body.dump(), "application/json");
  if (!response) {
    throw RemoteQaUnavailable("QA service unreachable: " +
                              httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw RemoteQaUnavailable("QA service returned HTTP " +
                              std::to_string(response->status));
  }
  try {
    const auto reply_json = nlohmann::json::parse(response->body);
    RemoteQaReply reply;
    reply.text = reply_json.value("text", "");
    reply.start = reply_json.at("start").get<long long>();
    reply.end = reply_json.at("end").get<long long>();
    reply.score = reply_json.value("score", 0.0);
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw RemoteQaUnavailable(std::string("malformed QA response: ") + e.what());
  }
}

}  // namespace artqa::qa
