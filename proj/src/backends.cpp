#include "artqa/backends.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "artqa/digest.h"
#include "artqa/errors.h"
#include "http_util.h"

namespace artqa::textgen {

using json = nlohmann::json;

BackendReply EchoBackend::do_generate(const GenerationRequest& request) {
  return BackendReply{assemble_prompt(request), std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// Fixture
// ---------------------------------------------------------------------------

std::string FixtureBackend::prompt_key(std::string_view prompt) {
  return sha256_hex(prompt);
}

void FixtureBackend::add(std::string_view prompt, std::string text) {
  by_key_[prompt_key(prompt)] = std::move(text);
}

FixtureBackend FixtureBackend::from_prompts(
    const std::map<std::string, std::string>& entries) {
  FixtureBackend backend;
  for (const auto& [prompt, text] : entries) backend.add(prompt, text);
  return backend;
}

FixtureBackend FixtureBackend::parse(std::string_view json_text) {
  FixtureBackend backend;
  try {
    const json root = json::parse(json_text);
    const json& entries = root.at("entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const json& entry = entries[i];
      std::string text = entry.at("text").get<std::string>();
      if (entry.contains("prompt")) {
        backend.add(entry["prompt"].get<std::string>(), std::move(text));
      } else {
        backend.by_key_[entry.at("key").get<std::string>()] = std::move(text);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), "fixture file");
  }
  return backend;
}

FixtureBackend FixtureBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("no such fixture file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

BackendReply FixtureBackend::do_generate(const GenerationRequest& request) {
  const std::string key = prompt_key(assemble_prompt(request));
  const auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    throw BackendUnavailable("no fixture for key " + key);
  }
  return BackendReply{it->second, std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// Remote
// ---------------------------------------------------------------------------

RemoteBackendConfig RemoteBackendConfig::from_env() {
  RemoteBackendConfig config;
  if (const char* base = std::getenv("ARTQA_API_BASE"); base && *base) {
    config.base_url = base;
  }
  if (const char* key = std::getenv("ARTQA_API_KEY")) config.api_key = key;
  return config;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {}

namespace {

std::string error_message(const std::string& body) {
  try {
    const json parsed = json::parse(body);
    if (parsed.contains("error")) {
      const json& error = parsed["error"];
      if (error.is_object() && error.contains("message")) {
        return error["message"].get<std::string>();
      }
      if (error.is_string()) return error.get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return body.substr(0, 200);
}

}  // namespace

BackendReply RemoteBackend::do_generate(const GenerationRequest& request) {
  http::Endpoint endpoint;
  try {
    endpoint = http::parse_url(config_.base_url);
  } catch (const std::invalid_argument& e) {
    throw BackendUnavailable(e.what());
  }
  const json body = {{"model", request.decoding.model_name},
                     {"prompt", assemble_prompt(request)},
                     {"max_tokens", request.decoding.max_tokens},
                     {"temperature", request.decoding.temperature}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const int max_attempts = std::max(1, config_.max_retries + 1);
  double backoff = config_.backoff_s;
  std::string last_error;
  std::optional<int> last_status;
  std::optional<double> retry_after;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto client = http::make_client(endpoint, config_.timeout_s);
    const auto response = client->Post(endpoint.path + "/completions", headers,
                                       body.dump(), "application/json");
    if (!response) {
      last_error = "transport error: " + httplib::to_string(response.error());
      last_status.reset();
    } else if (response->status == 200) {
      try {
        const json reply_json = json::parse(response->body);
        BackendReply reply;
        reply.text = reply_json.at("choices").at(0).at("text").get<std::string>();
        if (reply_json.contains("usage")) {
          const json& usage = reply_json["usage"];
          if (usage.contains("prompt_tokens")) {
            reply.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
          }
          if (usage.contains("completion_tokens")) {
            reply.completion_tokens = usage["completion_tokens"].get<std::int64_t>();
          }
        }
        return reply;
      } catch (const json::exception& e) {
        throw BackendUnavailable(std::string("malformed completion response: ") + e.what(),
                                 attempt, 200);
      }
    } else if (response->status >= 400 && response->status < 500) {
      throw BackendRefused("HTTP " + std::to_string(response->status) + ": " +
                               error_message(response->body),
                           response->status);
    } else {
      last_error = "HTTP " + std::to_string(response->status) + ": " +
                   error_message(response->body);
      last_status = response->status;
      if (response->has_header("Retry-After")) {
        try {
          retry_after = std::stod(response->get_header_value("Retry-After"));
        } catch (const std::exception&) {
        }
      }
    }
    if (attempt < max_attempts) {
      spdlog::warn("remote generation attempt {}/{} failed: {}", attempt, max_attempts,
                   last_error);
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
  }
  throw BackendUnavailable(last_error, max_attempts, last_status, retry_after);
}

}  // namespace artqa::textgen
