/// @file backends.h
/// @brief Generation backends: OpenAI-compatible remote endpoint, canned
/// fixtures, and echo.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "artqa/textgen.h"

namespace artqa::textgen {

/// Returns the assembled prompt unchanged.
class EchoBackend final : public GenerationBackend {
 public:
  std::string id() const override { return "echo"; }

 protected:
  BackendReply do_generate(const GenerationRequest& request) override;
};

/// Canned text keyed by the SHA-256 of the assembled prompt. Read-only after
/// construction.
class FixtureBackend final : public GenerationBackend {
 public:
  FixtureBackend() = default;

  /// `prompt -> text`.
  static FixtureBackend from_prompts(const std::map<std::string, std::string>& entries);

  /// `{"entries": [{"prompt": ..., "text": ...} | {"key": ..., "text": ...}]}`.
  static FixtureBackend load(const std::filesystem::path& path);
  static FixtureBackend parse(std::string_view json_text);

  static std::string prompt_key(std::string_view prompt);

  void add(std::string_view prompt, std::string text);
  std::size_t size() const noexcept { return by_key_.size(); }

  std::string id() const override { return "fixture"; }

 protected:
  BackendReply do_generate(const GenerationRequest& request) override;

 private:
  std::map<std::string, std::string> by_key_;
};

struct RemoteBackendConfig {
  std::string base_url = "https://api.openai.com/v1";  // POST <base>/completions
  std::string api_key;
  double timeout_s = 30.0;
  int max_retries = 2;
  double backoff_s = 0.5;  // doubled after every retry

  /// ARTQA_API_BASE and ARTQA_API_KEY.
  static RemoteBackendConfig from_env();
};

/// OpenAI-compatible completions client. Sends
/// `{"model", "prompt", "max_tokens", "temperature"}` and reads
/// `choices[0].text` plus `usage.{prompt_tokens, completion_tokens}`.
///
/// 401/403/429 and other 4xx map to BackendRefused; transport errors and
/// 5xx are retried and then raise BackendUnavailable.
class RemoteBackend final : public GenerationBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);

  std::string id() const override { return "remote"; }

 protected:
  BackendReply do_generate(const GenerationRequest& request) override;

 private:
  RemoteBackendConfig config_;
};

}  // namespace artqa::textgen
