/// @file textgen.h
/// @brief Prompt rendering, generation requests/results, the backend
/// contract, request digests and token cost accounting.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artqa::textgen {

enum class PromptTemplateKind { kGeneral, kQuestionBased };

std::string_view to_string(PromptTemplateKind kind);
std::optional<PromptTemplateKind> parse_template_kind(std::string_view text);

/// general:        "Describe and Contextualize the painting <title>"
/// question_based: "Painting <title> <question>"
/// Throws MissingQuestion / UnexpectedQuestion, PreconditionError for an
/// empty title.
std::string render_prompt(PromptTemplateKind kind, std::string_view painting_title,
                          const std::optional<std::string>& question = std::nullopt);

struct DecodingParams {
  int max_tokens = 256;
  double temperature = 0.0;
  std::string model_name = "text-davinci-002";

  /// Throws PreconditionError when max_tokens < 1 or temperature is not a
  /// finite value in [0, 2].
  void validate() const;

  /// 256 tokens for general descriptions, 64 for question-based snippets.
  static DecodingParams defaults_for(PromptTemplateKind kind);

  bool operator==(const DecodingParams&) const = default;
};

struct GenerationRequest {
  std::string prompt_head;
  std::vector<std::pair<std::string, std::string>> context_examples;
  DecodingParams decoding;
  std::string backend_id;

  /// Throws PreconditionError.
  void validate() const;
};

/// In-context examples followed by the prompt head, as sent to a backend.
std::string assemble_prompt(const GenerationRequest& request);

struct GenerationResult {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string backend_id;
  bool cached = false;
  std::string timestamp;  // UTC, ISO 8601
};

/// What a backend hands back; token counts are optional.
struct BackendReply {
  std::string text;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
};

/// Text generation backend. Implementations must be callable concurrently.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  virtual std::string id() const = 0;

  /// Counts the call and delegates to `do_generate`.
  BackendReply call(const GenerationRequest& request) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_generate(request);
  }

  std::uint64_t call_count() const noexcept {
    return calls_.load(std::memory_order_relaxed);
  }
  void reset_call_count() noexcept { calls_.store(0, std::memory_order_relaxed); }

 protected:
  GenerationBackend() = default;
  // Copies start with a fresh call counter.
  GenerationBackend(const GenerationBackend&) {}
  GenerationBackend& operator=(const GenerationBackend&) { return *this; }

  virtual BackendReply do_generate(const GenerationRequest& request) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

/// Calls the backend and fills token counts the backend omitted with local
/// estimates. Throws BackendUnavailable, BackendRefused, EmptyGeneration.
GenerationResult generate(GenerationBackend& backend, const GenerationRequest& request);

/// SHA-256 (hex) of the canonical request serialization: sorted keys,
/// prompt bytes untouched.
std::string cache_key(const GenerationRequest& request);

std::string canonical_request_json(const GenerationRequest& request);

/// Approximate token count: words plus punctuation marks, times 1.3,
/// rounded up. Used only for cost estimates.
std::int64_t estimate_tokens(std::string_view text);

struct ModelPrice {
  double prompt_per_1k = 0.0;
  double completion_per_1k = 0.0;
};

using PricingTable = std::map<std::string, ModelPrice>;

/// `{"models": {"<name>": {"prompt_per_1k": x, "completion_per_1k": y}}}`.
PricingTable load_pricing(const std::filesystem::path& path);
PricingTable parse_pricing(std::string_view json_text);

/// prompt_tokens / 1000 * p_in + max_tokens / 1000 * p_out.
double upper_bound_cost(std::int64_t prompt_tokens, std::int64_t max_tokens,
                        const ModelPrice& price);

/// Upper bound in the pricing table's currency. Throws UnknownModel.
double estimate_cost(const GenerationRequest& request, const PricingTable& pricing);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace artqa::textgen
