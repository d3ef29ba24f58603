#include "artqa/textgen.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "artqa/digest.h"
#include "artqa/errors.h"
#include "artqa/text.h"

namespace artqa::textgen {

using json = nlohmann::json;

std::string_view to_string(PromptTemplateKind kind) {
  return kind == PromptTemplateKind::kGeneral ? "general" : "question_based";
}

std::optional<PromptTemplateKind> parse_template_kind(std::string_view text) {
  if (text == "general") return PromptTemplateKind::kGeneral;
  if (text == "question_based") return PromptTemplateKind::kQuestionBased;
  return std::nullopt;
}

std::string render_prompt(PromptTemplateKind kind, std::string_view painting_title,
                          const std::optional<std::string>& question) {
  if (painting_title.empty()) {
    throw PreconditionError("painting title must be nonempty");
  }
  if (kind == PromptTemplateKind::kGeneral) {
    if (question) {
      throw UnexpectedQuestion("the general prompt does not take a question");
    }
    std::string prompt = "Describe and Contextualize the painting ";
    prompt += painting_title;
    return prompt;
  }
  if (!question) {
    throw MissingQuestion("the question-based prompt requires a question");
  }
  std::string prompt = "Painting ";
  prompt += painting_title;
  prompt += ' ';
  prompt += *question;
  return prompt;
}

void DecodingParams::validate() const {
  if (max_tokens < 1) {
    throw PreconditionError("max_tokens must be >= 1, got " + std::to_string(max_tokens));
  }
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    throw PreconditionError("temperature must be a finite value in [0, 2]");
  }
}

DecodingParams DecodingParams::defaults_for(PromptTemplateKind kind) {
  DecodingParams params;
  params.max_tokens = kind == PromptTemplateKind::kGeneral ? 256 : 64;
  return params;
}

void GenerationRequest::validate() const {
  if (prompt_head.empty()) throw PreconditionError("prompt_head must be nonempty");
  decoding.validate();
}

std::string assemble_prompt(const GenerationRequest& request) {
  std::string prompt;
  for (const auto& [input, output] : request.context_examples) {
    prompt += input;
    prompt += '\n';
    prompt += output;
    prompt += "\n\n";
  }
  prompt += request.prompt_head;
  return prompt;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

GenerationResult generate(GenerationBackend& backend, const GenerationRequest& request) {
  request.validate();
  BackendReply reply = backend.call(request);
  if (reply.text.empty()) {
    throw EmptyGeneration("backend " + backend.id() + " returned empty text");
  }
  GenerationResult result;
  result.prompt_tokens =
      reply.prompt_tokens.value_or(estimate_tokens(assemble_prompt(request)));
  result.completion_tokens =
      reply.completion_tokens.value_or(estimate_tokens(reply.text));
  result.text = std::move(reply.text);
  result.backend_id = backend.id();
  result.cached = false;
  result.timestamp = utc_timestamp();
  return result;
}

std::string canonical_request_json(const GenerationRequest& request) {
  json examples = json::array();
  for (const auto& [input, output] : request.context_examples) {
    examples.push_back(json::array({input, output}));
  }
  // nlohmann::json objects are std::map backed, so keys serialize sorted.
  const json canonical = {
      {"backend_id", request.backend_id},
      {"context_examples", std::move(examples)},
      {"decoding",
       {{"max_tokens", request.decoding.max_tokens},
        {"model_name", request.decoding.model_name},
        {"temperature", request.decoding.temperature}}},
      {"prompt_head", request.prompt_head},
  };
  return canonical.dump();
}

std::string cache_key(const GenerationRequest& request) {
  return sha256_hex(canonical_request_json(request));
}

std::int64_t estimate_tokens(std::string_view text_in) {
  std::int64_t count = 0;
  bool in_word = false;
  std::size_t pos = 0;
  while (pos < text_in.size()) {
    const char32_t cp = text::next_codepoint(text_in, pos);
    if (text::is_whitespace(cp)) {
      in_word = false;
    } else if (text::is_punctuation(cp)) {
      ++count;
      in_word = false;
    } else if (!in_word) {
      ++count;
      in_word = true;
    }
  }
  return (count * 13 + 9) / 10;
}

PricingTable parse_pricing(std::string_view json_text) {
  PricingTable table;
  try {
    const json root = json::parse(json_text);
    for (const auto& [name, entry] : root.at("models").items()) {
      table[name] = ModelPrice{entry.at("prompt_per_1k").get<double>(),
                               entry.at("completion_per_1k").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), "pricing");
  }
  return table;
}

PricingTable load_pricing(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("no such pricing file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pricing(buffer.str());
}

double upper_bound_cost(std::int64_t prompt_tokens, std::int64_t max_tokens,
                        const ModelPrice& price) {
  return static_cast<double>(prompt_tokens) / 1000.0 * price.prompt_per_1k +
         static_cast<double>(max_tokens) / 1000.0 * price.completion_per_1k;
}

double estimate_cost(const GenerationRequest& request, const PricingTable& pricing) {
  request.validate();
  const auto it = pricing.find(request.decoding.model_name);
  if (it == pricing.end()) {
    throw UnknownModel("no pricing for model \"" + request.decoding.model_name + "\"");
  }
  return upper_bound_cost(estimate_tokens(assemble_prompt(request)),
                          request.decoding.max_tokens, it->second);
}

}  // namespace artqa::textgen
