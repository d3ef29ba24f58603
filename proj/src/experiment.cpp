#include "artqa/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "artqa/digest.h"
#include "artqa/errors.h"

namespace artqa::experiment {

using json = nlohmann::json;
using textgen::GenerationRequest;
using textgen::GenerationResult;

std::string system_label(PipelineMode mode) {
  return mode == PipelineMode::kGeneral ? "Ours - General" : "Ours - Question-based";
}

std::string_view to_string(CaptionMetric metric) {
  switch (metric) {
    case CaptionMetric::kBleu1:
      return "bleu1";
    case CaptionMetric::kRouge:
      return "rouge";
    case CaptionMetric::kCider:
      return "cider";
    case CaptionMetric::kCosine:
      return "cosine";
  }
  return "bleu1";
}

std::string_view metric_label(CaptionMetric metric) {
  switch (metric) {
    case CaptionMetric::kBleu1:
      return "BLEU1";
    case CaptionMetric::kRouge:
      return "ROUGE";
    case CaptionMetric::kCider:
      return "CIDEr";
    case CaptionMetric::kCosine:
      return "COSINE";
  }
  return "BLEU1";
}

std::optional<CaptionMetric> parse_caption_metric(std::string_view text) {
  for (CaptionMetric metric : kCaptionMetrics) {
    if (text == to_string(metric)) return metric;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

json decoding_json(const textgen::DecodingParams& decoding) {
  return {{"max_tokens", decoding.max_tokens},
          {"temperature", decoding.temperature},
          {"model_name", decoding.model_name}};
}

json manifest_body(const RunManifest& m) {
  return {{"report_kind", m.report_kind},
          {"corpus_digest", m.corpus_digest},
          {"mode", std::string(textgen::to_string(m.mode))},
          {"generation_backend", m.generation_backend},
          {"qa_backend", m.qa_backend},
          {"decoding", decoding_json(m.decoding)},
          {"code_version", m.code_version},
          {"settings", m.settings},
          {"records", m.records}};
}

}  // namespace

json RunManifest::to_json() const {
  json out = manifest_body(*this);
  out["timestamp"] = timestamp;
  out["run_id"] = run_id;
  out["stats"] = stats;
  out["digest"] = digest();
  return out;
}

std::string RunManifest::digest() const { return sha256_hex(manifest_body(*this).dump()); }

// ---------------------------------------------------------------------------
// Requests and IDF
// ---------------------------------------------------------------------------

std::vector<GenerationRequest> pipeline_requests(
    const Corpus& corpus, PipelineMode mode, const std::string& backend_id,
    const textgen::DecodingParams& decoding,
    const std::optional<std::set<QaKind>>& kinds) {
  std::vector<GenerationRequest> out;
  const auto make = [&](std::string prompt) {
    GenerationRequest request;
    request.prompt_head = std::move(prompt);
    request.decoding = decoding;
    request.backend_id = backend_id;
    return request;
  };
  for (const ArtworkRecord* record : corpus.test_records()) {
    std::vector<const QaPair*> selected;
    for (const QaPair& pair : record->questions) {
      if (!kinds || kinds->contains(pair.kind)) selected.push_back(&pair);
    }
    if (mode == PipelineMode::kGeneral) {
      if (kinds && selected.empty()) continue;
      out.push_back(make(textgen::render_prompt(mode, record->title)));
    } else {
      for (const QaPair* pair : selected) {
        out.push_back(make(textgen::render_prompt(mode, record->title, pair->question)));
      }
    }
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

}  // namespace

std::optional<metrics::IdfTable> reference_idf(const Corpus& corpus, DescriptionKind kind,
                                               int n_max) {
  std::vector<std::string> documents;
  for (const ArtworkRecord* record : corpus.test_records()) {
    const auto refs = reference_set(corpus, record->id, kind);
    if (!refs.empty()) documents.push_back(join(refs));
  }
  if (documents.empty()) return std::nullopt;
  return metrics::compute_idf_from_text(documents, n_max);
}

metrics::IdfTable qa_idf(const Corpus& corpus) {
  if (auto table = reference_idf(corpus, DescriptionKind::kAll, 1)) return *table;
  return metrics::IdfTable(1, 1, {});
}

// ---------------------------------------------------------------------------
// Generation fan-out
// ---------------------------------------------------------------------------

namespace {

struct Outcome {
  std::optional<GenerationResult> result;
  std::string error_code;
  std::string error_message;
};

std::vector<Outcome> generate_all(const std::vector<GenerationRequest>& requests,
                                  textgen::GenerationBackend& backend,
                                  const RunOptions& options) {
  std::vector<Outcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        outcomes[i].result =
            options.cache ? textgen::cached_generate(*options.cache, backend, requests[i])
                          : textgen::generate(backend, requests[i]);
      } catch (const Error& e) {
        outcomes[i].error_code = e.code();
        outcomes[i].error_message = e.what();
        spdlog::warn("generation failed for \"{}\": {}", requests[i].prompt_head, e.what());
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(requests.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return outcomes;
}

json generation_stats(const std::vector<Outcome>& outcomes) {
  std::size_t hits = 0;
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (!o.result) {
      ++failures;
    } else if (o.result->cached) {
      ++hits;
    }
  }
  return {{"generations", outcomes.size()},
          {"cache_hits", hits},
          {"backend_generations", outcomes.size() - hits - failures},
          {"failed_generations", failures}};
}

void check_failures(std::size_t failed, std::size_t total, double threshold,
                    std::string_view unit) {
  if (total > 0 &&
      static_cast<double>(failed) > threshold * static_cast<double>(total)) {
    throw RunFailed(std::to_string(failed) + " of " + std::to_string(total) + " " +
                    std::string(unit) + " failed (threshold " +
                    std::to_string(threshold) + ")");
  }
}

RunManifest base_manifest(const Corpus& corpus, std::string kind, PipelineMode mode,
                          const textgen::GenerationBackend& backend,
                          const textgen::DecodingParams& decoding,
                          const RunOptions& options) {
  RunManifest manifest;
  manifest.report_kind = std::move(kind);
  manifest.corpus_digest = corpus_digest(corpus);
  manifest.mode = mode;
  manifest.generation_backend = backend.id();
  manifest.decoding = decoding;
  manifest.timestamp = textgen::utc_timestamp();
  manifest.settings["max_failure_fraction"] = options.max_failure_fraction;
  return manifest;
}

double mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

// ---------------------------------------------------------------------------
// Caption evaluation
// ---------------------------------------------------------------------------

CaptionEvalResult run_caption_eval(const Corpus& corpus, PipelineMode mode,
                                   textgen::GenerationBackend& backend,
                                   const RunOptions& options) {
  const auto test = corpus.test_records();
  if (test.empty()) throw PreconditionError("test split is empty");
  const auto decoding = options.decoding.value_or(textgen::DecodingParams::defaults_for(mode));
  const auto requests = pipeline_requests(corpus, mode, backend.id(), decoding);
  const auto outcomes = generate_all(requests, backend, options);

  std::map<DescriptionKind, std::optional<metrics::IdfTable>> idf;
  for (DescriptionKind kind : kDescriptionKinds) idf[kind] = reference_idf(corpus, kind);

  RunManifest manifest = base_manifest(corpus, "caption", mode, backend, decoding, options);
  manifest.settings["aggregation"] = "macro-average over artworks";
  manifest.settings["reference"] = "reference sentences joined into one document per kind";
  manifest.settings["rouge"] = "ROUGE-L F-measure, beta 1.2";
  manifest.settings["cider"] = "plain CIDEr, n = 1..4, no scaling, no length penalty";
  manifest.stats = generation_stats(outcomes);

  std::size_t next_outcome = 0;
  std::size_t failed = 0;
  for (const ArtworkRecord* record : test) {
    const std::size_t n_generations =
        mode == PipelineMode::kGeneral ? 1 : record->questions.size();
    json entry = {{"artwork_id", record->id}};
    std::vector<std::string> texts;
    std::string error;
    for (std::size_t g = 0; g < n_generations; ++g) {
      const Outcome& outcome = outcomes[next_outcome++];
      if (outcome.result) {
        texts.push_back(outcome.result->text);
      } else if (error.empty()) {
        error = outcome.error_code + ": " + outcome.error_message;
      }
    }
    entry["generations"] = texts;
    if (!error.empty()) {
      ++failed;
      entry["error"] = error;
      manifest.records.push_back(std::move(entry));
      continue;
    }
    if (texts.empty()) {
      entry["skipped"] = "no questions to condition on";
      manifest.records.push_back(std::move(entry));
      continue;
    }
    const std::string candidate = join(texts);
    entry["candidate"] = candidate;
    json scores = json::object();
    json skipped = json::array();
    for (DescriptionKind kind : kDescriptionKinds) {
      const auto refs = reference_set(corpus, record->id, kind);
      if (refs.empty()) {
        skipped.push_back(std::string(to_string(kind)));
        continue;
      }
      const std::vector<std::string> reference{join(refs)};
      const metrics::IdfTable& table = *idf.at(kind);
      scores[std::string(to_string(kind))] = {
          {"bleu1", metrics::bleu1(candidate, reference)},
          {"rouge", metrics::rouge_l(candidate, reference)},
          {"cider", metrics::cider(candidate, reference, table)},
          {"cosine", metrics::tfidf_cosine(candidate, reference.front(), table)}};
    }
    entry["scores"] = std::move(scores);
    entry["skipped_kinds"] = std::move(skipped);
    manifest.records.push_back(std::move(entry));
  }
  manifest.stats["failed_artworks"] = failed;
  check_failures(failed, test.size(), options.max_failure_fraction, "artworks");

  CaptionEvalResult result;
  result.manifest = std::move(manifest);
  result.rows = recompute_caption_rows(result.manifest);
  return result;
}

std::vector<CaptionReportRow> recompute_caption_rows(const RunManifest& manifest) {
  std::vector<CaptionReportRow> rows;
  const std::string system = system_label(manifest.mode);
  for (DescriptionKind kind : kDescriptionKinds) {
    const std::string kind_name(to_string(kind));
    for (CaptionMetric metric : kCaptionMetrics) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const json& entry : manifest.records) {
        if (!entry.contains("scores") || !entry["scores"].contains(kind_name)) continue;
        sum += entry["scores"][kind_name].at(std::string(to_string(metric))).get<double>();
        ++n;
      }
      if (n == 0) continue;
      rows.push_back({kind, metric, system, mean(sum, n), n});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// QA evaluation
// ---------------------------------------------------------------------------

QaEvalResult run_qa_eval(const Corpus& corpus, PipelineMode mode,
                         textgen::GenerationBackend& backend, qa::QaBackendKind qa_backend,
                         const std::set<QaKind>& kinds, const RunOptions& options) {
  const auto questions = eval_questions(corpus, kinds);
  if (questions.empty()) {
    throw PreconditionError("test split has no questions of the requested kinds");
  }
  const auto decoding = options.decoding.value_or(textgen::DecodingParams::defaults_for(mode));
  const auto requests = pipeline_requests(corpus, mode, backend.id(), decoding, kinds);
  const auto outcomes = generate_all(requests, backend, options);

  // Map each question to the outcome that provides its context.
  std::vector<std::size_t> outcome_of(questions.size());
  if (mode == PipelineMode::kGeneral) {
    std::map<std::string, std::size_t> per_artwork;
    for (std::size_t q = 0; q < questions.size(); ++q) {
      const auto [it, inserted] =
          per_artwork.emplace(questions[q].artwork_id, per_artwork.size());
      outcome_of[q] = it->second;
    }
  } else {
    for (std::size_t q = 0; q < questions.size(); ++q) outcome_of[q] = q;
  }

  const metrics::IdfTable idf = qa_idf(corpus);
  RunManifest manifest = base_manifest(corpus, "qa", mode, backend, decoding, options);
  manifest.qa_backend = std::string(qa::to_string(qa_backend));
  json kinds_json = json::array();
  for (QaKind kind : kinds) kinds_json.push_back(std::string(to_string(kind)));
  manifest.settings["kinds"] = kinds_json;
  manifest.settings["aggregation"] = "micro-average over questions";
  manifest.settings["accuracy"] = "normalized exact match";
  manifest.settings["f1"] = "token multiset overlap after normalization";
  manifest.stats = generation_stats(outcomes);

  std::size_t failed = 0;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    const EvalQuestion& item = questions[q];
    const Outcome& outcome = outcomes[outcome_of[q]];
    json entry = {{"artwork_id", item.artwork_id},
                  {"question", item.qa.question},
                  {"kind", std::string(to_string(item.qa.kind))},
                  {"gold", item.qa.gold_answer},
                  {"prompt", requests[outcome_of[q]].prompt_head}};
    if (!outcome.result) {
      ++failed;
      entry["error"] = outcome.error_code + ": " + outcome.error_message;
      manifest.records.push_back(std::move(entry));
      continue;
    }
    entry["context"] = outcome.result->text;
    try {
      const qa::AnswerSpan span =
          qa::answer(qa_backend, outcome.result->text, item.qa.question, idf, options.remote_qa);
      const auto overlap = metrics::qa_f1(span.text, item.qa.gold_answer);
      entry["answer"] = {{"text", span.text},
                         {"char_start", span.char_start},
                         {"char_end", span.char_end},
                         {"score", span.score},
                         {"sentence_index", span.sentence_index}};
      entry["correct"] = metrics::exact_match(span.text, item.qa.gold_answer);
      entry["precision"] = overlap.precision;
      entry["recall"] = overlap.recall;
      entry["f1"] = overlap.f1;
    } catch (const Error& e) {
      ++failed;
      entry["error"] = e.code() + ": " + e.what();
    }
    manifest.records.push_back(std::move(entry));
  }
  manifest.stats["failed_questions"] = failed;
  check_failures(failed, questions.size(), options.max_failure_fraction, "questions");
  if (failed == questions.size()) throw RunFailed("every question failed");

  QaEvalResult result;
  result.manifest = std::move(manifest);
  result.rows = recompute_qa_rows(result.manifest);
  return result;
}

std::vector<QaReportRow> recompute_qa_rows(const RunManifest& manifest) {
  QaReportRow row;
  row.system = system_label(manifest.mode);
  for (const json& kind : manifest.settings.at("kinds")) {
    if (kind == "visual") row.visual_on = true;
    if (kind == "contextual") row.contextual_on = true;
  }
  std::size_t correct = 0;
  double f1_sum = 0.0;
  for (const json& entry : manifest.records) {
    if (!entry.contains("answer")) continue;
    ++row.n_questions;
    if (entry.at("correct").get<bool>()) ++correct;
    f1_sum += entry.at("f1").get<double>();
  }
  row.accuracy = mean(static_cast<double>(correct), row.n_questions);
  row.f1 = mean(f1_sum, row.n_questions);
  return {row};
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("no such config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  RunConfig config;
  try {
    const json root = json::parse(buffer.str());
    if (!root.is_object()) throw ParseError("config must be a JSON object", path.string());
    static const std::set<std::string> kKeys = {
        "corpus", "split", "mode",    "backend",   "qa",    "kinds",
        "parallelism", "out", "fixtures", "cache_dir", "model", "run_id"};
    for (const auto& [key, value] : root.items()) {
      if (!kKeys.contains(key)) {
        throw ParseError("unknown config key \"" + key + "\"", path.string());
      }
    }
    const auto str = [&](const char* key, std::optional<std::string>& slot) {
      if (root.contains(key)) slot = root[key].get<std::string>();
    };
    str("corpus", config.corpus);
    str("split", config.split);
    str("mode", config.mode);
    str("backend", config.backend);
    str("qa", config.qa);
    str("out", config.out);
    str("fixtures", config.fixtures);
    str("cache_dir", config.cache_dir);
    str("model", config.model);
    str("run_id", config.run_id);
    if (root.contains("kinds")) config.kinds = root["kinds"].get<std::vector<std::string>>();
    if (root.contains("parallelism")) {
      config.parallelism = root["parallelism"].get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), path.string());
  }
  return config;
}

}  // namespace artqa::experiment
