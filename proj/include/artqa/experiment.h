/// @file experiment.h
/// @brief Runs the General and Question-based pipelines over a corpus and
/// aggregates caption-quality and QA scores.
///
/// Caption scores are macro-averaged over artworks; QA scores are
/// micro-averaged over questions.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "artqa/cache.h"
#include "artqa/corpus.h"
#include "artqa/metrics.h"
#include "artqa/qa.h"
#include "artqa/textgen.h"

namespace artqa::experiment {

inline constexpr std::string_view kCodeVersion = "0.1.0";

using PipelineMode = textgen::PromptTemplateKind;

/// "Ours - General" / "Ours - Question-based".
std::string system_label(PipelineMode mode);

enum class CaptionMetric { kBleu1, kRouge, kCider, kCosine };

inline constexpr CaptionMetric kCaptionMetrics[] = {
    CaptionMetric::kBleu1, CaptionMetric::kRouge, CaptionMetric::kCider,
    CaptionMetric::kCosine};
inline constexpr DescriptionKind kDescriptionKinds[] = {
    DescriptionKind::kVisual, DescriptionKind::kContextual, DescriptionKind::kAll};

std::string_view to_string(CaptionMetric metric);   // "bleu1", "rouge", ...
std::string_view metric_label(CaptionMetric metric);  // "BLEU1", "ROUGE", ...
std::optional<CaptionMetric> parse_caption_metric(std::string_view text);

struct CaptionReportRow {
  DescriptionKind description_kind = DescriptionKind::kAll;
  CaptionMetric metric = CaptionMetric::kBleu1;
  std::string system;
  double value = 0.0;
  std::size_t n_artworks = 0;

  bool operator==(const CaptionReportRow&) const = default;
};

struct QaReportRow {
  bool visual_on = false;
  bool contextual_on = false;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::string system;
  std::size_t n_questions = 0;

  bool operator==(const QaReportRow&) const = default;
};

/// Everything needed to recompute a report's aggregates.
struct RunManifest {
  std::string report_kind;  // "caption" or "qa"
  std::string corpus_digest;
  PipelineMode mode = PipelineMode::kGeneral;
  std::string generation_backend;
  std::string qa_backend;  // empty for caption runs
  textgen::DecodingParams decoding;
  std::string code_version{kCodeVersion};
  std::string timestamp;
  std::string run_id;
  nlohmann::json settings = nlohmann::json::object();
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json stats = nlohmann::json::object();

  nlohmann::json to_json() const;

  /// SHA-256 over the manifest without timestamp, run_id and stats.
  std::string digest() const;
};

struct RunOptions {
  std::size_t parallelism = 4;
  double max_failure_fraction = 0.5;
  /// Defaults to DecodingParams::defaults_for(mode).
  std::optional<textgen::DecodingParams> decoding;
  /// Generations go through this cache when set.
  const textgen::GenerationCache* cache = nullptr;
  qa::RemoteQaConfig remote_qa;
};

struct CaptionEvalResult {
  std::vector<CaptionReportRow> rows;
  RunManifest manifest;
};

struct QaEvalResult {
  std::vector<QaReportRow> rows;
  RunManifest manifest;
};

/// Generation requests a mode issues over the test split, in order:
/// one per artwork (general) or one per question (question_based).
/// When `kinds` is set, only artworks/questions with those question kinds
/// are included.
std::vector<textgen::GenerationRequest> pipeline_requests(
    const Corpus& corpus, PipelineMode mode, const std::string& backend_id,
    const textgen::DecodingParams& decoding,
    const std::optional<std::set<QaKind>>& kinds = std::nullopt);

/// Unigram-to-4-gram IDF over one joined reference document per test
/// artwork with nonempty references of `kind`. Nullopt when no artwork has
/// references of that kind.
std::optional<metrics::IdfTable> reference_idf(const Corpus& corpus, DescriptionKind kind,
                                               int n_max = metrics::kCiderMaxOrder);

/// IDF used by the lexical extractor (kind = all; N = 1 table when empty).
metrics::IdfTable qa_idf(const Corpus& corpus);

/// Throws PreconditionError (empty test split) and RunFailed (more than
/// max_failure_fraction of artworks failed to generate).
CaptionEvalResult run_caption_eval(const Corpus& corpus, PipelineMode mode,
                                   textgen::GenerationBackend& backend,
                                   const RunOptions& options = {});

/// One row for the requested kinds configuration.
QaEvalResult run_qa_eval(const Corpus& corpus, PipelineMode mode,
                         textgen::GenerationBackend& backend,
                         qa::QaBackendKind qa_backend, const std::set<QaKind>& kinds,
                         const RunOptions& options = {});

/// Aggregates recomputed from the manifest's per-item records.
std::vector<CaptionReportRow> recompute_caption_rows(const RunManifest& manifest);
std::vector<QaReportRow> recompute_qa_rows(const RunManifest& manifest);

/// Run configuration file (JSON). Every field is optional:
/// `{"corpus", "split", "mode", "backend", "qa", "kinds": [..],
///   "parallelism", "out", "fixtures", "cache_dir", "model", "run_id"}`.
struct RunConfig {
  std::optional<std::string> corpus;
  std::optional<std::string> split;
  std::optional<std::string> mode;
  std::optional<std::string> backend;
  std::optional<std::string> qa;
  std::optional<std::vector<std::string>> kinds;
  std::optional<std::size_t> parallelism;
  std::optional<std::string> out;
  std::optional<std::string> fixtures;
  std::optional<std::string> cache_dir;
  std::optional<std::string> model;
  std::optional<std::string> run_id;
};

/// Throws FileNotFound, ParseError.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace artqa::experiment
