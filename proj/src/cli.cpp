#include "artqa/cli.h"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "artqa/backends.h"
#include "artqa/cache.h"
#include "artqa/corpus.h"
#include "artqa/errors.h"
#include "artqa/experiment.h"
#include "artqa/qa.h"
#include "artqa/report.h"
#include "artqa/server.h"
#include "artqa/textgen.h"

namespace artqa::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string corpus;
  std::string split;
  std::string config;
  std::string mode = "general";
  std::string backend = "fixture";
  std::string qa = "lexical";
  std::vector<std::string> kinds;
  std::string out = "runs";
  std::string run_id;
  std::size_t parallelism = 4;
  std::string format = "text";
  std::string fixtures = "fixtures/generations.json";
  std::string cache_dir;
  std::string model;
  std::string artwork;
  std::string question;
  std::string bind;
  std::string cors_origin = "*";
  std::string pricing;
};

void ensure_stderr_logging() {
  if (!spdlog::get("artqa")) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("artqa"));
  }
}

experiment::PipelineMode parse_mode(const std::string& text) {
  const auto mode = textgen::parse_template_kind(text);
  if (!mode) throw UsageError("--mode must be general or question_based, got \"" + text + "\"");
  return *mode;
}

qa::QaBackendKind parse_qa(const std::string& text) {
  const auto kind = qa::parse_qa_backend(text);
  if (!kind) throw UsageError("--qa must be lexical or remote, got \"" + text + "\"");
  return *kind;
}

std::set<QaKind> parse_kinds(const std::vector<std::string>& items) {
  std::set<QaKind> kinds;
  for (const auto& item : items) {
    const auto kind = parse_qa_kind(item);
    if (!kind) throw UsageError("--kinds accepts visual and contextual, got \"" + item + "\"");
    kinds.insert(*kind);
  }
  if (kinds.empty()) kinds = {QaKind::kVisual, QaKind::kContextual};
  return kinds;
}

std::unique_ptr<textgen::GenerationBackend> make_backend(const Options& opts) {
  if (opts.backend == "fixture") {
    return std::make_unique<textgen::FixtureBackend>(textgen::FixtureBackend::load(opts.fixtures));
  }
  if (opts.backend == "echo") return std::make_unique<textgen::EchoBackend>();
  if (opts.backend == "remote") {
    return std::make_unique<textgen::RemoteBackend>(textgen::RemoteBackendConfig::from_env());
  }
  throw UsageError("--backend must be remote, fixture or echo, got \"" + opts.backend + "\"");
}

textgen::GenerationCache make_cache(const Options& opts) {
  return textgen::GenerationCache(opts.cache_dir.empty() ? textgen::GenerationCache::default_root()
                                                         : fs::path(opts.cache_dir));
}

textgen::DecodingParams decoding_for(const Options& opts, experiment::PipelineMode mode) {
  auto params = textgen::DecodingParams::defaults_for(mode);
  if (!opts.model.empty()) params.model_name = opts.model;
  return params;
}

Corpus load_required_corpus(const Options& opts) {
  if (opts.corpus.empty()) throw UsageError("--corpus is required");
  return load_corpus(opts.corpus, opts.split.empty() ? std::nullopt
                                                     : std::optional<fs::path>(opts.split));
}

// Fills options left at their defaults from a run config file.
void apply_config(Options& opts, const CLI::App& sub) {
  if (opts.config.empty()) return;
  const auto config = experiment::load_run_config(opts.config);
  const auto fill = [&](const char* flag, std::string& slot,
                        const std::optional<std::string>& value) {
    if (value && sub.count(flag) == 0) slot = *value;
  };
  fill("--corpus", opts.corpus, config.corpus);
  fill("--split", opts.split, config.split);
  fill("--mode", opts.mode, config.mode);
  fill("--backend", opts.backend, config.backend);
  fill("--qa", opts.qa, config.qa);
  fill("--out", opts.out, config.out);
  fill("--fixtures", opts.fixtures, config.fixtures);
  fill("--cache-dir", opts.cache_dir, config.cache_dir);
  fill("--model", opts.model, config.model);
  fill("--run-id", opts.run_id, config.run_id);
  if (config.kinds && sub.count("--kinds") == 0) opts.kinds = *config.kinds;
  if (config.parallelism && sub.count("--parallelism") == 0) opts.parallelism = *config.parallelism;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_validate(const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    const Corpus corpus = load_corpus(
        opts.corpus, opts.split.empty() ? std::nullopt : std::optional<fs::path>(opts.split));
    std::size_t questions = 0;
    for (const auto& r : corpus.records()) questions += r.questions.size();
    out << "ok: " << corpus.records().size() << " records, " << questions << " questions, "
        << corpus.test_records().size() << " in test split\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "invalid corpus " << opts.corpus << ":\n";
    for (const auto& v : e.violations()) err << "  - " << v << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_generate(const Options& opts, std::ostream& out) {
  const Corpus corpus = load_required_corpus(opts);
  const auto mode = parse_mode(opts.mode);
  auto backend = make_backend(opts);
  const auto cache = make_cache(opts);
  const auto requests =
      experiment::pipeline_requests(corpus, mode, backend->id(), decoding_for(opts, mode));
  std::size_t generated = 0;
  std::size_t cached = 0;
  std::size_t failed = 0;
  for (const auto& request : requests) {
    try {
      const auto result = textgen::cached_generate(cache, *backend, request);
      ++(result.cached ? cached : generated);
    } catch (const Error& e) {
      ++failed;
      spdlog::error("generation failed for \"{}\": {}", request.prompt_head, e.what());
    }
  }
  out << "requests: " << requests.size() << "\ngenerated: " << generated
      << "\ncached: " << cached << "\nfailed: " << failed << "\n";
  return failed == 0 ? kExitOk : kExitBackend;
}

int cmd_ask(Options opts, std::ostream& out) {
  if (opts.corpus.empty()) opts.corpus = "fixtures/corpus.json";
  const Corpus corpus = load_required_corpus(opts);
  const auto mode = parse_mode(opts.mode);
  const auto qa_kind = parse_qa(opts.qa);
  if (opts.artwork.empty() || opts.question.empty()) {
    throw UsageError("--artwork and --question are required");
  }
  auto backend = make_backend(opts);
  const auto cache = make_cache(opts);
  const ArtworkRecord& record = corpus.find(opts.artwork);

  textgen::GenerationRequest request;
  request.prompt_head = textgen::render_prompt(
      mode, record.title,
      mode == textgen::PromptTemplateKind::kQuestionBased ? std::optional(opts.question)
                                                          : std::nullopt);
  request.decoding = decoding_for(opts, mode);
  request.backend_id = backend->id();
  const auto generation = textgen::cached_generate(cache, *backend, request);
  const auto span = qa::answer(qa_kind, generation.text, opts.question,
                               experiment::qa_idf(corpus), qa::RemoteQaConfig::from_env());
  if (opts.format == "json") {
    out << json{{"answer", span.text},
                {"span", {{"char_start", span.char_start}, {"char_end", span.char_end}}},
                {"context", generation.text},
                {"mode", std::string(textgen::to_string(mode))},
                {"cached", generation.cached}}
               .dump(2)
        << "\n";
  } else {
    out << "answer: " << span.text << "\ncontext: " << generation.text << "\n";
  }
  return kExitOk;
}

template <typename Rows>
int finish_run(const Options& opts, const Rows& rows, experiment::RunManifest manifest,
               std::ostream& out) {
  manifest.run_id = opts.run_id.empty() ? experiment::make_run_id(manifest) : opts.run_id;
  const fs::path dir = fs::path(opts.out) / manifest.run_id;
  experiment::write_run(dir, rows, manifest);
  spdlog::info("wrote {}", dir.string());
  const auto format =
      opts.format == "json" ? experiment::ReportFormat::kJson
      : opts.format == "csv" ? experiment::ReportFormat::kCsv
                             : experiment::ReportFormat::kMarkdown;
  out << experiment::render_report(rows, manifest, format);
  return kExitOk;
}

experiment::RunOptions run_options(const Options& opts, const textgen::GenerationCache& cache,
                                   experiment::PipelineMode mode) {
  experiment::RunOptions options;
  options.parallelism = opts.parallelism;
  options.cache = &cache;
  options.decoding = decoding_for(opts, mode);
  options.remote_qa = qa::RemoteQaConfig::from_env();
  return options;
}

int cmd_eval_captions(const Options& opts, std::ostream& out) {
  const Corpus corpus = load_required_corpus(opts);
  const auto mode = parse_mode(opts.mode);
  auto backend = make_backend(opts);
  const auto cache = make_cache(opts);
  auto result = experiment::run_caption_eval(corpus, mode, *backend,
                                             run_options(opts, cache, mode));
  return finish_run(opts, result.rows, std::move(result.manifest), out);
}

int cmd_eval_qa(const Options& opts, std::ostream& out) {
  const Corpus corpus = load_required_corpus(opts);
  const auto mode = parse_mode(opts.mode);
  const auto qa_kind = parse_qa(opts.qa);
  const auto kinds = parse_kinds(opts.kinds);
  auto backend = make_backend(opts);
  const auto cache = make_cache(opts);
  auto result = experiment::run_qa_eval(corpus, mode, *backend, qa_kind, kinds,
                                        run_options(opts, cache, mode));
  return finish_run(opts, result.rows, std::move(result.manifest), out);
}

int cmd_serve(const Options& opts, std::ostream& out) {
  auto corpus = std::make_shared<const Corpus>(load_required_corpus(opts));
  auto backend = make_backend(opts);
  const auto cache = make_cache(opts);
  std::string bind = opts.bind;
  if (bind.empty()) {
    const char* env = std::getenv("ARTQA_BIND");
    bind = env && *env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = server::parse_bind(bind);
  server::ServerConfig config;
  config.cors_origin = opts.cors_origin;
  config.remote_qa = qa::RemoteQaConfig::from_env();
  if (!opts.model.empty()) {
    config.general_decoding = decoding_for(opts, textgen::PromptTemplateKind::kGeneral);
    config.question_decoding = decoding_for(opts, textgen::PromptTemplateKind::kQuestionBased);
  }
  server::Server srv(corpus, *backend, cache, config);
  if (!srv.bind(host, port)) throw IoError("cannot bind " + bind);
  out << "serving on http://" << host << ":" << port << std::endl;
  srv.listen_after_bind();
  return kExitOk;
}

int cmd_cache_stats(const Options& opts, std::ostream& out) {
  const auto cache = make_cache(opts);
  const auto stats = cache.stats();
  if (opts.format == "json") {
    out << json{{"root", cache.root().string()}, {"entries", stats.entries}, {"bytes", stats.bytes}}
               .dump()
        << "\n";
  } else {
    out << "root: " << cache.root().string() << "\nentries: " << stats.entries
        << "\nbytes: " << stats.bytes << "\n";
  }
  return kExitOk;
}

int cmd_cache_clear(const Options& opts, std::ostream& out) {
  const auto cache = make_cache(opts);
  out << "removed: " << cache.clear() << "\n";
  return kExitOk;
}

int cmd_cost_estimate(const Options& opts, std::ostream& out) {
  const Corpus corpus = load_required_corpus(opts);
  const auto mode = parse_mode(opts.mode);
  if (opts.pricing.empty()) throw UsageError("--pricing is required");
  const auto pricing = textgen::load_pricing(opts.pricing);
  const auto decoding = decoding_for(opts, mode);
  const auto requests = experiment::pipeline_requests(corpus, mode, opts.backend, decoding);
  double total = 0.0;
  for (const auto& request : requests) total += textgen::estimate_cost(request, pricing);
  if (opts.format == "json") {
    out << json{{"requests", requests.size()},
                {"model", decoding.model_name},
                {"upper_bound_cost", total}}
               .dump()
        << "\n";
  } else {
    out << "requests: " << requests.size() << "\nmodel: " << decoding.model_name
        << "\nupper-bound cost: " << std::fixed << std::setprecision(6) << total
        << " (approximate token counts)\n";
  }
  return kExitOk;
}

bool is_backend_failure(const Error& e) {
  static const std::set<std::string> kCodes = {
      "BackendUnavailable", "BackendRefused", "EmptyGeneration",
      "RemoteQaUnavailable", "SpanOutOfBounds", "RunFailed"};
  return kCodes.contains(e.code());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ensure_stderr_logging();
  Options opts;
  CLI::App app{"Artwork question answering over generated descriptions", "artqa"};
  app.require_subcommand(1);

  const auto add_corpus = [&](CLI::App* sub) {
    sub->add_option("--corpus", opts.corpus, "Corpus JSON file");
    sub->add_option("--split", opts.split, "Split file mapping id to train/val/test");
  };
  const auto add_generation = [&](CLI::App* sub) {
    sub->add_option("--mode", opts.mode, "general | question_based")->capture_default_str();
    sub->add_option("--backend", opts.backend, "remote | fixture | echo")->capture_default_str();
    sub->add_option("--fixtures", opts.fixtures, "Fixture generations file")
        ->capture_default_str();
    sub->add_option("--cache-dir", opts.cache_dir,
                    "Generation cache directory (default $ARTQA_CACHE_DIR or .artqa-cache)");
    sub->add_option("--model", opts.model, "Model name sent to the backend");
  };
  const auto add_run = [&](CLI::App* sub) {
    sub->add_option("--out", opts.out, "Directory for runs/<run-id>/")->capture_default_str();
    sub->add_option("--run-id", opts.run_id, "Run directory name (default: derived)");
    sub->add_option("--parallelism", opts.parallelism, "Concurrent generations")
        ->capture_default_str();
    sub->add_option("--config", opts.config, "Run config JSON file");
    sub->add_option("--format", opts.format, "markdown | json | csv")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Validate a corpus file");
  validate->add_option("corpus", opts.corpus, "Corpus JSON file")->required();
  validate->add_option("--split", opts.split, "Split file");

  auto* generate = app.add_subcommand("generate", "Populate the generation cache");
  add_corpus(generate);
  add_generation(generate);

  auto* ask = app.add_subcommand("ask", "Answer one question about one artwork");
  add_corpus(ask);
  add_generation(ask);
  ask->add_option("--artwork", opts.artwork, "Artwork id")->required();
  ask->add_option("--question", opts.question, "Question text")->required();
  ask->add_option("--qa", opts.qa, "lexical | remote")->capture_default_str();
  ask->add_option("--format", opts.format, "text | json")->capture_default_str();

  auto* eval_captions = app.add_subcommand("eval-captions", "Score generated descriptions");
  add_corpus(eval_captions);
  add_generation(eval_captions);
  add_run(eval_captions);

  auto* eval_qa = app.add_subcommand("eval-qa", "Score answers to corpus questions");
  add_corpus(eval_qa);
  add_generation(eval_qa);
  add_run(eval_qa);
  eval_qa->add_option("--qa", opts.qa, "lexical | remote")->capture_default_str();
  eval_qa->add_option("--kinds", opts.kinds, "visual,contextual (default both)")
      ->delimiter(',');

  auto* serve = app.add_subcommand("serve", "Run the REST service");
  add_corpus(serve);
  add_generation(serve);
  serve->add_option("--bind", opts.bind, "host:port (default $ARTQA_BIND or 127.0.0.1:8080)");
  serve->add_option("--cors-origin", opts.cors_origin, "Allowed CORS origin")
      ->capture_default_str();

  auto* cache_stats = app.add_subcommand("cache-stats", "Show generation cache size");
  cache_stats->add_option("--cache-dir", opts.cache_dir, "Generation cache directory");
  cache_stats->add_option("--format", opts.format, "text | json")->capture_default_str();

  auto* cache_clear = app.add_subcommand("cache-clear", "Delete all cached generations");
  cache_clear->add_option("--cache-dir", opts.cache_dir, "Generation cache directory");

  auto* cost = app.add_subcommand("cost-estimate", "Upper-bound generation cost");
  add_corpus(cost);
  cost->add_option("--mode", opts.mode, "general | question_based")->capture_default_str();
  cost->add_option("--backend", opts.backend, "Backend id used in requests")
      ->capture_default_str();
  cost->add_option("--model", opts.model, "Model name (must be in the pricing table)");
  cost->add_option("--pricing", opts.pricing, "Pricing JSON file");
  cost->add_option("--format", opts.format, "text | json")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(opts, out, err);
    if (*generate) return cmd_generate(opts, out);
    if (*ask) return cmd_ask(opts, out);
    if (*eval_captions) {
      apply_config(opts, *eval_captions);
      return cmd_eval_captions(opts, out);
    }
    if (*eval_qa) {
      apply_config(opts, *eval_qa);
      return cmd_eval_qa(opts, out);
    }
    if (*serve) return cmd_serve(opts, out);
    if (*cache_stats) return cmd_cache_stats(opts, out);
    if (*cache_clear) return cmd_cache_clear(opts, out);
    if (*cost) return cmd_cost_estimate(opts, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid corpus:\n";
    for (const auto& v : e.violations()) err << "  - " << v << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << "\n";
    return is_backend_failure(e) ? kExitBackend : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace artqa::cli
