#include "artqa/report.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "artqa/errors.h"

namespace artqa::experiment {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kMarkdown:
      return "markdown";
  }
  return "json";
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

namespace {

std::string shortest(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(value);
}

std::string fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"' && i + 1 < csv.size() && csv[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  if (quoted) throw ParseError("unterminated quoted field", "csv");
  return rows;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError("not a number: \"" + text + "\"", "csv");
  }
  return value;
}

std::size_t parse_count(const std::string& text) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError("not a count: \"" + text + "\"", "csv");
  }
  return value;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

constexpr const char* kCaptionCsvHeader = "system,description_kind,metric,value,n_artworks";
constexpr const char* kQaCsvHeader = "system,visual,contextual,accuracy,f1,n_questions";

std::string capitalized(std::string_view word) {
  std::string out(word);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 32);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Caption reports
// ---------------------------------------------------------------------------

std::string render_report(const std::vector<CaptionReportRow>& rows,
                          const RunManifest& manifest, ReportFormat format) {
  if (rows.empty()) throw EmptyReport("no caption rows to report");
  switch (format) {
    case ReportFormat::kJson: {
      json out_rows = json::array();
      for (const auto& row : rows) {
        out_rows.push_back({{"description_kind", std::string(to_string(row.description_kind))},
                            {"metric", std::string(to_string(row.metric))},
                            {"system", row.system},
                            {"value", row.value},
                            {"n_artworks", row.n_artworks}});
      }
      const json report = {{"report", "caption"},
                           {"mode", std::string(textgen::to_string(manifest.mode))},
                           {"corpus_digest", manifest.corpus_digest},
                           {"manifest_digest", manifest.digest()},
                           {"conventions", manifest.settings},
                           {"rows", std::move(out_rows)}};
      return report.dump(2) + "\n";
    }
    case ReportFormat::kCsv: {
      std::string out = std::string(kCaptionCsvHeader) + "\n";
      for (const auto& row : rows) {
        out += csv_field(row.system) + "," + std::string(to_string(row.description_kind)) +
               "," + std::string(to_string(row.metric)) + "," + shortest(row.value) + "," +
               std::to_string(row.n_artworks) + "\n";
      }
      return out;
    }
    case ReportFormat::kMarkdown: {
      // (kind, system) -> metric -> value
      std::map<std::pair<int, std::string>, std::map<CaptionMetric, double>> cells;
      for (const auto& row : rows) {
        cells[{static_cast<int>(row.description_kind), row.system}][row.metric] = row.value;
      }
      std::string out = "| Description type | System |";
      std::string rule = "|---|---|";
      for (CaptionMetric metric : kCaptionMetrics) {
        out += " " + std::string(metric_label(metric)) + " |";
        rule += "---:|";
      }
      out += "\n" + rule + "\n";
      for (const auto& [key, values] : cells) {
        out += "| " + capitalized(to_string(static_cast<DescriptionKind>(key.first))) +
               " | " + key.second + " |";
        for (CaptionMetric metric : kCaptionMetrics) {
          const auto it = values.find(metric);
          out += " " + (it == values.end() ? std::string("-") : fixed3(it->second)) + " |";
        }
        out += "\n";
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// QA reports
// ---------------------------------------------------------------------------

std::string render_report(const std::vector<QaReportRow>& rows, const RunManifest& manifest,
                          ReportFormat format) {
  if (rows.empty()) throw EmptyReport("no QA rows to report");
  switch (format) {
    case ReportFormat::kJson: {
      json out_rows = json::array();
      for (const auto& row : rows) {
        out_rows.push_back({{"system", row.system},
                            {"visual", row.visual_on},
                            {"contextual", row.contextual_on},
                            {"accuracy", row.accuracy},
                            {"f1", row.f1},
                            {"n_questions", row.n_questions}});
      }
      const json report = {{"report", "qa"},
                           {"mode", std::string(textgen::to_string(manifest.mode))},
                           {"qa_backend", manifest.qa_backend},
                           {"corpus_digest", manifest.corpus_digest},
                           {"manifest_digest", manifest.digest()},
                           {"conventions", manifest.settings},
                           {"rows", std::move(out_rows)}};
      return report.dump(2) + "\n";
    }
    case ReportFormat::kCsv: {
      std::string out = std::string(kQaCsvHeader) + "\n";
      for (const auto& row : rows) {
        out += csv_field(row.system) + "," + (row.visual_on ? "true" : "false") + "," +
               (row.contextual_on ? "true" : "false") + "," + shortest(row.accuracy) + "," +
               shortest(row.f1) + "," + std::to_string(row.n_questions) + "\n";
      }
      return out;
    }
    case ReportFormat::kMarkdown: {
      std::string out = "| System | Visual | Contextual | Accuracy | F1 score |\n";
      out += "|---|:---:|:---:|---:|---:|\n";
      for (const auto& row : rows) {
        out += "| " + row.system + " | " + (row.visual_on ? "✓" : "✗") + " | " +
               (row.contextual_on ? "✓" : "✗") + " | " + fixed3(row.accuracy) + " | " +
               fixed3(row.f1) + " |\n";
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void emit_report(const std::vector<CaptionReportRow>& rows, const RunManifest& manifest,
                 ReportFormat format, const fs::path& path) {
  write_file(path, render_report(rows, manifest, format));
}

void emit_report(const std::vector<QaReportRow>& rows, const RunManifest& manifest,
                 ReportFormat format, const fs::path& path) {
  write_file(path, render_report(rows, manifest, format));
}

namespace {

template <typename Row>
void write_run_impl(const fs::path& dir, const std::vector<Row>& rows,
                    const RunManifest& manifest) {
  if (rows.empty()) throw EmptyReport("no rows to report");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  emit_report(rows, manifest, ReportFormat::kJson, dir / "report.json");
  emit_report(rows, manifest, ReportFormat::kCsv, dir / "report.csv");
  emit_report(rows, manifest, ReportFormat::kMarkdown, dir / "report.md");
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

}  // namespace

void write_run(const fs::path& dir, const std::vector<CaptionReportRow>& rows,
               const RunManifest& manifest) {
  write_run_impl(dir, rows, manifest);
}

void write_run(const fs::path& dir, const std::vector<QaReportRow>& rows,
               const RunManifest& manifest) {
  write_run_impl(dir, rows, manifest);
}

std::vector<CaptionReportRow> parse_caption_csv(std::string_view csv) {
  const auto table = parse_csv(csv);
  if (table.empty()) throw ParseError("empty CSV", "csv");
  std::vector<CaptionReportRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& cells = table[i];
    if (cells.size() != 5) throw ParseError("expected 5 columns", "csv line " + std::to_string(i + 1));
    const auto kind = parse_description_kind(cells[1]);
    const auto metric = parse_caption_metric(cells[2]);
    if (!kind || !metric) throw ParseError("bad kind or metric", "csv line " + std::to_string(i + 1));
    rows.push_back({*kind, *metric, cells[0], parse_double(cells[3]), parse_count(cells[4])});
  }
  return rows;
}

std::vector<QaReportRow> parse_qa_csv(std::string_view csv) {
  const auto table = parse_csv(csv);
  if (table.empty()) throw ParseError("empty CSV", "csv");
  std::vector<QaReportRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& cells = table[i];
    if (cells.size() != 6) throw ParseError("expected 6 columns", "csv line " + std::to_string(i + 1));
    QaReportRow row;
    row.system = cells[0];
    row.visual_on = cells[1] == "true";
    row.contextual_on = cells[2] == "true";
    row.accuracy = parse_double(cells[3]);
    row.f1 = parse_double(cells[4]);
    row.n_questions = parse_count(cells[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string make_run_id(const RunManifest& manifest) {
  std::string stamp;
  for (char c : manifest.timestamp) {
    if (c != '-' && c != ':') stamp += c;
  }
  return stamp + "-" + manifest.report_kind + "-" +
         std::string(textgen::to_string(manifest.mode)) + "-" + manifest.digest().substr(0, 8);
}

}  // namespace artqa::experiment
