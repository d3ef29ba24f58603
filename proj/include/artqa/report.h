/// @file report.h
/// @brief Renders caption and QA results as JSON, CSV or Markdown tables.
///
/// CSV columns:
///   caption: system,description_kind,metric,value,n_artworks
///   qa:      system,visual,contextual,accuracy,f1,n_questions
/// Floating point values in JSON and CSV use the shortest round-trip form.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artqa/experiment.h"

namespace artqa::experiment {

enum class ReportFormat { kJson, kCsv, kMarkdown };

std::string_view to_string(ReportFormat format);
std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Throws EmptyReport.
std::string render_report(const std::vector<CaptionReportRow>& rows,
                          const RunManifest& manifest, ReportFormat format);
std::string render_report(const std::vector<QaReportRow>& rows,
                          const RunManifest& manifest, ReportFormat format);

/// Writes one rendered report. Throws EmptyReport, IoError.
void emit_report(const std::vector<CaptionReportRow>& rows, const RunManifest& manifest,
                 ReportFormat format, const std::filesystem::path& path);
void emit_report(const std::vector<QaReportRow>& rows, const RunManifest& manifest,
                 ReportFormat format, const std::filesystem::path& path);

/// Writes report.{json,csv,md} and manifest.json into `dir` (created).
void write_run(const std::filesystem::path& dir, const std::vector<CaptionReportRow>& rows,
               const RunManifest& manifest);
void write_run(const std::filesystem::path& dir, const std::vector<QaReportRow>& rows,
               const RunManifest& manifest);

/// Parse-back of the CSV formats. Throws ParseError.
std::vector<CaptionReportRow> parse_caption_csv(std::string_view csv);
std::vector<QaReportRow> parse_qa_csv(std::string_view csv);

/// "<UTC yyyymmddThhmmssZ>-<report kind>-<mode>-<digest prefix>".
std::string make_run_id(const RunManifest& manifest);

}  // namespace artqa::experiment
