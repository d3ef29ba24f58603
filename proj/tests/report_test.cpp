/// @file report_test.cpp
/// @brief Report rendering, CSV round trip and run directories.

#include "artqa/report.h"

#include <gtest/gtest.h>

#include <random>

#include "artqa/errors.h"
#include "test_support.h"

namespace artqa::experiment {
namespace {

RunManifest manifest_for(const std::string& kind) {
  RunManifest m;
  m.report_kind = kind;
  m.corpus_digest = std::string(64, 'a');
  m.mode = textgen::PromptTemplateKind::kGeneral;
  m.generation_backend = "fixture";
  m.timestamp = "2024-01-02T03:04:05Z";
  return m;
}

std::vector<CaptionReportRow> caption_rows(std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CaptionReportRow> rows;
  for (auto kind : kDescriptionKinds) {
    for (auto metric : kCaptionMetrics) {
      rows.push_back({kind, metric, "Ours - General", unit(rng), 1 + rng() % 20});
    }
  }
  return rows;
}

TEST(Report, CaptionMarkdownShape) {
  std::mt19937 rng(1);
  const auto md = render_report(caption_rows(rng), manifest_for("caption"),
                                ReportFormat::kMarkdown);
  for (const char* label : {"BLEU1", "ROUGE", "CIDEr", "COSINE", "Visual", "Contextual", "All",
                            "Ours - General"}) {
    EXPECT_NE(md.find(label), std::string::npos) << label;
  }
  // Header, rule and one line per description kind.
  EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 5);
}

TEST(Report, QaMarkdownShape) {
  QaReportRow row{true, false, 0.5, 0.625, "Ours - Question-based", 4};
  const auto md = render_report(std::vector{row}, manifest_for("qa"), ReportFormat::kMarkdown);
  EXPECT_NE(md.find("Accuracy"), std::string::npos);
  EXPECT_NE(md.find("F1"), std::string::npos);
  EXPECT_NE(md.find("0.625"), std::string::npos);
  EXPECT_NE(md.find("✓"), std::string::npos);
  EXPECT_NE(md.find("✗"), std::string::npos);
}

TEST(Report, EmptyRowsRejected) {
  EXPECT_THROW(render_report(std::vector<CaptionReportRow>{}, manifest_for("caption"),
                             ReportFormat::kJson),
               EmptyReport);
  EXPECT_THROW(
      render_report(std::vector<QaReportRow>{}, manifest_for("qa"), ReportFormat::kCsv),
      EmptyReport);
}

TEST(Report, CaptionCsvRoundTrip) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = caption_rows(rng);
    const auto csv = render_report(rows, manifest_for("caption"), ReportFormat::kCsv);
    EXPECT_EQ(parse_caption_csv(csv), rows);
  }
}

TEST(Report, QaCsvRoundTripWithQuoting) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<QaReportRow> rows = {
        {true, true, unit(rng), unit(rng), "Ours, \"quoted\"", rng() % 100},
        {false, true, unit(rng), unit(rng), "Ours - General", rng() % 100}};
    const auto csv = render_report(rows, manifest_for("qa"), ReportFormat::kCsv);
    EXPECT_EQ(parse_qa_csv(csv), rows);
  }
  EXPECT_THROW(parse_qa_csv("h\n\"open"), ParseError);
}

TEST(Report, JsonCarriesConventionsAndDigest) {
  auto m = manifest_for("caption");
  m.settings["rouge"] = "ROUGE-L F-measure, beta 1.2";
  std::mt19937 rng(5);
  const auto json_text = render_report(caption_rows(rng), m, ReportFormat::kJson);
  const auto parsed = nlohmann::json::parse(json_text);
  EXPECT_EQ(parsed["conventions"]["rouge"], "ROUGE-L F-measure, beta 1.2");
  EXPECT_EQ(parsed["manifest_digest"], m.digest());
  EXPECT_EQ(parsed["rows"].size(), 12u);
  EXPECT_FALSE(parsed.contains("timestamp"));
}

TEST(Report, DigestIgnoresTimestampAndRunId) {
  auto a = manifest_for("qa");
  auto b = a;
  b.timestamp = "2030-01-01T00:00:00Z";
  b.run_id = "other";
  b.stats["cache_hits"] = 3;
  EXPECT_EQ(a.digest(), b.digest());
  b.corpus_digest = std::string(64, 'b');
  EXPECT_NE(a.digest(), b.digest());
}

TEST(Report, WriteRunCreatesAllFiles) {
  test::TempDir dir;
  std::mt19937 rng(6);
  auto m = manifest_for("caption");
  m.run_id = make_run_id(m);
  EXPECT_EQ(m.run_id.rfind("20240102T030405Z-caption-general-", 0), 0u) << m.run_id;
  write_run(dir.path() / m.run_id, caption_rows(rng), m);
  for (const char* name : {"report.json", "report.csv", "report.md", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / m.run_id / name)) << name;
  }
  const auto manifest =
      nlohmann::json::parse(test::read_file(dir.path() / m.run_id / "manifest.json"));
  EXPECT_EQ(manifest["timestamp"], m.timestamp);
  EXPECT_EQ(manifest["digest"], m.digest());
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("md"), ReportFormat::kMarkdown);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_FALSE(parse_report_format("xml"));
}

}  // namespace
}  // namespace artqa::experiment
