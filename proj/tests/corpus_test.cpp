/// @file corpus_test.cpp
/// @brief Corpus loading, validation, slicing and round-trip tests.

#include "artqa/corpus.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "artqa/errors.h"
#include "test_support.h"

namespace artqa {
namespace {

ArtworkRecord make_record(const std::string& id, std::size_t n_visual, std::size_t n_ctx) {
  ArtworkRecord r;
  r.id = id;
  r.title = "Title " + id;
  for (std::size_t i = 0; i < n_visual; ++i) r.visual_sentences.push_back("v" + std::to_string(i));
  for (std::size_t i = 0; i < n_ctx; ++i) r.contextual_sentences.push_back("c" + std::to_string(i));
  r.questions = {{"What is shown?", "a tree", QaKind::kVisual},
                 {"Who painted it?", "someone", QaKind::kContextual}};
  return r;
}

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
  for (const auto& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(LoadCorpus, FixtureHasTenValidRecords) {
  const Corpus corpus = load_corpus(test::fixture_path("corpus.json"));
  EXPECT_EQ(corpus.records().size(), 10u);
  EXPECT_EQ(corpus.records().front().id, "mona-lisa");
  EXPECT_TRUE(validate_records(corpus.records(), corpus.split_assignment()).empty());
  EXPECT_EQ(corpus.test_records().size(), 10u);
}

TEST(LoadCorpus, EmptyRecordList) {
  try {
    parse_corpus(R"({"records": []})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e.violations(), "corpus has no records"));
  }
}

TEST(LoadCorpus, DuplicateIdNamed) {
  try {
    Corpus({make_record("mona-lisa", 1, 1), make_record("mona-lisa", 1, 1)});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e.violations(), "mona-lisa"));
  }
}

TEST(LoadCorpus, ReportsEveryViolation) {
  auto bad = make_record("", 0, 0);
  bad.title = "";
  bad.questions[0].gold_answer = "";
  try {
    Corpus({bad, make_record("x", 1, 0)}, {{"ghost", Split::kTest}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_GE(e.violations().size(), 4u);
    EXPECT_TRUE(mentions(e.violations(), "ghost"));
  }
}

TEST(LoadCorpus, MissingFile) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.json"), FileNotFound);
}

TEST(LoadCorpus, ParseErrorHasLineLocus) {
  try {
    parse_corpus("{\n  \"records\": [\n    {\"id\": }\n  ]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.locus().find("line 3"), std::string::npos) << e.locus();
  }
}

TEST(LoadCorpus, ParseErrorHasFieldLocus) {
  try {
    parse_corpus(R"({"records": [{"id": "a", "title": 5, "visual_sentences": [],
                     "contextual_sentences": ["x"]}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.locus().find("/records/0/title"), std::string::npos) << e.locus();
  }
}

TEST(LoadCorpus, NfcNormalizesStrings) {
  // "e" + combining acute accent becomes U+00E9.
  const Corpus c = parse_corpus(
      "{\"records\": [{\"id\": \"a\", \"title\": \"Caf\\u0065\\u0301\", "
      "\"visual_sentences\": [\"x\"], \"contextual_sentences\": []}]}");
  EXPECT_EQ(c.records()[0].title, "Caf\xC3\xA9");
}

TEST(LoadCorpus, SplitFileSelectsTestRecords) {
  test::TempDir dir;
  const auto split = dir.path() / "split.json";
  std::ofstream(split) << R"({"mona-lisa": "train", "starry-night": "test"})";
  // Every record must be assigned once a split map is given.
  EXPECT_THROW(load_corpus(test::fixture_path("corpus.json"), split), ValidationError);

  const Corpus corpus({make_record("a", 1, 1), make_record("b", 1, 1)},
                      {{"a", Split::kTrain}, {"b", Split::kTest}});
  ASSERT_EQ(corpus.test_records().size(), 1u);
  EXPECT_EQ(corpus.test_records()[0]->id, "b");
  EXPECT_EQ(corpus.split_of("a"), Split::kTrain);
}

TEST(ReferenceSet, Kinds) {
  const Corpus corpus({make_record("a", 2, 3), make_record("b", 0, 1)});
  const auto all = reference_set(corpus, "a", DescriptionKind::kAll);
  EXPECT_EQ(all, (std::vector<std::string>{"v0", "v1", "c0", "c1", "c2"}));
  EXPECT_TRUE(reference_set(corpus, "b", DescriptionKind::kVisual).empty());
  EXPECT_EQ(reference_set(corpus, "a", DescriptionKind::kContextual),
            corpus.find("a").contextual_sentences);
  EXPECT_THROW(reference_set(corpus, "zzz", DescriptionKind::kAll), UnknownArtwork);
}

TEST(ReferenceSet, AllIsVisualPlusContextual) {
  const Corpus corpus = load_corpus(test::fixture_path("corpus.json"));
  for (const auto& r : corpus.records()) {
    EXPECT_EQ(reference_set(corpus, r.id, DescriptionKind::kAll).size(),
              r.visual_sentences.size() + r.contextual_sentences.size());
  }
}

TEST(EvalQuestions, FilterAndUnion) {
  const Corpus corpus = load_corpus(test::fixture_path("corpus.json"));
  const auto both = eval_questions(corpus, {QaKind::kVisual, QaKind::kContextual});
  const auto visual = eval_questions(corpus, {QaKind::kVisual});
  const auto contextual = eval_questions(corpus, {QaKind::kContextual});
  std::size_t total = 0;
  for (const auto& r : corpus.records()) total += r.questions.size();
  EXPECT_EQ(both.size(), total);
  for (const auto& q : visual) EXPECT_EQ(q.qa.kind, QaKind::kVisual);

  std::multiset<std::string> lhs;
  std::multiset<std::string> rhs;
  for (const auto& q : both) lhs.insert(q.artwork_id + "|" + q.qa.question);
  for (const auto* part : {&visual, &contextual}) {
    for (const auto& q : *part) rhs.insert(q.artwork_id + "|" + q.qa.question);
  }
  EXPECT_EQ(lhs, rhs);
  EXPECT_THROW(eval_questions(corpus, {}), PreconditionError);
}

TEST(EvalQuestions, OnlyTestSplit) {
  const Corpus corpus({make_record("a", 1, 1), make_record("b", 1, 1)},
                      {{"a", Split::kVal}, {"b", Split::kTest}});
  const auto qs = eval_questions(corpus, {QaKind::kVisual, QaKind::kContextual});
  ASSERT_EQ(qs.size(), 2u);
  for (const auto& q : qs) EXPECT_EQ(q.artwork_id, "b");
}

TEST(SaveCorpus, RoundTripIsIdentity) {
  std::mt19937 rng(3);
  test::TempDir dir;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ArtworkRecord> records;
    std::map<std::string, Split> splits;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      auto r = make_record("id-" + std::to_string(i) + "-\xC3\xA9", rng() % 3, 1 + rng() % 3);
      if (rng() % 2) r.questions.pop_back();
      splits[r.id] = static_cast<Split>(rng() % 3);
      records.push_back(std::move(r));
    }
    const Corpus original(records, trial % 2 ? splits : std::map<std::string, Split>{});
    const auto path = dir.path() / ("c" + std::to_string(trial) + ".json");
    save_corpus(original, path);
    const Corpus loaded = load_corpus(path);
    EXPECT_EQ(loaded, original);
    EXPECT_EQ(corpus_digest(loaded), corpus_digest(original));
  }
}

}  // namespace
}  // namespace artqa
