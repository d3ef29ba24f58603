/// @file corpus.h
/// @brief Artwork corpus: artworks with visual/contextual sentences
/// and question-answer annotations.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artqa {

enum class QaKind { kVisual, kContextual };
enum class DescriptionKind { kVisual, kContextual, kAll };
enum class Split { kTrain, kVal, kTest };

std::string_view to_string(QaKind kind);
std::string_view to_string(DescriptionKind kind);
std::string_view to_string(Split split);
std::optional<QaKind> parse_qa_kind(std::string_view text);
std::optional<DescriptionKind> parse_description_kind(std::string_view text);
std::optional<Split> parse_split(std::string_view text);

struct QaPair {
  std::string question;
  std::string gold_answer;
  QaKind kind = QaKind::kVisual;

  bool operator==(const QaPair&) const = default;
};

struct ArtworkRecord {
  std::string id;
  std::string title;  // used verbatim as the painting name in prompts
  std::vector<std::string> visual_sentences;
  std::vector<std::string> contextual_sentences;
  std::vector<QaPair> questions;

  bool operator==(const ArtworkRecord&) const = default;
};

/// Validated, immutable-after-load collection of artworks.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every invariant and throws ValidationError listing all
  /// violations. An empty split map means every record is in the test split.
  Corpus(std::vector<ArtworkRecord> records,
         std::map<std::string, Split> split_assignment = {});

  const std::vector<ArtworkRecord>& records() const noexcept { return records_; }
  const std::map<std::string, Split>& split_assignment() const noexcept {
    return splits_;
  }

  /// Split of `id`; defaults to test when no split map was supplied.
  Split split_of(const std::string& id) const;

  /// Throws UnknownArtwork.
  const ArtworkRecord& find(const std::string& id) const;
  bool contains(const std::string& id) const;

  /// Records in the test split, file order.
  std::vector<const ArtworkRecord*> test_records() const;

  bool operator==(const Corpus& other) const {
    return records_ == other.records_ && splits_ == other.splits_;
  }

 private:
  std::vector<ArtworkRecord> records_;
  std::map<std::string, Split> splits_;
  std::map<std::string, std::size_t> index_;
};

/// Collects every invariant violation of the given data (empty when valid).
std::vector<std::string> validate_records(
    const std::vector<ArtworkRecord>& records,
    const std::map<std::string, Split>& split_assignment);

/// Parses corpus JSON text. All strings are NFC-normalized.
/// Throws ParseError (with line/column or field path) or ValidationError.
Corpus parse_corpus(std::string_view json_text);

/// Reads and parses a corpus file. Throws FileNotFound, ParseError,
/// ValidationError. `split_file`, when given, replaces the in-file splits.
Corpus load_corpus(const std::filesystem::path& path,
                   const std::optional<std::filesystem::path>& split_file = {});

/// Reads a standalone split file: `{id: "train"|"val"|"test"}`.
std::map<std::string, Split> load_split_file(const std::filesystem::path& path);

/// Canonical JSON serialization (sorted keys). `indent < 0` is compact.
std::string serialize_corpus(const Corpus& corpus, int indent = 2);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// SHA-256 of the compact canonical serialization.
std::string corpus_digest(const Corpus& corpus);

/// Visual sentences, contextual sentences, or visual followed by contextual.
std::vector<std::string> reference_set(const Corpus& corpus,
                                       const std::string& artwork_id,
                                       DescriptionKind kind);

struct EvalQuestion {
  std::string artwork_id;
  QaPair qa;
};

/// Test-split questions of the requested kinds in record order, then
/// question order. Throws PreconditionError when `kinds` is empty.
std::vector<EvalQuestion> eval_questions(const Corpus& corpus,
                                         const std::set<QaKind>& kinds);

}  // namespace artqa
