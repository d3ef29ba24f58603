#include "artqa/corpus.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "artqa/digest.h"
#include "artqa/errors.h"
#include "artqa/text.h"

namespace artqa {

using json = nlohmann::json;

std::string_view to_string(QaKind kind) {
  return kind == QaKind::kVisual ? "visual" : "contextual";
}

std::string_view to_string(DescriptionKind kind) {
  switch (kind) {
    case DescriptionKind::kVisual:
      return "visual";
    case DescriptionKind::kContextual:
      return "contextual";
    case DescriptionKind::kAll:
      return "all";
  }
  return "all";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "test";
}

std::optional<QaKind> parse_qa_kind(std::string_view text) {
  if (text == "visual") return QaKind::kVisual;
  if (text == "contextual") return QaKind::kContextual;
  return std::nullopt;
}

std::optional<DescriptionKind> parse_description_kind(std::string_view text) {
  if (text == "visual") return DescriptionKind::kVisual;
  if (text == "contextual") return DescriptionKind::kContextual;
  if (text == "all") return DescriptionKind::kAll;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

std::vector<std::string> validate_records(
    const std::vector<ArtworkRecord>& records,
    const std::map<std::string, Split>& split_assignment) {
  std::vector<std::string> violations;
  if (records.empty()) {
    violations.emplace_back("corpus has no records");
  }
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ArtworkRecord& r = records[i];
    const std::string where = "record " + std::to_string(i) +
                              (r.id.empty() ? "" : " (\"" + r.id + "\")");
    if (text::trim(r.id).empty()) {
      violations.push_back(where + ": id is empty");
    } else if (++seen[r.id] == 2) {
      violations.push_back("duplicate id \"" + r.id + "\"");
    }
    if (text::trim(r.title).empty()) {
      violations.push_back(where + ": title is empty");
    }
    for (std::size_t s = 0; s < r.visual_sentences.size(); ++s) {
      if (text::trim(r.visual_sentences[s]).empty()) {
        violations.push_back(where + ": visual sentence " + std::to_string(s) +
                             " is empty");
      }
    }
    for (std::size_t s = 0; s < r.contextual_sentences.size(); ++s) {
      if (text::trim(r.contextual_sentences[s]).empty()) {
        violations.push_back(where + ": contextual sentence " +
                             std::to_string(s) + " is empty");
      }
    }
    for (std::size_t q = 0; q < r.questions.size(); ++q) {
      const QaPair& pair = r.questions[q];
      if (text::trim(pair.question).empty()) {
        violations.push_back(where + ": question " + std::to_string(q) +
                             " has an empty question");
      }
      if (text::trim(pair.gold_answer).empty()) {
        violations.push_back(where + ": question " + std::to_string(q) +
                             " has an empty answer");
      }
    }
    if (!split_assignment.empty() && !r.id.empty() &&
        !split_assignment.contains(r.id)) {
      violations.push_back(where + ": no split assignment");
    }
  }
  for (const auto& [id, split] : split_assignment) {
    if (!seen.contains(id)) {
      violations.push_back("split assignment names unknown id \"" + id + "\"");
    }
  }
  return violations;
}

Corpus::Corpus(std::vector<ArtworkRecord> records,
               std::map<std::string, Split> split_assignment)
    : records_(std::move(records)), splits_(std::move(split_assignment)) {
  auto violations = validate_records(records_, splits_);
  if (!violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    index_.emplace(records_[i].id, i);
  }
}

Split Corpus::split_of(const std::string& id) const {
  if (splits_.empty()) return Split::kTest;
  const auto it = splits_.find(id);
  if (it == splits_.end()) throw UnknownArtwork("unknown artwork \"" + id + "\"");
  return it->second;
}

const ArtworkRecord& Corpus::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw UnknownArtwork("unknown artwork \"" + id + "\"");
  }
  return records_[it->second];
}

bool Corpus::contains(const std::string& id) const {
  return index_.contains(id);
}

std::vector<const ArtworkRecord*> Corpus::test_records() const {
  std::vector<const ArtworkRecord*> out;
  for (const auto& r : records_) {
    if (split_of(r.id) == Split::kTest) out.push_back(&r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

const json& require(const json& object, const char* key,
                    const std::string& path) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(std::string("missing field \"") + key + "\"", path);
  }
  return *it;
}

std::string string_at(const json& value, const std::string& path) {
  if (!value.is_string()) {
    throw ParseError("expected string", path);
  }
  return text::nfc(value.get_ref<const std::string&>());
}

std::vector<std::string> strings_at(const json& value, const std::string& path) {
  if (!value.is_array()) {
    throw ParseError("expected array of strings", path);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(string_at(value[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::map<std::string, Split> splits_at(const json& value,
                                       const std::string& path) {
  if (!value.is_object()) {
    throw ParseError("expected object mapping id to split", path);
  }
  std::map<std::string, Split> out;
  for (const auto& [id, split] : value.items()) {
    const std::string item_path = path + "/" + id;
    const auto parsed = parse_split(string_at(split, item_path));
    if (!parsed) {
      throw ParseError("split must be one of train, val, test", item_path);
    }
    out.emplace(text::nfc(id), *parsed);
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

std::string read_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw FileNotFound("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileNotFound("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Corpus parse_corpus(std::string_view json_text) {
  const json root = parse_json(json_text);
  if (!root.is_object()) {
    throw ParseError("top level must be an object", "/");
  }
  const json& records_json = require(root, "records", "");
  if (!records_json.is_array()) {
    throw ParseError("expected array", "/records");
  }

  std::vector<ArtworkRecord> records;
  records.reserve(records_json.size());
  for (std::size_t i = 0; i < records_json.size(); ++i) {
    const std::string path = "/records/" + std::to_string(i);
    const json& item = records_json[i];
    if (!item.is_object()) throw ParseError("expected object", path);

    ArtworkRecord record;
    record.id = string_at(require(item, "id", path), path + "/id");
    record.title = string_at(require(item, "title", path), path + "/title");
    record.visual_sentences =
        strings_at(require(item, "visual_sentences", path),
                   path + "/visual_sentences");
    record.contextual_sentences =
        strings_at(require(item, "contextual_sentences", path),
                   path + "/contextual_sentences");
    if (item.contains("questions")) {
      const json& questions = item["questions"];
      if (!questions.is_array()) {
        throw ParseError("expected array", path + "/questions");
      }
      for (std::size_t q = 0; q < questions.size(); ++q) {
        const std::string qpath = path + "/questions/" + std::to_string(q);
        const json& qa = questions[q];
        if (!qa.is_object()) throw ParseError("expected object", qpath);
        QaPair pair;
        pair.question =
            string_at(require(qa, "question", qpath), qpath + "/question");
        pair.gold_answer =
            string_at(require(qa, "answer", qpath), qpath + "/answer");
        const auto kind =
            parse_qa_kind(string_at(require(qa, "kind", qpath), qpath + "/kind"));
        if (!kind) {
          throw ParseError("kind must be \"visual\" or \"contextual\"",
                           qpath + "/kind");
        }
        pair.kind = *kind;
        record.questions.push_back(std::move(pair));
      }
    }
    records.push_back(std::move(record));
  }

  std::map<std::string, Split> splits;
  if (root.contains("splits") && !root["splits"].is_null()) {
    splits = splits_at(root["splits"], "/splits");
  }
  return Corpus(std::move(records), std::move(splits));
}

std::map<std::string, Split> load_split_file(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  return splits_at(parse_json(content), "");
}

Corpus load_corpus(const std::filesystem::path& path,
                   const std::optional<std::filesystem::path>& split_file) {
  Corpus corpus = parse_corpus(read_file(path));
  if (!split_file) return corpus;
  auto records = corpus.records();
  return Corpus(std::move(records), load_split_file(*split_file));
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize_corpus(const Corpus& corpus, int indent) {
  json records = json::array();
  for (const auto& r : corpus.records()) {
    json questions = json::array();
    for (const auto& q : r.questions) {
      questions.push_back({{"question", q.question},
                           {"answer", q.gold_answer},
                           {"kind", std::string(to_string(q.kind))}});
    }
    records.push_back({{"id", r.id},
                       {"title", r.title},
                       {"visual_sentences", r.visual_sentences},
                       {"contextual_sentences", r.contextual_sentences},
                       {"questions", std::move(questions)}});
  }
  json root = {{"records", std::move(records)}};
  if (!corpus.split_assignment().empty()) {
    json splits = json::object();
    for (const auto& [id, split] : corpus.split_assignment()) {
      splits[id] = std::string(to_string(split));
    }
    root["splits"] = std::move(splits);
  }
  return root.dump(indent < 0 ? -1 : indent);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_corpus(corpus) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::string corpus_digest(const Corpus& corpus) {
  return sha256_hex(serialize_corpus(corpus, -1));
}

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

std::vector<std::string> reference_set(const Corpus& corpus,
                                       const std::string& artwork_id,
                                       DescriptionKind kind) {
  const ArtworkRecord& record = corpus.find(artwork_id);
  switch (kind) {
    case DescriptionKind::kVisual:
      return record.visual_sentences;
    case DescriptionKind::kContextual:
      return record.contextual_sentences;
    case DescriptionKind::kAll: {
      std::vector<std::string> out = record.visual_sentences;
      out.insert(out.end(), record.contextual_sentences.begin(),
                 record.contextual_sentences.end());
      return out;
    }
  }
  return {};
}

std::vector<EvalQuestion> eval_questions(const Corpus& corpus,
                                         const std::set<QaKind>& kinds) {
  if (kinds.empty()) {
    throw PreconditionError("eval_questions requires at least one kind");
  }
  std::vector<EvalQuestion> out;
  for (const ArtworkRecord* record : corpus.test_records()) {
    for (const QaPair& pair : record->questions) {
      if (kinds.contains(pair.kind)) {
        out.push_back({record->id, pair});
      }
    }
  }
  return out;
}

}  // namespace artqa
