#include "artqa/qa.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "artqa/errors.h"
#include "artqa/lexicon.h"
#include "artqa/text.h"

namespace artqa::qa {

std::string_view to_string(QaBackendKind kind) {
  return kind == QaBackendKind::kLexical ? "lexical" : "remote";
}

std::optional<QaBackendKind> parse_qa_backend(std::string_view text) {
  if (text == "lexical") return QaBackendKind::kLexical;
  if (text == "remote") return QaBackendKind::kRemote;
  return std::nullopt;
}

std::vector<std::string> normalize_answer(std::string_view text) {
  const std::string cleaned =
      text::punctuation_to_space(text::lowercase(text::nfc(text)));
  std::vector<std::string> out;
  for (auto& word : text::split_whitespace(cleaned)) {
    if (word == "a" || word == "an" || word == "the") continue;
    out.push_back(std::move(word));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sentence splitting
// ---------------------------------------------------------------------------

namespace {

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

bool is_terminator(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

bool is_closer(char32_t cp) {
  switch (cp) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'”':  // right double quotation mark
    case U'’':  // right single quotation mark
    case U'»':  // right-pointing guillemet
      return true;
    default:
      return false;
  }
}

bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// True when the word ending right before the '.' at `dot` is an abbreviation.
bool abbreviation_before(std::string_view context, std::size_t dot) {
  static const std::unordered_set<std::string_view> kAbbreviations = {
      "St", "Mr", "Mrs", "Dr", "c", "ca", "no"};
  std::size_t begin = dot;
  while (begin > 0 && is_ascii_letter(static_cast<unsigned char>(context[begin - 1]))) {
    --begin;
  }
  if (begin == dot) return false;
  if (begin > 0 && static_cast<unsigned char>(context[begin - 1]) >= 0x80) {
    return false;  // word continues with a non-ASCII letter
  }
  return kAbbreviations.contains(context.substr(begin, dot - begin));
}

std::vector<ByteRange> sentence_ranges(std::string_view context) {
  std::vector<ByteRange> out;
  const std::size_t n = context.size();
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  while (pos < n) {
    const std::size_t cp_begin = pos;
    const char32_t cp = text::next_codepoint(context, pos);
    if (start == std::string_view::npos) {
      if (text::is_whitespace(cp)) continue;
      start = cp_begin;
    }
    if (!is_terminator(cp)) continue;

    std::size_t end = pos;
    while (end < n) {
      std::size_t probe = end;
      const char32_t next = text::next_codepoint(context, probe);
      if (!is_terminator(next) && !is_closer(next)) break;
      end = probe;
    }
    bool boundary = end == n;
    if (!boundary) {
      std::size_t probe = end;
      boundary = text::is_whitespace(text::next_codepoint(context, probe));
    }
    const bool single_dot = cp == U'.' && end == pos;
    if (boundary && !(single_dot && abbreviation_before(context, cp_begin))) {
      out.push_back({start, end});
      start = std::string_view::npos;
    }
    pos = end;
  }
  if (start != std::string_view::npos) {
    const std::string_view tail = text::trim(context.substr(start));
    out.push_back({start, start + tail.size()});
  }
  return out;
}

}  // namespace

std::vector<Sentence> split_sentences(std::string_view context) {
  std::vector<Sentence> out;
  for (const ByteRange& range : sentence_ranges(context)) {
    out.push_back({std::string(context.substr(range.begin, range.end - range.begin)),
                   text::codepoint_offset(context, range.begin)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Question typing
// ---------------------------------------------------------------------------

AnswerType classify_question(std::string_view question) {
  std::vector<std::string> words;
  for (auto& token : text::word_tokens(question)) words.push_back(token.lower);
  const auto at = [&](std::size_t i) -> std::string_view {
    return i < words.size() ? std::string_view(words[i]) : std::string_view{};
  };
  const auto is_what = [](std::string_view w) { return w == "what" || w == "which"; };
  const auto is_color = [](std::string_view w) {
    return w == "color" || w == "colors" || w == "colour" || w == "colours";
  };

  if (at(0) == "who" || at(0) == "whom") return AnswerType::kWho;
  if (at(0) == "when") return AnswerType::kWhen;
  if (is_what(at(0)) && at(1) == "year") return AnswerType::kWhen;
  if (at(0) == "in" && is_what(at(1)) && at(2) == "year") return AnswerType::kWhen;
  if (at(0) == "how" && at(1) == "many") return AnswerType::kHowMany;
  if (is_what(at(0)) && is_color(at(1))) return AnswerType::kColor;
  return AnswerType::kOther;
}

// ---------------------------------------------------------------------------
// Lexical extraction
// ---------------------------------------------------------------------------

namespace {

// Matching key: drops a plural "s" so "hang" meets "hangs".
std::string fold(const std::string& token) {
  if (token.size() > 3 && token.back() == 's') {
    const std::string_view tail = std::string_view(token).substr(token.size() - 2);
    if (tail != "ss" && tail != "us" && tail != "is") {
      return token.substr(0, token.size() - 1);
    }
  }
  return token;
}

class SentenceTyper {
 public:
  SentenceTyper(std::string_view sentence, std::string_view question)
      : sentence_(sentence), tokens_(text::word_tokens(sentence)) {
    for (const auto& token : text::word_tokens(question)) {
      question_words_.insert(token.lower);
    }
  }

  std::optional<ByteRange> extract(AnswerType type) const {
    switch (type) {
      case AnswerType::kWho:
        return proper_name();
      case AnswerType::kWhen:
        return date();
      case AnswerType::kHowMany:
        return cardinal();
      case AnswerType::kColor:
        return color();
      case AnswerType::kOther:
        return trimmed();
    }
    return std::nullopt;
  }

 private:
  // Bytes between token i and token i+1 consist only of the allowed chars.
  bool gap_is(std::size_t i, std::u32string_view allowed) const {
    std::size_t pos = tokens_[i].end;
    const std::size_t stop = tokens_[i + 1].begin;
    while (pos < stop) {
      const char32_t cp = text::next_codepoint(sentence_, pos);
      if (text::is_whitespace(cp)) continue;
      if (allowed.find(cp) == std::u32string_view::npos) return false;
    }
    return true;
  }

  bool gap_is_space(std::size_t i) const { return gap_is(i, U""); }

  ByteRange range(std::size_t first, std::size_t last) const {
    return {tokens_[first].begin, tokens_[last].end};
  }

  // Longest run of capitalized tokens absent from the question.
  std::optional<ByteRange> proper_name() const {
    const auto& stop = lexicon::stopwords();
    const auto& particles = lexicon::name_particles();
    const auto eligible = [&](std::size_t i) {
      const auto& t = tokens_[i];
      return t.capitalized && !question_words_.contains(t.lower) &&
             !stop.contains(t.lower);
    };
    constexpr std::u32string_view kNameGap = U"-.'’";

    std::optional<ByteRange> best;
    std::size_t best_len = 0;
    std::size_t i = 0;
    while (i < tokens_.size()) {
      if (!eligible(i)) {
        ++i;
        continue;
      }
      std::size_t last = i;
      while (last + 1 < tokens_.size()) {
        const std::size_t next = last + 1;
        if (eligible(next) && gap_is(last, kNameGap)) {
          last = next;
        } else if (!tokens_[next].capitalized &&
                   particles.contains(tokens_[next].lower) &&
                   next + 1 < tokens_.size() && eligible(next + 1) &&
                   gap_is_space(last) && gap_is_space(next)) {
          last = next + 1;
        } else {
          break;
        }
      }
      const std::size_t len = last - i + 1;
      if (len > best_len) {
        best_len = len;
        best = range(i, last);
      }
      i = last + 1;
    }
    return best;
  }

  // Earliest of: a month-name phrase, or a 3-4 digit number.
  std::optional<ByteRange> date() const {
    const auto& months = lexicon::months();
    const auto short_number = [&](std::size_t i) {
      return tokens_[i].numeric && tokens_[i].lower.size() <= 2;
    };
    const auto year = [&](std::size_t i) {
      return tokens_[i].numeric && tokens_[i].lower.size() >= 3 &&
             tokens_[i].lower.size() <= 4;
    };
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (year(i)) return range(i, i);
      if (!tokens_[i].capitalized || !months.contains(tokens_[i].lower)) continue;
      std::size_t first = i;
      std::size_t last = i;
      if (i > 0 && short_number(i - 1) && gap_is_space(i - 1)) first = i - 1;
      if (last + 1 < tokens_.size() && short_number(last + 1) && gap_is_space(last)) {
        ++last;
      }
      if (last + 1 < tokens_.size() && year(last + 1) && gap_is(last, U",")) {
        ++last;
      }
      return range(first, last);
    }
    return std::nullopt;
  }

  std::optional<ByteRange> cardinal() const {
    const auto& words = lexicon::number_words();
    const auto is_number = [&](std::size_t i) {
      return tokens_[i].numeric || words.contains(tokens_[i].lower);
    };
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!is_number(i)) continue;
      std::size_t last = i;
      while (last + 1 < tokens_.size()) {
        const bool digit_group = tokens_[last].numeric && tokens_[last + 1].numeric &&
                                 tokens_[last].end + 1 == tokens_[last + 1].begin &&
                                 gap_is(last, U",.");
        const bool word_group = !tokens_[last].numeric && !tokens_[last + 1].numeric &&
                                is_number(last + 1) && gap_is(last, U"-");
        if (!digit_group && !word_group) break;
        ++last;
      }
      return range(i, last);
    }
    return std::nullopt;
  }

  std::optional<ByteRange> color() const {
    const auto& colors = lexicon::colors();
    const auto is_color = [&](std::size_t i) { return colors.contains(tokens_[i].lower); };
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!is_color(i)) continue;
      std::size_t last = i;
      while (last + 1 < tokens_.size()) {
        const std::size_t next = last + 1;
        if (is_color(next) && gap_is(last, U",")) {
          last = next;
        } else if ((tokens_[next].lower == "and" || tokens_[next].lower == "or") &&
                   next + 1 < tokens_.size() && is_color(next + 1) &&
                   gap_is(last, U",") && gap_is_space(next)) {
          last = next + 1;
        } else {
          break;
        }
      }
      return range(i, last);
    }
    return std::nullopt;
  }

  // Sentence with question words trimmed from its head and tail.
  std::optional<ByteRange> trimmed() const {
    std::size_t first = 0;
    std::size_t end = tokens_.size();
    while (first < end && question_words_.contains(tokens_[first].lower)) ++first;
    while (end > first && question_words_.contains(tokens_[end - 1].lower)) --end;
    if (first == end) return std::nullopt;
    return range(first, end - 1);
  }

  std::string_view sentence_;
  std::vector<text::WordToken> tokens_;
  std::unordered_set<std::string> question_words_;
};

}  // namespace

AnswerSpan extract_answer_lexical(std::string_view context, std::string_view question,
                                  const metrics::IdfTable& idf) {
  const std::vector<ByteRange> sentences = sentence_ranges(context);
  if (sentences.empty()) throw EmptyContext("context is empty");

  const auto& stop = lexicon::stopwords();
  std::map<std::string, std::string> question_keys;  // key -> surface token
  for (const auto& token : normalize_answer(question)) {
    if (stop.contains(token)) continue;
    question_keys.emplace(fold(token), token);
  }

  std::size_t best_index = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const std::string_view sentence =
        context.substr(sentences[i].begin, sentences[i].end - sentences[i].begin);
    std::set<std::string> keys;
    for (const auto& token : normalize_answer(sentence)) keys.insert(fold(token));
    double score = 0.0;
    for (const auto& [key, surface] : question_keys) {
      if (keys.contains(key)) score += idf.idf(surface);
    }
    if (score > best_score) {
      best_score = score;
      best_index = i;
    }
  }

  const ByteRange winner = sentences[best_index];
  const std::string_view sentence =
      context.substr(winner.begin, winner.end - winner.begin);
  ByteRange span{winner.begin, winner.end};
  if (const auto typed = SentenceTyper(sentence, question).extract(
          classify_question(question))) {
    span = {winner.begin + typed->begin, winner.begin + typed->end};
  }

  AnswerSpan out;
  out.text = std::string(context.substr(span.begin, span.end - span.begin));
  out.char_start = text::codepoint_offset(context, span.begin);
  out.char_end = out.char_start + text::codepoint_count(out.text);
  out.score = best_score;
  out.sentence_index = best_index;
  return out;
}

// ---------------------------------------------------------------------------
// Remote adapter
// ---------------------------------------------------------------------------

AnswerSpan span_from_remote(std::string_view context, const RemoteQaReply& reply) {
  const auto length = static_cast<long long>(text::codepoint_count(context));
  if (reply.start < 0 || reply.end <= reply.start || reply.end > length) {
    throw SpanOutOfBounds("remote QA returned span [" + std::to_string(reply.start) +
                          ", " + std::to_string(reply.end) +
                          ") outside context of length " + std::to_string(length));
  }
  if (!std::isfinite(reply.score)) {
    throw SpanOutOfBounds("remote QA returned a non-finite score");
  }
  AnswerSpan out;
  out.char_start = static_cast<std::size_t>(reply.start);
  out.char_end = static_cast<std::size_t>(reply.end);
  out.text = text::slice_codepoints(context, out.char_start, out.char_end);
  out.score = reply.score;
  const std::vector<Sentence> sentences = split_sentences(context);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].char_start <= out.char_start) out.sentence_index = i;
  }
  return out;
}

AnswerSpan answer(QaBackendKind kind, std::string_view context,
                  std::string_view question, const metrics::IdfTable& idf,
                  const RemoteQaConfig& remote) {
  if (kind == QaBackendKind::kLexical) {
    return extract_answer_lexical(context, question, idf);
  }
  if (text::trim(context).empty()) throw EmptyContext("context is empty");
  return span_from_remote(context, call_remote_qa(remote, context, question));
}

}  // namespace artqa::qa
