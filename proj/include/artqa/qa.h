/// @file qa.h
/// @brief Extractive question answering over a generated description.
///
/// Two backends sit behind one contract: a deterministic IDF-weighted lexical
/// span extractor, and an adapter to a remote extractive-QA service
/// (e.g. a SQuAD-tuned transformer).
///
/// All offsets are Unicode code point indices into the context.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artqa/metrics.h"

namespace artqa::qa {

enum class QaBackendKind { kLexical, kRemote };

std::string_view to_string(QaBackendKind kind);
std::optional<QaBackendKind> parse_qa_backend(std::string_view text);

struct AnswerSpan {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  double score = 0.0;
  std::size_t sentence_index = 0;

  bool operator==(const AnswerSpan&) const = default;
};

/// Lowercase, punctuation to spaces, drop a/an/the, split on whitespace.
std::vector<std::string> normalize_answer(std::string_view text);

struct Sentence {
  std::string text;
  std::size_t char_start = 0;
};

/// Splits on '.', '!' or '?' followed by whitespace or end of text.
/// Closing quotes/brackets after the terminator stay with the sentence.
/// "St.", "Mr.", "Mrs.", "Dr.", "c.", "ca." and "no." do not end a sentence.
/// Sentences exclude surrounding whitespace; everything between them is
/// whitespace.
std::vector<Sentence> split_sentences(std::string_view context);

/// Question type recognised by the answer-typing rules.
enum class AnswerType { kWho, kWhen, kHowMany, kColor, kOther };

AnswerType classify_question(std::string_view question);

/// Deterministic span extractor:
///  1. score sentences by the summed IDF of distinct content tokens they
///     share with the question (earliest sentence wins ties);
///  2. type the answer inside the winning sentence from the question's
///     leading words;
///  3. fall back to the whole sentence.
/// Throws EmptyContext.
AnswerSpan extract_answer_lexical(std::string_view context,
                                  std::string_view question,
                                  const metrics::IdfTable& idf);

/// Connection settings for the remote extractive-QA service.
struct RemoteQaConfig {
  std::string base_url;  // POST <base_url>/qa
  double timeout_s = 30.0;

  /// Reads ARTQA_QA_BASE; empty base_url when unset.
  static RemoteQaConfig from_env();
};

/// Wire response of the remote service.
struct RemoteQaReply {
  std::string text;
  long long start = 0;
  long long end = 0;
  double score = 0.0;
};

/// Posts {context, question} and parses {text, start, end, score}.
/// Throws RemoteQaUnavailable.
RemoteQaReply call_remote_qa(const RemoteQaConfig& config,
                             std::string_view context, std::string_view question);

/// Validates remote offsets against the context and builds the span from the
/// context slice. Throws SpanOutOfBounds.
AnswerSpan span_from_remote(std::string_view context, const RemoteQaReply& reply);

/// Dispatches to the lexical extractor or the remote service.
/// Throws EmptyContext, RemoteQaUnavailable, SpanOutOfBounds.
AnswerSpan answer(QaBackendKind kind, std::string_view context,
                  std::string_view question, const metrics::IdfTable& idf,
                  const RemoteQaConfig& remote = {});

}  // namespace artqa::qa
