/// @file metrics.h
/// @brief Caption metrics (BLEU1, ROUGE-L, CIDEr, TF-IDF cosine) and QA
/// metrics (exact-match accuracy, token precision/recall/F1).
///
/// Conventions:
///  - ROUGE is ROUGE-L F-measure with beta = 1.2.
///  - CIDEr is the plain formulation: mean over n = 1..4 of the average
///    cosine between TF-IDF n-gram vectors; no x10 scaling, no length
///    penalty. All scores lie in [0, 1].
///  - Accuracy counts normalized exact matches.
///  - "Common words" for QA F1 is a multiset intersection.

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace artqa::metrics {

using Tokens = std::vector<std::string>;

/// An n-gram is its tokens joined by single spaces.
using NgramCounts = std::map<std::string, std::size_t>;

/// Lowercase, split on anything that is not a letter or digit.
Tokens tokenize(std::string_view text);

/// Contiguous n-grams with multiplicity. Throws BadN when n < 1.
NgramCounts ngrams(const Tokens& tokens, int n);

/// Inverse document frequencies over n-grams of order 1..max_order.
/// idf(t) = ln(N / df(t)); terms never seen take df = 1.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::size_t doc_count, int max_order,
           std::unordered_map<std::string, std::size_t> df);

  std::size_t doc_count() const noexcept { return doc_count_; }
  int max_order() const noexcept { return max_order_; }
  bool empty() const noexcept { return doc_count_ == 0; }

  std::size_t df(const std::string& ngram) const;
  double idf(const std::string& ngram) const;

 private:
  std::size_t doc_count_ = 0;
  int max_order_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

/// Document frequencies (presence per document) for orders 1..n_max.
/// Throws EmptyCorpus when `documents` is empty, BadN when n_max < 1.
IdfTable compute_idf(const std::vector<Tokens>& documents, int n_max);

/// Convenience: tokenizes each document first.
IdfTable compute_idf_from_text(const std::vector<std::string>& documents,
                               int n_max);

/// Clipped unigram precision times brevity penalty.
/// Throws NoReferences when every reference is empty after tokenization.
double bleu1(std::string_view candidate, const std::vector<std::string>& references);

/// Longest common subsequence length (token-level DP).
std::size_t lcs_length(const Tokens& a, const Tokens& b);

inline constexpr double kRougeBeta = 1.2;

/// ROUGE-L F-measure, maximum over references. Throws NoReferences.
double rouge_l(std::string_view candidate, const std::vector<std::string>& references);

inline constexpr int kCiderMaxOrder = 4;

/// Plain CIDEr. Throws NoReferences; MissingIdf when the table is empty or
/// built with fewer than four n-gram orders.
double cider(std::string_view candidate, const std::vector<std::string>& references,
             const IdfTable& idf);

/// Cosine between unigram TF-IDF vectors. Throws MissingIdf.
double tfidf_cosine(std::string_view candidate, std::string_view reference_doc,
                    const IdfTable& idf);

struct QaScore {
  std::size_t n_correct = 0;  // N_c
  std::size_t n_total = 0;    // N_a
  double precision = 0.0;     // N_Cw / |ans|
  double recall = 0.0;        // N_Cw / |gt|
  double f1 = 0.0;
};

struct TokenOverlap {
  std::size_t common = 0;  // N_Cw
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Token-level precision/recall/F1 over normalized answers.
TokenOverlap qa_f1(std::string_view predicted, std::string_view gold);

/// Normalized exact match.
bool exact_match(std::string_view predicted, std::string_view gold);

/// N_c / N_a. Throws LengthMismatch, EmptyBatch.
double accuracy(const std::vector<std::string>& predictions,
                const std::vector<std::string>& golds);

/// Accuracy plus mean precision/recall/F1 over the batch.
QaScore score_batch(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& golds);

}  // namespace artqa::metrics
