#include "artqa/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "artqa/errors.h"
#include "artqa/qa.h"
#include "artqa/text.h"

namespace artqa::metrics {

Tokens tokenize(std::string_view text) {
  Tokens out;
  for (auto& token : text::word_tokens(text)) {
    out.push_back(std::move(token.lower));
  }
  return out;
}

NgramCounts ngrams(const Tokens& tokens, int n) {
  if (n < 1) throw BadN("n-gram order must be >= 1, got " + std::to_string(n));
  NgramCounts counts;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      gram += ' ';
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// IDF
// ---------------------------------------------------------------------------

IdfTable::IdfTable(std::size_t doc_count, int max_order,
                   std::unordered_map<std::string, std::size_t> df)
    : doc_count_(doc_count), max_order_(max_order), df_(std::move(df)) {}

std::size_t IdfTable::df(const std::string& ngram) const {
  const auto it = df_.find(ngram);
  return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(const std::string& ngram) const {
  const std::size_t count = std::max<std::size_t>(df(ngram), 1);
  return std::log(static_cast<double>(doc_count_) / static_cast<double>(count));
}

IdfTable compute_idf(const std::vector<Tokens>& documents, int n_max) {
  if (documents.empty()) throw EmptyCorpus("IDF requires at least one document");
  if (n_max < 1) throw BadN("n_max must be >= 1");
  std::unordered_map<std::string, std::size_t> df;
  for (const Tokens& doc : documents) {
    for (int n = 1; n <= n_max; ++n) {
      for (const auto& [gram, count] : ngrams(doc, n)) {
        ++df[gram];
      }
    }
  }
  return IdfTable(documents.size(), n_max, std::move(df));
}

IdfTable compute_idf_from_text(const std::vector<std::string>& documents,
                               int n_max) {
  std::vector<Tokens> tokenized;
  tokenized.reserve(documents.size());
  for (const auto& doc : documents) tokenized.push_back(tokenize(doc));
  return compute_idf(tokenized, n_max);
}

// ---------------------------------------------------------------------------
// Caption metrics
// ---------------------------------------------------------------------------

namespace {

std::vector<Tokens> tokenize_references(const std::vector<std::string>& references) {
  if (references.empty()) throw NoReferences("no references supplied");
  std::vector<Tokens> out;
  out.reserve(references.size());
  bool any_nonempty = false;
  for (const auto& ref : references) {
    out.push_back(tokenize(ref));
    any_nonempty = any_nonempty || !out.back().empty();
  }
  if (!any_nonempty) throw NoReferences("all references are empty");
  return out;
}

using WeightVector = std::map<std::string, double>;

WeightVector tfidf_vector(const Tokens& tokens, int n, const IdfTable& idf) {
  WeightVector out;
  for (const auto& [gram, count] : ngrams(tokens, n)) {
    const double weight = static_cast<double>(count) * idf.idf(gram);
    if (weight != 0.0) out.emplace(gram, weight);
  }
  return out;
}

double cosine(const WeightVector& a, const WeightVector& b) {
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (const auto& [key, weight] : a) {
    norm_a += weight * weight;
    const auto it = b.find(key);
    if (it != b.end()) dot += weight * it->second;
  }
  for (const auto& [key, weight] : b) norm_b += weight * weight;
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  if (&a == &b || a == b) return 1.0;
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), 0.0, 1.0);
}

void require_idf(const IdfTable& idf, int order) {
  if (idf.empty()) throw MissingIdf("IDF table is empty");
  if (idf.max_order() < order) {
    throw MissingIdf("IDF table covers n-grams up to " +
                     std::to_string(idf.max_order()) + ", need " +
                     std::to_string(order));
  }
}

}  // namespace

double bleu1(std::string_view candidate, const std::vector<std::string>& references) {
  const std::vector<Tokens> refs = tokenize_references(references);
  const Tokens cand = tokenize(candidate);
  if (cand.empty()) return 0.0;

  std::map<std::string, std::size_t> max_ref_counts;
  for (const Tokens& ref : refs) {
    for (const auto& [word, count] : ngrams(ref, 1)) {
      auto& slot = max_ref_counts[word];
      slot = std::max(slot, count);
    }
  }
  std::size_t clipped = 0;
  for (const auto& [word, count] : ngrams(cand, 1)) {
    const auto it = max_ref_counts.find(word);
    if (it != max_ref_counts.end()) clipped += std::min(count, it->second);
  }
  const double c = static_cast<double>(cand.size());
  const double precision = static_cast<double>(clipped) / c;

  // Closest reference length; ties go to the shorter one.
  std::size_t closest = refs.front().size();
  for (const Tokens& ref : refs) {
    const auto diff = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (diff(ref.size()) < diff(closest) ||
        (diff(ref.size()) == diff(closest) && ref.size() < closest)) {
      closest = ref.size();
    }
  }
  const double r = static_cast<double>(closest);
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return brevity * precision;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate, const std::vector<std::string>& references) {
  if (references.empty()) throw NoReferences("no references supplied");
  const Tokens cand = tokenize(candidate);
  constexpr double beta2 = kRougeBeta * kRougeBeta;
  double best = 0.0;
  for (const auto& reference : references) {
    const Tokens ref = tokenize(reference);
    if (cand.empty() || ref.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double f = (1.0 + beta2) * p * r / (r + beta2 * p);
    best = std::max(best, f);
  }
  return best;
}

double cider(std::string_view candidate, const std::vector<std::string>& references,
             const IdfTable& idf) {
  const std::vector<Tokens> refs = tokenize_references(references);
  require_idf(idf, kCiderMaxOrder);
  const Tokens cand = tokenize(candidate);
  double total = 0.0;
  for (int n = 1; n <= kCiderMaxOrder; ++n) {
    const WeightVector cand_vec = tfidf_vector(cand, n, idf);
    double sum = 0.0;
    for (const Tokens& ref : refs) {
      sum += cosine(cand_vec, tfidf_vector(ref, n, idf));
    }
    total += sum / static_cast<double>(refs.size());
  }
  return total / kCiderMaxOrder;
}

double tfidf_cosine(std::string_view candidate, std::string_view reference_doc,
                    const IdfTable& idf) {
  require_idf(idf, 1);
  return cosine(tfidf_vector(tokenize(candidate), 1, idf),
                tfidf_vector(tokenize(reference_doc), 1, idf));
}

// ---------------------------------------------------------------------------
// QA metrics
// ---------------------------------------------------------------------------

TokenOverlap qa_f1(std::string_view predicted, std::string_view gold) {
  const Tokens pred_tokens = qa::normalize_answer(predicted);
  const Tokens gold_tokens = qa::normalize_answer(gold);

  std::map<std::string, std::size_t> gold_counts;
  for (const auto& t : gold_tokens) ++gold_counts[t];
  std::size_t common = 0;
  for (const auto& t : pred_tokens) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }

  TokenOverlap out;
  out.common = common;
  out.predicted = pred_tokens.size();
  out.gold = gold_tokens.size();
  if (out.predicted > 0) {
    out.precision = static_cast<double>(common) / static_cast<double>(out.predicted);
  }
  if (out.gold > 0) {
    out.recall = static_cast<double>(common) / static_cast<double>(out.gold);
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

bool exact_match(std::string_view predicted, std::string_view gold) {
  return qa::normalize_answer(predicted) == qa::normalize_answer(gold);
}

double accuracy(const std::vector<std::string>& predictions,
                const std::vector<std::string>& golds) {
  const QaScore score = score_batch(predictions, golds);
  return static_cast<double>(score.n_correct) / static_cast<double>(score.n_total);
}

QaScore score_batch(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size()) {
    throw LengthMismatch("predictions and golds differ in length (" +
                         std::to_string(predictions.size()) + " vs " +
                         std::to_string(golds.size()) + ")");
  }
  if (predictions.empty()) throw EmptyBatch("empty prediction batch");
  QaScore score;
  score.n_total = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (exact_match(predictions[i], golds[i])) ++score.n_correct;
    const TokenOverlap overlap = qa_f1(predictions[i], golds[i]);
    score.precision += overlap.precision;
    score.recall += overlap.recall;
    score.f1 += overlap.f1;
  }
  const auto n = static_cast<double>(score.n_total);
  score.precision /= n;
  score.recall /= n;
  score.f1 /= n;
  return score;
}

}  // namespace artqa::metrics
