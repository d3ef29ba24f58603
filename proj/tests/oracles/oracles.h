/// @file oracles.h
/// @brief Brute-force reference implementations of the caption metrics.
///
/// Deliberately naive and independent of the library: ASCII tokenizer,
/// explicit dense vectors over the full n-gram vocabulary, LCS by subsequence
/// enumeration. Only suitable for short inputs (<= ~14 tokens).

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline Tokens tokenize_ascii(const std::string& text) {
  Tokens out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<std::string> grams(const Tokens& t, int n) {
  std::vector<std::string> out;
  for (int i = 0; i + n <= static_cast<int>(t.size()); ++i) {
    std::string g = t[i];
    for (int k = 1; k < n; ++k) g += " " + t[i + k];
    out.push_back(g);
  }
  return out;
}

inline int count_of(const std::vector<std::string>& xs, const std::string& x) {
  return static_cast<int>(std::count(xs.begin(), xs.end(), x));
}

/// Clipped unigram precision times brevity penalty, computed word by word.
inline double bleu1(const std::string& cand, const std::vector<std::string>& refs) {
  const Tokens c = tokenize_ascii(cand);
  if (c.empty()) return 0.0;
  std::vector<Tokens> r;
  for (const auto& s : refs) r.push_back(tokenize_ascii(s));
  std::set<std::string> vocab(c.begin(), c.end());
  int clipped = 0;
  for (const auto& w : vocab) {
    int max_ref = 0;
    for (const auto& rt : r) max_ref = std::max(max_ref, count_of(rt, w));
    clipped += std::min(count_of(c, w), max_ref);
  }
  // Closest length: scan all refs, pick min |len - c|, then min len.
  int best_len = -1;
  int best_diff = 1 << 30;
  for (const auto& rt : r) {
    const int len = static_cast<int>(rt.size());
    const int diff = std::abs(len - static_cast<int>(c.size()));
    if (diff < best_diff || (diff == best_diff && len < best_len)) {
      best_diff = diff;
      best_len = len;
    }
  }
  const double p = static_cast<double>(clipped) / c.size();
  const double bp = static_cast<int>(c.size()) > best_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(best_len) / c.size());
  return bp * p;
}

inline bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i) {
    if (seq[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

/// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs_enumerate(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::uint32_t limit = 1u << a.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline double rouge_l(const std::string& cand, const std::vector<std::string>& refs,
                      double beta = 1.2) {
  const Tokens c = tokenize_ascii(cand);
  double best = 0.0;
  for (const auto& ref : refs) {
    const Tokens r = tokenize_ascii(ref);
    if (c.empty() || r.empty()) continue;
    const double l = static_cast<double>(lcs_enumerate(c, r));
    if (l == 0.0) continue;
    const double p = l / c.size();
    const double rec = l / r.size();
    best = std::max(best, (1 + beta * beta) * p * rec / (rec + beta * beta * p));
  }
  return best;
}

/// Document frequencies for n = 1..n_max over raw texts.
struct Df {
  std::size_t n_docs = 0;
  std::map<std::string, int> df;

  double idf(const std::string& g) const {
    const auto it = df.find(g);
    const int d = it == df.end() ? 1 : std::max(it->second, 1);
    return std::log(static_cast<double>(n_docs) / d);
  }
};

inline Df document_frequencies(const std::vector<std::string>& docs, int n_max) {
  Df out;
  out.n_docs = docs.size();
  for (const auto& doc : docs) {
    const Tokens t = tokenize_ascii(doc);
    for (int n = 1; n <= n_max; ++n) {
      const auto g = grams(t, n);
      for (const auto& x : std::set<std::string>(g.begin(), g.end())) ++out.df[x];
    }
  }
  return out;
}

/// Cosine over dense vectors indexed by the union vocabulary.
inline double dense_cosine(const std::vector<std::string>& ga,
                           const std::vector<std::string>& gb, const Df& df) {
  std::set<std::string> vocab(ga.begin(), ga.end());
  vocab.insert(gb.begin(), gb.end());
  std::vector<double> va;
  std::vector<double> vb;
  for (const auto& g : vocab) {
    va.push_back(count_of(ga, g) * df.idf(g));
    vb.push_back(count_of(gb, g) * df.idf(g));
  }
  double dot = 0;
  double na = 0;
  double nb = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cider(const std::string& cand, const std::vector<std::string>& refs,
                    const Df& df) {
  const Tokens c = tokenize_ascii(cand);
  double total = 0;
  for (int n = 1; n <= 4; ++n) {
    double sum = 0;
    for (const auto& ref : refs) sum += dense_cosine(grams(c, n), grams(tokenize_ascii(ref), n), df);
    total += sum / refs.size();
  }
  return total / 4;
}

inline double tfidf_cosine(const std::string& a, const std::string& b, const Df& df) {
  return dense_cosine(tokenize_ascii(a), tokenize_ascii(b), df);
}

}  // namespace oracle
