#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pagerec/error.hpp"

namespace pagerec {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline Prf prf_from_counts(long correct, long n_hyp, long n_ref) {
  Prf r;
  r.precision = n_hyp > 0 ? double(correct) / double(n_hyp) : 0.0;
  r.recall = n_ref > 0 ? double(correct) / double(n_ref) : 0.0;
  r.f = (r.precision + r.recall) > 0.0
            ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
            : 0.0;
  return r;
}

struct DetectionCounts {
  long correct = 0;
  long n_hyp = 0;
  long n_ref = 0;

  DetectionCounts& operator+=(const DetectionCounts& o) {
    correct += o.correct;
    n_hyp += o.n_hyp;
    n_ref += o.n_ref;
    return *this;
  }
};

// Greedy one-to-one matching by ascending Euclidean distance over the K
// coordinates; a matched pair counts as correct iff every coordinate differs
// by strictly less than the acceptance radius (a proportion of page width).
inline DetectionCounts detection_counts(
    const std::vector<std::array<double, 4>>& hyps,
    const std::vector<std::array<double, 4>>& refs, int k, double zone) {
  if (k < 2 || k > 4) throw ConfigError("detection metric: k must be 2, 3 or 4");
  if (zone <= 0.0) throw ConfigError("detection metric: acceptance zone must be > 0");

  DetectionCounts c;
  c.n_hyp = long(hyps.size());
  c.n_ref = long(refs.size());

  struct Pair {
    double d2;
    int ref, hyp;
  };
  std::vector<Pair> pairs;
  pairs.reserve(hyps.size() * refs.size());
  for (int r = 0; r < int(refs.size()); ++r)
    for (int h = 0; h < int(hyps.size()); ++h) {
      double d2 = 0.0;
      for (int i = 0; i < k; ++i) {
        const double d = refs[size_t(r)][size_t(i)] - hyps[size_t(h)][size_t(i)];
        d2 += d * d;
      }
      pairs.push_back({d2, r, h});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.ref != b.ref) return a.ref < b.ref;
    return a.hyp < b.hyp;
  });

  std::vector<char> ref_used(refs.size(), 0), hyp_used(hyps.size(), 0);
  for (const auto& p : pairs) {
    if (ref_used[size_t(p.ref)] || hyp_used[size_t(p.hyp)]) continue;
    ref_used[size_t(p.ref)] = 1;
    hyp_used[size_t(p.hyp)] = 1;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      ok = std::fabs(refs[size_t(p.ref)][size_t(i)] -
                     hyps[size_t(p.hyp)][size_t(i)]) < zone;
    if (ok) ++c.correct;
  }
  return c;
}

inline Prf detection_fmeasure(const std::vector<std::array<double, 4>>& hyps,
                              const std::vector<std::array<double, 4>>& refs,
                              int k, double zone) {
  const auto c = detection_counts(hyps, refs, k, zone);
  return prf_from_counts(c.correct, c.n_hyp, c.n_ref);
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace((unsigned char)text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace((unsigned char)text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

inline long word_edit_distance(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<long> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = long(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = long(i);
    for (size_t j = 1; j <= m; ++j) {
      const long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Word-level Levenshtein distance divided by the reference word count.
inline double wer(std::string_view hypothesis, std::string_view reference) {
  const auto ref = tokenize(reference);
  if (ref.empty()) throw Error("wer: reference text has no words");
  const auto hyp = tokenize(hypothesis);
  return double(word_edit_distance(hyp, ref)) / double(ref.size());
}

// Page-level bag-of-words F-measure over word multisets; needs no line
// alignment or ordering.
inline Prf bow_fmeasure(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = tokenize(hypothesis);
  const auto ref = tokenize(reference);
  std::map<std::string, long> ref_counts;
  for (const auto& w : ref) ++ref_counts[w];
  long intersection = 0;
  for (const auto& w : hyp) {
    auto it = ref_counts.find(w);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++intersection;
    }
  }
  return prf_from_counts(intersection, long(hyp.size()), long(ref.size()));
}

}  // namespace pagerec
