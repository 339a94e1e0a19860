#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pagerec/error.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Class indices: 0 is blank, 1..|symbols| map to the symbol list in order,
// |symbols|+1 is the end-of-line label. Index assignments are part of the
// checkpoint contract and never change.
struct Alphabet {
  std::string symbols;

  int classes() const { return int(symbols.size()) + 2; }
  int blank_index() const { return 0; }
  int eol_index() const { return int(symbols.size()) + 1; }

  int index_of(char c) const {
    const auto p = symbols.find(c);
    if (p == std::string::npos)
      throw Error(std::string("symbol not in alphabet: '") + c + "'");
    return int(p) + 1;
  }

  char symbol(int cls) const {
    if (cls < 1 || cls > int(symbols.size()))
      throw Error("class index " + std::to_string(cls) + " has no symbol");
    return symbols[size_t(cls - 1)];
  }

  std::vector<int> encode(std::string_view text) const {
    std::vector<int> out;
    out.reserve(text.size());
    for (char c : text) out.push_back(index_of(c));
    return out;
  }

  static const Alphabet& toy() {
    static const Alphabet a{"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "};
    return a;
  }
};

// Shortest number of frames that can realize a target (adjacent repeats need
// a separating blank).
inline int ctc_min_frames(const std::vector<int>& target) {
  int repeats = 0;
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++repeats;
  return int(target.size()) + repeats;
}

namespace detail {

inline void validate_posteriors(const Tensor<double>& post) {
  if (post.rank() != 2)
    throw DimensionError("posteriors must be [frames, classes]");
  for (int t = 0; t < post.dim(0); ++t) {
    double sum = 0.0;
    for (int c = 0; c < post.dim(1); ++c) {
      const double y = post.at(t, c);
      if (!(y >= 0.0 && y <= 1.0))
        throw NumericError("posterior entry outside [0,1]");
      sum += y;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
      throw NumericError("posterior row " + std::to_string(t) +
                         " sums to " + std::to_string(sum));
  }
}

inline void validate_target(const std::vector<int>& target, int classes) {
  for (int s : target)
    if (s <= 0 || s >= classes)
      throw Error("ctc target symbol " + std::to_string(s) +
                  " out of range (blank is not a valid target)");
}

}  // namespace detail

struct CtcLoss {
  double nll = 0.0;
  Tensor<double> dscores;  // [frames, classes], gradient w.r.t. pre-softmax
  double logp_forward = kNegInf;
  double logp_backward = kNegInf;
};

// Forward-backward over the blank-augmented target, all in log space.
// The gradient w.r.t. pre-softmax scores is posterior minus path occupancy.
inline CtcLoss ctc_loss(const Tensor<double>& post,
                        const std::vector<int>& target) {
  detail::validate_posteriors(post);
  const int frames = post.dim(0);
  const int classes = post.dim(1);
  detail::validate_target(target, classes);
  if (frames < ctc_min_frames(target))
    throw InfeasibleAlignmentError(
        "ctc: " + std::to_string(frames) + " frames cannot align a target of " +
        std::to_string(target.size()) + " symbols (need >= " +
        std::to_string(ctc_min_frames(target)) + ")");

  const int len = int(target.size());
  const int states = 2 * len + 1;
  auto label = [&](int s) { return (s % 2) ? target[size_t(s / 2)] : 0; };
  auto can_skip_into = [&](int s) {
    // entering state s from s-2 skips a blank; allowed between distinct labels
    return s >= 2 && label(s) != 0 && label(s) != label(s - 2);
  };
  auto ly = [&](int t, int s) { return std::log(post.at(t, label(s))); };

  std::vector<double> la(size_t(frames) * states, kNegInf);
  std::vector<double> lb(size_t(frames) * states, kNegInf);
  auto A = [&](int t, int s) -> double& { return la[size_t(t) * states + s]; };
  auto B = [&](int t, int s) -> double& { return lb[size_t(t) * states + s]; };

  A(0, 0) = ly(0, 0);
  if (states > 1) A(0, 1) = ly(0, 1);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < states; ++s) {
      double acc = A(t - 1, s);
      if (s >= 1) acc = log_sum_exp(acc, A(t - 1, s - 1));
      if (can_skip_into(s)) acc = log_sum_exp(acc, A(t - 1, s - 2));
      if (acc != kNegInf) A(t, s) = acc + ly(t, s);
    }
  }

  B(frames - 1, states - 1) = 0.0;
  if (states > 1) B(frames - 1, states - 2) = 0.0;
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < states; ++s) {
      double acc = B(t + 1, s) == kNegInf ? kNegInf : B(t + 1, s) + ly(t + 1, s);
      if (s + 1 < states && B(t + 1, s + 1) != kNegInf)
        acc = log_sum_exp(acc, B(t + 1, s + 1) + ly(t + 1, s + 1));
      if (s + 2 < states && can_skip_into(s + 2) && B(t + 1, s + 2) != kNegInf)
        acc = log_sum_exp(acc, B(t + 1, s + 2) + ly(t + 1, s + 2));
      B(t, s) = acc;
    }
  }

  CtcLoss out;
  out.logp_forward = A(frames - 1, states - 1);
  if (states > 1)
    out.logp_forward = log_sum_exp(out.logp_forward, A(frames - 1, states - 2));
  out.logp_backward = B(0, 0) == kNegInf ? kNegInf : B(0, 0) + ly(0, 0);
  if (states > 1 && B(0, 1) != kNegInf)
    out.logp_backward = log_sum_exp(out.logp_backward, B(0, 1) + ly(0, 1));

  const double logp = out.logp_forward;
  if (logp == kNegInf)
    throw InfeasibleAlignmentError("ctc: target has zero probability mass");
  out.nll = -logp;

  out.dscores = Tensor<double>({frames, classes});
  std::vector<double> occupancy(size_t(classes));
  for (int t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), 0.0);
    for (int s = 0; s < states; ++s) {
      const double g = A(t, s) + B(t, s) - logp;
      if (g != kNegInf && !std::isnan(g))
        occupancy[size_t(label(s))] += std::exp(g);
    }
    for (int c = 0; c < classes; ++c)
      out.dscores.at(t, c) = post.at(t, c) - occupancy[size_t(c)];
  }
  return out;
}

// Exact log-likelihood by enumerating every frame labeling whose collapse
// (merge repeats, then drop blanks) equals the target. Test oracle for small
// instances only.
inline double ctc_brute_force(const Tensor<double>& post,
                              const std::vector<int>& target) {
  detail::validate_posteriors(post);
  const int frames = post.dim(0);
  const int classes = post.dim(1);
  detail::validate_target(target, classes);
  double combos = 1.0;
  for (int t = 0; t < frames; ++t) {
    combos *= classes;
    if (combos > 1e6)
      throw Error("ctc_brute_force: instance too large (classes^frames > 1e6)");
  }

  std::vector<int> seq(size_t(frames), 0);
  std::vector<int> collapsed;
  double total = 0.0;
  for (;;) {
    collapsed.clear();
    int prev = -1;
    for (int t = 0; t < frames; ++t) {
      if (seq[size_t(t)] != prev && seq[size_t(t)] != 0)
        collapsed.push_back(seq[size_t(t)]);
      prev = seq[size_t(t)];
    }
    if (collapsed == target) {
      double p = 1.0;
      for (int t = 0; t < frames; ++t) p *= post.at(t, seq[size_t(t)]);
      total += p;
    }
    int t = frames - 1;
    while (t >= 0 && seq[size_t(t)] == classes - 1) seq[size_t(t--)] = 0;
    if (t < 0) break;
    ++seq[size_t(t)];
  }
  return total > 0.0 ? std::log(total) : kNegInf;
}

// Per-frame argmax, collapse repeats, drop blanks, truncate at the first EOL.
inline std::string best_path_decode(const Tensor<double>& post,
                                    const Alphabet& alphabet) {
  detail::validate_posteriors(post);
  if (post.dim(1) != alphabet.classes())
    throw DimensionError("best_path_decode: class count mismatch");
  std::string out;
  int prev = -1;
  for (int t = 0; t < post.dim(0); ++t) {
    int best = 0;
    for (int c = 1; c < post.dim(1); ++c)
      if (post.at(t, c) > post.at(t, best)) best = c;
    if (best != prev) {
      if (best == alphabet.eol_index()) return out;
      if (best != alphabet.blank_index()) out += alphabet.symbol(best);
    }
    prev = best;
  }
  return out;
}

}  // namespace pagerec
