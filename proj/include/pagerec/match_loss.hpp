#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "pagerec/doc_types.hpp"
#include "pagerec/error.hpp"
#include "pagerec/hungarian.hpp"

namespace pagerec {

// A larger localization weight is used when solving the assignment than when
// computing gradients.
struct MatchLossConfig {
  double alpha_match = 1000.0;
  double alpha_grad = 100.0;
};

// One-to-one candidate<->reference matching. Every reference is matched;
// candidates may stay unmatched.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (candidate n, reference m)
  std::vector<char> cand_matched;          // size N
  std::vector<int> ref_to_cand;            // size M
  double total_cost = 0.0;
};

// cost is row-major N x M: candidate rows, reference columns. Requires N >= M
// and finite entries; minimizes the total cost of covering all M references.
inline Assignment hungarian_assign(const std::vector<double>& cost, int n,
                                   int m) {
  if (n < m)
    throw DimensionError("hungarian_assign: need n >= m, got n=" +
                         std::to_string(n) + " m=" + std::to_string(m));
  if (cost.size() != size_t(n) * size_t(m))
    throw DimensionError("hungarian_assign: cost size does not match n*m");
  for (double c : cost)
    if (!std::isfinite(c))
      throw NumericError("hungarian_assign: non-finite cost entry");

  Assignment a;
  a.cand_matched.assign(size_t(n), 0);
  a.ref_to_cand.assign(size_t(m), -1);
  if (m == 0) return a;

  // Solve over the transpose so references are the covered side.
  auto ref_cols = solve_assignment(
      m, n, [&](int ref, int cand) { return cost[size_t(cand) * m + ref]; });
  for (int ref = 0; ref < m; ++ref) {
    const int cand = ref_cols[size_t(ref)];
    a.ref_to_cand[size_t(ref)] = cand;
    a.cand_matched[size_t(cand)] = 1;
    a.pairs.emplace_back(cand, ref);
    a.total_cost += cost[size_t(cand) * m + ref];
  }
  return a;
}

struct MatchLossResult {
  double loss = 0.0;
  std::vector<std::array<double, 4>> dcoords;  // per candidate, first K used
  std::vector<double> dconf;                   // per candidate
  Assignment assign;
};

namespace detail {
constexpr double kConfClamp = 1e-7;

inline double clamp_conf(double c) {
  return std::min(1.0 - kConfClamp, std::max(kConfClamp, c));
}

inline double sq_dist(const std::array<double, 4>& a,
                      const std::array<double, 4>& b, int k) {
  double d = 0.0;
  for (int i = 0; i < k; ++i) {
    const double diff = a[size_t(i)] - b[size_t(i)];
    d += diff * diff;
  }
  return d;
}
}  // namespace detail

// The training objective: match candidates to references by minimizing
//   sum over pairs of  alpha_match*||l_n - t_m||^2 - log c_n + log(1 - c_n),
// then score with alpha_grad:
//   loss = sum_matched (alpha_grad*||l_n - t_m||^2 - log c_n)
//        + sum_unmatched -log(1 - c_n).
// The +log(1-c_n) term in the pairwise cost puts "match n" and "leave n
// unmatched" on equal footing; it shifts the objective by a constant and
// leaves the argmin intact.
inline MatchLossResult match_and_loss(
    const std::vector<TripletCandidate>& cands,
    const std::vector<std::array<double, 4>>& refs, int k,
    const MatchLossConfig& cfg) {
  const int n = int(cands.size());
  const int m = int(refs.size());
  if (n < m)
    throw DimensionError("match_and_loss: fewer candidates (" +
                         std::to_string(n) + ") than references (" +
                         std::to_string(m) + ")");

  MatchLossResult r;
  r.dcoords.assign(size_t(n), {});
  r.dconf.assign(size_t(n), 0.0);

  std::vector<double> logc(size_t(n)), log1c(size_t(n)), conf(size_t(n));
  for (int i = 0; i < n; ++i) {
    conf[size_t(i)] = detail::clamp_conf(cands[size_t(i)].conf);
    logc[size_t(i)] = std::log(conf[size_t(i)]);
    log1c[size_t(i)] = std::log(1.0 - conf[size_t(i)]);
  }

  if (m > 0) {
    std::vector<double> cost(size_t(n) * size_t(m));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        cost[size_t(i) * m + j] =
            cfg.alpha_match *
                detail::sq_dist(cands[size_t(i)].coords, refs[size_t(j)], k) -
            logc[size_t(i)] + log1c[size_t(i)];
    r.assign = hungarian_assign(cost, n, m);
  } else {
    r.assign.cand_matched.assign(size_t(n), 0);
  }

  for (int i = 0; i < n; ++i) {
    if (r.assign.cand_matched[size_t(i)]) continue;
    r.loss -= log1c[size_t(i)];
    r.dconf[size_t(i)] = 1.0 / (1.0 - conf[size_t(i)]);
  }
  for (const auto& [cand, ref] : r.assign.pairs) {
    const double d2 =
        detail::sq_dist(cands[size_t(cand)].coords, refs[size_t(ref)], k);
    r.loss += cfg.alpha_grad * d2 - logc[size_t(cand)];
    r.dconf[size_t(cand)] = -1.0 / conf[size_t(cand)];
    for (int c = 0; c < k; ++c)
      r.dcoords[size_t(cand)][size_t(c)] =
          2.0 * cfg.alpha_grad *
          (cands[size_t(cand)].coords[size_t(c)] - refs[size_t(ref)][size_t(c)]);
  }
  return r;
}

}  // namespace pagerec
