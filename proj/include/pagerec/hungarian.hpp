#pragma once
#include <cmath>
#include <limits>
#include <vector>

#include "pagerec/error.hpp"

namespace pagerec {

// Shortest-augmenting-path assignment with potentials (Kuhn-Munkres family),
// O(rows^2 * cols). Requires rows <= cols; every row gets a distinct column.
// cost(i, j) must be finite. Returns the column assigned to each row.
template <class CostFn>
std::vector<int> solve_assignment(int rows, int cols, CostFn cost) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size_t(rows) + 1, 0.0), v(size_t(cols) + 1, 0.0);
  std::vector<int> p(size_t(cols) + 1, 0), way(size_t(cols) + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(size_t(cols) + 1, kInf);
    std::vector<char> used(size_t(cols) + 1, 0);
    do {
      used[size_t(j0)] = 1;
      const int i0 = p[size_t(j0)];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= cols; ++j) {
        if (used[size_t(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
        if (cur < minv[size_t(j)]) {
          minv[size_t(j)] = cur;
          way[size_t(j)] = j0;
        }
        if (minv[size_t(j)] < delta) {
          delta = minv[size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[size_t(j)]) {
          u[size_t(p[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          minv[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[size_t(j0)] != 0);
    do {
      const int j1 = way[size_t(j0)];
      p[size_t(j0)] = p[size_t(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(size_t(rows), -1);
  for (int j = 1; j <= cols; ++j)
    if (p[size_t(j)]) row_to_col[size_t(p[size_t(j)] - 1)] = j - 1;
  return row_to_col;
}

}  // namespace pagerec
