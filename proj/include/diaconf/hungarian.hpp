#pragma once

#include <limits>
#include <vector>

#include "diaconf/errors.hpp"

namespace diaconf {

// Maximum-weight bipartite assignment (Hungarian algorithm with potentials,
// O(n^3)). Returns, for each row, the assigned column index, or -1 for rows
// left unassigned when there are fewer columns than rows. Weights must be
// finite; the matrix may be rectangular.
inline std::vector<int> max_weight_assignment(
    const std::vector<std::vector<double>>& weights) {
  const int rows = static_cast<int>(weights.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(weights[0].size());
  for (const auto& r : weights)
    if (static_cast<int>(r.size()) != cols)
      throw Error("max_weight_assignment: ragged weight matrix");
  if (cols == 0) return std::vector<int>(rows, -1);

  // Square cost matrix for minimization; padding entries cost 0.
  const int n = std::max(rows, cols);
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) cost[i + 1][j + 1] = -weights[i][j];

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assignment(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = match[j];
    if (i >= 1 && i <= rows && j <= cols) assignment[i - 1] = j - 1;
  }
  return assignment;
}

}  // namespace diaconf
