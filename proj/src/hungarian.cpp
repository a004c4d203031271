#include "stabeval/hungarian.hpp"

#include <algorithm>
#include <limits>

namespace stabeval {

namespace {

// Minimum-cost assignment of every row to a distinct column, rows <= cols.
// Shortest augmenting path with row/column potentials; index 0 is a sentinel.
std::vector<Eigen::Index> solve_min(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<Eigen::Index> col_owner(m + 1, 0), way(m + 1, 0);

  for (Eigen::Index i = 1; i <= n; ++i) {
    col_owner[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = col_owner[j0];
      double delta = kInf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> row_to_col(n, -1);
  for (Eigen::Index j = 1; j <= m; ++j)
    if (col_owner[j] != 0) row_to_col[col_owner[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment hungarian_max(const Eigen::Ref<const Eigen::MatrixXd>& weights) {
  Assignment out;
  if (weights.rows() == 0 || weights.cols() == 0) return out;

  const bool transposed = weights.rows() > weights.cols();
  Eigen::MatrixXd cost = transposed ? Eigen::MatrixXd(-weights.transpose()) : Eigen::MatrixXd(-weights);
  const auto row_to_col = solve_min(cost);

  out.reserve(row_to_col.size());
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(row_to_col.size()); ++r) {
    if (transposed)
      out.emplace_back(row_to_col[r], r);
    else
      out.emplace_back(r, row_to_col[r]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_total(const Eigen::Ref<const Eigen::MatrixXd>& weights, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [r, c] : assignment) total += weights(r, c);
  return total;
}

}  // namespace stabeval
