#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace stabeval {

using Assignment = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

/// Maximum-weight assignment on a rectangular matrix (Hungarian method with
/// potentials, O(n^2 m)). Every row and column is used at most once; the
/// smaller dimension is fully assigned. Pairs are returned sorted by row.
/// An empty matrix yields an empty assignment.
Assignment hungarian_max(const Eigen::Ref<const Eigen::MatrixXd>& weights);

/// Sum of weights over an assignment.
double assignment_total(const Eigen::Ref<const Eigen::MatrixXd>& weights, const Assignment& assignment);

}  // namespace stabeval
