#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sizzle {

/// Maximum-weight perfect matching on a square weight matrix (rows to columns).
/// Returns col_of_row. O(n^3) Hungarian algorithm with potentials.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

}  // namespace sizzle
