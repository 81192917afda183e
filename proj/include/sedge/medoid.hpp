#pragma once

#include "sedge/mapping.hpp"

#include <Eigen/Core>

#include <span>

namespace sedge {

/// Index k minimizing sum_i ||z_k - z_i||^2, computed in O(nm) as
/// argmin_k ||n z_k - sum_i z_i||^2 in exact integer arithmetic. Ties go to
/// the lowest index. Rows of z are 0/1 pair vectors.
int medoid_index(const Eigen::MatrixXf& z);
int medoid_index(std::span<const PairVector> z);

}  // namespace sedge
