#pragma once

#include "sedge/rng.hpp"
#include "sedge/segpatch.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sedge {

/// m distinct unordered pixel pairs (j1 < j2) of a side x side mask.
struct PairSampling {
  int side = 0;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
};

/// Number of unique pixel pairs in a side x side mask.
inline std::int64_t total_pairs(int side) {
  const std::int64_t n = static_cast<std::int64_t>(side) * side;
  return n * (n - 1) / 2;
}

/// Draw m distinct pairs without replacement.
PairSampling sample_pairs(int side, int m, Rng& rng);

/// Bit t is [y(j1_t) == y(j2_t)].
struct PairVector {
  std::vector<std::uint8_t> bits;
  bool operator==(const PairVector&) const = default;
};

PairVector apply_mapping(const SegPatch& y, const PairSampling& phi);

/// Rows are apply_mapping(labels[rows[i]], phi) as 0/1 floats.
Eigen::MatrixXf mapping_matrix(std::span<const SegPatch> labels, std::span<const std::uint32_t> rows,
                               const PairSampling& phi);

}  // namespace sedge
