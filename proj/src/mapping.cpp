#include "sedge/mapping.hpp"

#include <stdexcept>
#include <unordered_set>

namespace sedge {

PairSampling sample_pairs(int side, int m, Rng& rng) {
  const std::int64_t total = total_pairs(side);
  if (m < 1 || m > total) throw std::invalid_argument("pair count must be in [1, C(side^2, 2)]");
  const std::uint64_t n = static_cast<std::uint64_t>(side) * side;
  PairSampling phi;
  phi.side = side;
  phi.pairs.reserve(m);
  std::unordered_set<std::uint32_t> seen;
  seen.reserve(2 * static_cast<size_t>(m));
  while (phi.size() < m) {
    auto a = static_cast<std::uint16_t>(rng.below(n));
    auto b = static_cast<std::uint16_t>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert((static_cast<std::uint32_t>(a) << 16) | b).second) phi.pairs.emplace_back(a, b);
  }
  return phi;
}

PairVector apply_mapping(const SegPatch& y, const PairSampling& phi) {
  if (y.side() != phi.side) throw std::invalid_argument("pair sampling does not match patch side");
  PairVector z;
  z.bits.resize(phi.pairs.size());
  for (size_t t = 0; t < phi.pairs.size(); ++t)
    z.bits[t] = y[phi.pairs[t].first] == y[phi.pairs[t].second] ? 1 : 0;
  return z;
}

Eigen::MatrixXf mapping_matrix(std::span<const SegPatch> labels, std::span<const std::uint32_t> rows,
                               const PairSampling& phi) {
  Eigen::MatrixXf z(static_cast<Eigen::Index>(rows.size()), phi.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const SegPatch& y = labels[rows[i]];
    for (int t = 0; t < phi.size(); ++t)
      z(static_cast<Eigen::Index>(i), t) = y[phi.pairs[t].first] == y[phi.pairs[t].second] ? 1.0f : 0.0f;
  }
  return z;
}

}  // namespace sedge
