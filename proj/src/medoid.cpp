#include "sedge/medoid.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sedge {

namespace {

template <typename Get>
int medoid_impl(std::int64_t n, std::int64_t m, Get&& get) {
  if (n < 1) throw std::invalid_argument("medoid of an empty set");
  std::vector<std::int64_t> col_sum(m, 0);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j) col_sum[j] += get(i, j);
  int best = 0;
  std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t cost = 0;
    for (std::int64_t j = 0; j < m; ++j) {
      const std::int64_t d = n * get(i, j) - col_sum[j];
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

int medoid_index(const Eigen::MatrixXf& z) {
  return medoid_impl(z.rows(), z.cols(),
                     [&](std::int64_t i, std::int64_t j) { return static_cast<std::int64_t>(z(i, j)); });
}

int medoid_index(std::span<const PairVector> z) {
  const std::int64_t m = z.empty() ? 0 : static_cast<std::int64_t>(z[0].bits.size());
  for (const auto& v : z)
    if (static_cast<std::int64_t>(v.bits.size()) != m) throw std::invalid_argument("pair vectors differ in length");
  return medoid_impl(static_cast<std::int64_t>(z.size()), m,
                     [&](std::int64_t i, std::int64_t j) { return static_cast<std::int64_t>(z[i].bits[j]); });
}

}  // namespace sedge
