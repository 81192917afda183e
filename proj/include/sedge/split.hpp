#pragma once

#include "sedge/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sedge {

enum class GainType : std::uint8_t { Gini = 0, Entropy = 1 };

/// Entropy is in bits; Gini is sum_y p_y (1 - p_y).
double impurity(std::span<const std::uint8_t> labels, int k_classes, GainType type);
double impurity_from_counts(std::span<const double> counts, double total, GainType type);

/// H(parent) - sum_k |child_k| / |parent| H(child_k). An empty child
/// contributes nothing.
double info_gain(std::span<const std::uint8_t> parent, std::span<const std::uint8_t> left,
                 std::span<const std::uint8_t> right, int k_classes, GainType type);

/// Stump h(x) = [x(feature) < threshold]; 1 sends the sample left.
struct SplitParams {
  std::uint32_t feature = 0;
  float threshold = 0.0f;
  bool operator==(const SplitParams&) const = default;
};

struct SplitCandidate {
  SplitParams split;  // feature is a column of the searched matrix
  double gain = 0.0;
};

struct SplitSearch {
  int n_thresholds = 8;
  GainType gain = GainType::Gini;
  int k_classes = 2;
  int min_child = 1;  // smaller children make a candidate invalid
};

/// n thresholds uniform in (lo, hi), in draw order.
std::vector<float> sample_thresholds(float lo, float hi, int n, Rng& rng);

/// Best stump over the given columns of x (samples in rows). For each
/// column with max > min over `rows`, sample_thresholds draws the candidate
/// thresholds; columns are visited in the order given, so an identical rng
/// reproduces the candidate set. Ties go to the lowest column, then the
/// lowest threshold. Returns nullopt when no candidate is valid.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXf& x, std::span<const std::uint32_t> rows,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const std::uint32_t> columns, const SplitSearch& search,
                                         Rng& rng);

}  // namespace sedge
