#include "sedge/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sedge {

double impurity_from_counts(std::span<const double> counts, double total, GainType type) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  if (type == GainType::Entropy) {
    for (double c : counts)
      if (c > 0.0) {
        const double p = c / total;
        h -= p * std::log2(p);
      }
  } else {
    for (double c : counts) {
      const double p = c / total;
      h += p * (1.0 - p);
    }
  }
  return h;
}

namespace {

std::vector<double> histogram(std::span<const std::uint8_t> labels, int k) {
  std::vector<double> counts(k, 0.0);
  for (auto l : labels) {
    if (l >= k) throw std::invalid_argument("label exceeds k_classes");
    counts[l] += 1.0;
  }
  return counts;
}

}  // namespace

double impurity(std::span<const std::uint8_t> labels, int k_classes, GainType type) {
  if (labels.empty()) throw std::invalid_argument("impurity of an empty label set");
  return impurity_from_counts(histogram(labels, k_classes), static_cast<double>(labels.size()), type);
}

double info_gain(std::span<const std::uint8_t> parent, std::span<const std::uint8_t> left,
                 std::span<const std::uint8_t> right, int k_classes, GainType type) {
  if (parent.empty()) return 0.0;
  const double n = static_cast<double>(parent.size());
  double g = impurity(parent, k_classes, type);
  if (!left.empty()) g -= static_cast<double>(left.size()) / n * impurity(left, k_classes, type);
  if (!right.empty()) g -= static_cast<double>(right.size()) / n * impurity(right, k_classes, type);
  return g;
}

std::vector<float> sample_thresholds(float lo, float hi, int n, Rng& rng) {
  std::vector<float> t(n);
  for (auto& v : t) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

std::optional<SplitCandidate> best_split(const Eigen::MatrixXf& x, std::span<const std::uint32_t> rows,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const std::uint32_t> columns, const SplitSearch& search,
                                         Rng& rng) {
  if (rows.size() != labels.size()) throw std::invalid_argument("rows/labels size mismatch");
  const int k = search.k_classes;
  const int nt = search.n_thresholds;
  if (nt < 1) throw std::invalid_argument("n_thresholds must be >= 1");
  const size_t n = rows.size();
  if (n < 2) return std::nullopt;

  const std::vector<double> parent_counts = histogram(labels, k);
  const double total = static_cast<double>(n);
  const double parent_h = impurity_from_counts(parent_counts, total, search.gain);

  std::optional<SplitCandidate> best;
  std::vector<float> vals(n);
  std::vector<double> hist(static_cast<size_t>(nt + 1) * k);
  std::vector<double> left(k), right(k);
  std::vector<int> order(nt);

  for (const std::uint32_t col : columns) {
    const float* data = x.col(col).data();
    float lo = std::numeric_limits<float>::infinity();
    float hi = -lo;
    for (size_t i = 0; i < n; ++i) {
      const float v = data[rows[i]];
      vals[i] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) continue;
    std::vector<float> taus = sample_thresholds(lo, hi, nt, rng);
    std::sort(taus.begin(), taus.end());

    std::fill(hist.begin(), hist.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const int b = static_cast<int>(std::upper_bound(taus.begin(), taus.end(), vals[i]) - taus.begin());
      hist[static_cast<size_t>(b) * k + labels[i]] += 1.0;
    }
    std::fill(left.begin(), left.end(), 0.0);
    double n_left = 0.0;
    for (int t = 0; t < nt; ++t) {
      // Bin t holds the samples with taus[t-1] <= x < taus[t].
      for (int c = 0; c < k; ++c) {
        left[c] += hist[static_cast<size_t>(t) * k + c];
        n_left += hist[static_cast<size_t>(t) * k + c];
      }
      const double n_right = total - n_left;
      if (n_left < search.min_child || n_right < search.min_child) continue;
      for (int c = 0; c < k; ++c) right[c] = parent_counts[c] - left[c];
      const double gain = parent_h - n_left / total * impurity_from_counts(left, n_left, search.gain) -
                          n_right / total * impurity_from_counts(right, n_right, search.gain);
      const bool better =
          !best || gain > best->gain ||
          (gain == best->gain && (col < best->split.feature ||
                                  (col == best->split.feature && taus[t] < best->split.threshold)));
      if (better) best = SplitCandidate{{col, taus[t]}, gain};
    }
  }
  return best;
}

}  // namespace sedge
