#pragma once

#include "sedge/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace sedge {

enum class Discretizer : std::uint8_t { Pca = 0, Kmeans = 1 };

/// Dimensions of the projection used by k-means discretization.
inline constexpr int kKmeansDims = 5;
inline constexpr int kKmeansIters = 20;

struct KmeansResult {
  std::vector<std::uint8_t> labels;
  Eigen::MatrixXd centroids;       // k x dims
  std::vector<double> objective;   // sum of squared distances after each iteration
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters keep their
/// previous centroid; assignment ties go to the lowest cluster index.
KmeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters = kKmeansIters);

struct DiscreteLabels {
  std::vector<std::uint8_t> labels;  // one per row, in [0, k)
  bool degenerate = false;           // zero variance: every label is 0
  Eigen::MatrixXd projections;       // centered principal projections used
  Eigen::MatrixXd centroids;         // k-means only
};

/// Map rows of the pair-vector matrix z to k discrete classes.
///
/// Pca: bit b of the label is [projection_b > 0] for the top floor(log2 k)
/// principal directions (the label is the orthant). Kmeans: clusters the
/// top kmeans_dims projections.
DiscreteLabels discretize(const Eigen::MatrixXf& z, int k_classes, Discretizer method, Rng& rng,
                          int kmeans_dims = kKmeansDims);

}  // namespace sedge
