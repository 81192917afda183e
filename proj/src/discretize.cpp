#include "sedge/discretize.hpp"

#include "sedge/pca.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace sedge {

namespace {

int nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& p, double* dist = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters) {
  const Eigen::Index n = points.rows();
  if (n < 1 || k < 1 || k > 256) throw std::invalid_argument("kmeans requires n >= 1 and k in [1,256]");
  KmeansResult res;
  res.centroids.resize(k, points.cols());

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  res.centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(i) - res.centroids.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2[pick];
        if (target <= 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    res.centroids.row(c) = points.row(pick);
  }

  res.labels.assign(n, 0);
  std::vector<std::uint8_t> prev;
  for (int it = 0; it < max_iters; ++it) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = 0.0;
      res.labels[i] = static_cast<std::uint8_t>(nearest(res.centroids, points.row(i), &d));
      obj += d;
    }
    res.objective.push_back(obj);
    if (res.labels == prev) break;
    prev = res.labels;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.labels[i]) += points.row(i);
      ++counts[res.labels[i]];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) res.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
  }
  // Labels are final nearest-centroid assignments for the returned centroids.
  for (Eigen::Index i = 0; i < n; ++i)
    res.labels[i] = static_cast<std::uint8_t>(nearest(res.centroids, points.row(i)));
  return res;
}

DiscreteLabels discretize(const Eigen::MatrixXf& z, int k_classes, Discretizer method, Rng& rng,
                          int kmeans_dims) {
  if (z.rows() < 2) throw std::invalid_argument("discretize requires at least two samples");
  if (k_classes < 2 || k_classes > 256) throw std::invalid_argument("k_classes must be in [2,256]");
  DiscreteLabels out;
  out.labels.assign(z.rows(), 0);
  const int max_dims = static_cast<int>(std::min<Eigen::Index>(z.rows(), z.cols()));
  const int bits = std::bit_width(static_cast<unsigned>(k_classes)) - 1;
  const int want = method == Discretizer::Pca ? bits : kmeans_dims;
  const int dims = std::max(1, std::min(want, max_dims));
  PcaOptions opts;
  opts.seed = rng.next();
  const auto pca = pca_top_dirs(z, dims, opts);
  if (pca.degenerate || pca.rank() == 0) {
    out.degenerate = true;
    return out;
  }
  out.projections = pca.project(z).cast<double>();
  if (method == Discretizer::Pca) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      unsigned label = 0;
      for (int b = 0; b < dims; ++b)
        if (out.projections(i, b) > 0.0) label |= 1u << b;
      out.labels[i] = static_cast<std::uint8_t>(label);
    }
  } else {
    const Eigen::MatrixXd pts = out.projections.leftCols(pca.rank());
    KmeansResult km = kmeans(pts, k_classes, rng);
    out.labels = std::move(km.labels);
    out.centroids = std::move(km.centroids);
  }
  return out;
}

}  // namespace sedge
