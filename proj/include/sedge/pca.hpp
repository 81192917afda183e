#pragma once

#include "sedge/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sedge {

struct PcaOptions {
  int max_iters = 100;
  double tolerance = 1e-9;  // relative change of the Rayleigh quotient
  std::uint64_t seed = 0;   // start vectors
};

template <typename Scalar>
struct PcaResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector mean;         // length m
  Matrix directions;   // m x dims, orthonormal columns; zero once variance is exhausted
  Vector eigenvalues;  // population covariance eigenvalues, descending
  bool degenerate = false;  // every sample identical

  int rank() const { return static_cast<int>((eigenvalues.array() > Scalar(0)).count()); }

  /// Centered projections onto the directions (n x dims).
  template <typename Derived>
  Matrix project(const Eigen::MatrixBase<Derived>& z) const {
    return (z.rowwise() - mean.transpose()) * directions;
  }
};

/// Leading `dims` principal directions of the rows of z, by power iteration
/// with deflation on the population covariance. Each direction's first
/// component with magnitude above 1e-12 is positive.
template <typename Derived>
PcaResult<typename Derived::Scalar> pca_top_dirs(const Eigen::MatrixBase<Derived>& z, int dims,
                                                 const PcaOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  if (n < 2) throw std::invalid_argument("pca requires at least two samples");
  if (dims < 1 || dims > std::min<Eigen::Index>(m, n)) throw std::invalid_argument("pca dims out of range");

  PcaResult<Scalar> res;
  res.mean = z.colwise().mean().transpose();
  res.directions = Matrix::Zero(m, dims);
  res.eigenvalues = Vector::Zero(dims);

  const Matrix centered = z.rowwise() - res.mean.transpose();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  const bool dense_cov = n > m;
  Matrix cov;
  if (dense_cov) {
    cov = Matrix::Zero(m, m);
    cov.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), inv_n);
    cov = cov.template selfadjointView<Eigen::Lower>();
  }
  auto apply = [&](const Vector& v) -> Vector {
    if (dense_cov) return cov * v;
    return centered.transpose() * (centered * v) * inv_n;
  };

  const double trace = static_cast<double>(centered.squaredNorm()) / static_cast<double>(n);
  if (trace <= 1e-12) {
    res.degenerate = true;
    return res;
  }
  const double floor = 1e-10 * trace;

  Rng rng(opts.seed);
  for (int d = 0; d < dims; ++d) {
    const auto basis = res.directions.leftCols(d);
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = static_cast<Scalar>(rng.normal());
    v -= basis * (basis.transpose() * v);
    if (v.norm() <= Scalar(0)) break;
    v.normalize();
    double lambda_prev = 0.0;
    double lambda = 0.0;
    bool exhausted = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      Vector w = apply(v);
      w -= basis * (basis.transpose() * w);
      lambda = static_cast<double>(v.dot(w));
      const Scalar norm = w.norm();
      if (static_cast<double>(norm) <= floor) {
        exhausted = true;
        break;
      }
      v = w / norm;
      if (it > 0 && std::abs(lambda - lambda_prev) <= opts.tolerance * std::abs(lambda)) break;
      lambda_prev = lambda;
    }
    if (exhausted) break;
    Vector cv = apply(v);
    cv -= basis * (basis.transpose() * cv);
    lambda = static_cast<double>(v.dot(cv));
    if (lambda <= floor) break;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(static_cast<double>(v[i])) > 1e-12) {
        if (v[i] < Scalar(0)) v = -v;
        break;
      }
    }
    res.directions.col(d) = v;
    res.eigenvalues[d] = static_cast<Scalar>(lambda);
  }
  return res;
}

}  // namespace sedge
