#pragma once

#include "sedge/image.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sedge {

/// Normalized 1-D triangle kernel [1 2 .. r+1 .. 2 1] / (r+1)^2.
inline std::vector<double> triangle_kernel(int radius) {
  if (radius < 0) throw std::invalid_argument("triangle radius must be >= 0");
  std::vector<double> k(2 * radius + 1);
  const double norm = static_cast<double>(radius + 1) * (radius + 1);
  for (int i = 0; i <= radius; ++i) {
    k[i] = (i + 1) / norm;
    k[2 * radius - i] = (i + 1) / norm;
  }
  return k;
}

/// Separable convolution with a symmetric kernel and half-sample reflect
/// borders. Column sums of the implied operator are exactly one, so the
/// plane mean is preserved.
template <typename Scalar>
Plane<Scalar> convolve_separable(const Plane<Scalar>& src, const std::vector<double>& kernel) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  const int r = static_cast<int>(kernel.size()) / 2;
  Plane<double> tmp(h, w);
  std::vector<double> line(w + 2 * r);
  for (int y = 0; y < h; ++y) {
    for (int x = -r; x < w + r; ++x) line[x + r] = src(y, reflect_index(x, w));
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * r; ++k) acc += kernel[k] * line[x + k];
      tmp(y, x) = acc;
    }
  }
  Plane<Scalar> dst(h, w);
  std::vector<int> rows(h + 2 * r);
  for (int y = -r; y < h + r; ++y) rows[y + r] = reflect_index(y, h);
  std::vector<double> acc(w);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int k = 0; k <= 2 * r; ++k) {
      const double wk = kernel[k];
      const double* row = tmp.row(rows[y + k]).data();
      for (int x = 0; x < w; ++x) acc[x] += wk * row[x];
    }
    for (int x = 0; x < w; ++x) dst(y, x) = static_cast<Scalar>(acc[x]);
  }
  return dst;
}

/// Triangle blur of the given radius; radius 0 returns the input unchanged.
template <typename Scalar>
Plane<Scalar> triangle_blur(const Plane<Scalar>& src, int radius) {
  if (radius < 0) throw std::invalid_argument("triangle radius must be >= 0");
  if (radius == 0) return src;
  return convolve_separable(src, triangle_kernel(radius));
}

/// Central-difference derivatives, one-sided halves at the replicated
/// border: d/dx f(x) = (f(x+1) - f(x-1)) / 2 with f(-1) = f(0).
template <typename Scalar>
void central_gradient(const Plane<Scalar>& src, Plane<Scalar>& gx, Plane<Scalar>& gy) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  gx.resize(h, w);
  gy.resize(h, w);
  for (int y = 0; y < h; ++y) {
    const int yu = std::max(y - 1, 0);
    const int yd = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      gx(y, x) = static_cast<Scalar>(0.5 * (static_cast<double>(src(y, xr)) - src(y, xl)));
      gy(y, x) = static_cast<Scalar>(0.5 * (static_cast<double>(src(yd, x)) - src(yu, x)));
    }
  }
}

/// Integral image with a leading zero row and column.
template <typename Scalar>
Plane<double> integral_image(const Plane<Scalar>& src) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  Plane<double> ii = Plane<double>::Zero(h + 1, w + 1);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += src(y, x);
      ii(y + 1, x + 1) = ii(y, x + 1) + row;
    }
  }
  return ii;
}

/// Bilinear sample with coordinates clamped to the plane.
template <typename Scalar>
double sample_bilinear(const Plane<Scalar>& p, double y, double x) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const int y0 = static_cast<int>(y);
  const int x0 = static_cast<int>(x);
  const int y1 = std::min(y0 + 1, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  return (p(y0, x0) * (1 - fx) + p(y0, x1) * fx) * (1 - fy) + (p(y1, x0) * (1 - fx) + p(y1, x1) * fx) * fy;
}

}  // namespace sedge
