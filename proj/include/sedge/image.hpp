#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <vector>

namespace sedge {

/// Dense 2-D plane, row-major, indexed (row, col).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FloatPlane = Plane<float>;
using LabelMap = Plane<std::int32_t>;
using BinaryMap = Plane<std::uint8_t>;

/// Multi-plane image with values in [0,1]. RGB has 3 planes, grayscale 1;
/// anything beyond the first three planes is treated as extra modalities.
struct Image {
  std::vector<FloatPlane> planes;

  Image() = default;
  explicit Image(std::vector<FloatPlane> p) : planes(std::move(p)) {}

  static Image zeros(int height, int width, int n_planes);

  int height() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int width() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }
  int n_planes() const { return static_cast<int>(planes.size()); }
  bool empty() const { return planes.empty() || height() == 0 || width() == 0; }

  /// Throws std::invalid_argument when planes disagree in size or hold
  /// values outside [0,1].
  void validate() const;
};

struct Padding {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;
};

/// Half-sample symmetric reflection (fedcba|abcdef|fedcba) folded to any
/// distance, so pads wider than the plane are still defined.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

template <typename Scalar>
Plane<Scalar> pad_reflect(const Plane<Scalar>& src, const Padding& pad) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  Plane<Scalar> dst(h + pad.top + pad.bottom, w + pad.left + pad.right);
  std::vector<int> col_map(dst.cols());
  for (int c = 0; c < dst.cols(); ++c) col_map[c] = reflect_index(c - pad.left, w);
  for (int r = 0; r < dst.rows(); ++r) {
    const int sr = reflect_index(r - pad.top, h);
    for (int c = 0; c < dst.cols(); ++c) dst(r, c) = src(sr, col_map[c]);
  }
  return dst;
}

Image pad_reflect(const Image& img, const Padding& pad);

/// Translate a plane by (dy,dx) pixels; vacated pixels are reflected.
template <typename Scalar>
Plane<Scalar> shift_reflect(const Plane<Scalar>& src, int dy, int dx) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  Plane<Scalar> dst(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) dst(r, c) = src(reflect_index(r - dy, h), reflect_index(c - dx, w));
  return dst;
}

/// Bilinear resampling with pixel-center alignment and clamped borders.
template <typename Scalar>
Plane<Scalar> resize_bilinear(const Plane<Scalar>& src, int out_h, int out_w) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  Plane<Scalar> dst(out_h, out_w);
  if (h == out_h && w == out_w) {
    dst = src;
    return dst;
  }
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  std::vector<int> x0(out_w), x1(out_w);
  std::vector<double> fx(out_w);
  for (int c = 0; c < out_w; ++c) {
    double x = (c + 0.5) * sx - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    x0[c] = static_cast<int>(x);
    x1[c] = std::min(x0[c] + 1, w - 1);
    fx[c] = x - x0[c];
  }
  for (int r = 0; r < out_h; ++r) {
    double y = (r + 0.5) * sy - 0.5;
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(y);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = y - y0;
    for (int c = 0; c < out_w; ++c) {
      const double top = src(y0, x0[c]) * (1.0 - fx[c]) + src(y0, x1[c]) * fx[c];
      const double bot = src(y1, x0[c]) * (1.0 - fx[c]) + src(y1, x1[c]) * fx[c];
      dst(r, c) = static_cast<Scalar>(top * (1.0 - fy) + bot * fy);
    }
  }
  return dst;
}

Image resize_bilinear(const Image& img, int out_h, int out_w);

/// Mean over non-overlapping factor x factor blocks; trailing rows/cols that
/// do not fill a block are dropped.
template <typename Scalar>
Plane<Scalar> downsample_box(const Plane<Scalar>& src, int factor) {
  if (factor == 1) return src;
  const int h = static_cast<int>(src.rows()) / factor;
  const int w = static_cast<int>(src.cols()) / factor;
  Plane<Scalar> dst(h, w);
  const double norm = 1.0 / (factor * factor);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      dst(r, c) = static_cast<Scalar>(
          src.block(r * factor, c * factor, factor, factor).template cast<double>().sum() * norm);
  return dst;
}

/// Pixel replication by an integer factor.
template <typename Scalar>
Plane<Scalar> upsample_nearest(const Plane<Scalar>& src, int factor, int out_h, int out_w) {
  Plane<Scalar> dst(out_h, out_w);
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c)
      dst(r, c) = src(std::min(r / factor, h - 1), std::min(c / factor, w - 1));
  return dst;
}

}  // namespace sedge
