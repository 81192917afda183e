#pragma once

#include "sedge/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sedge {

/// Square segmentation mask. Ids are canonical: they appear in first-use
/// raster order starting at 0, so masks equal up to relabelling compare
/// equal byte for byte.
class SegPatch {
 public:
  SegPatch() = default;

  /// Canonicalizes `ids`; at most 256 distinct segments.
  SegPatch(int side, std::span<const std::uint8_t> ids);

  /// Canonicalized copy of a window of a full-resolution label map.
  static SegPatch from_window(const LabelMap& labels, int row, int col, int side);

  int side() const { return side_; }
  int n_segments() const { return n_segments_; }
  const std::vector<std::uint8_t>& ids() const { return ids_; }
  std::uint8_t operator()(int r, int c) const { return ids_[r * side_ + c]; }
  std::uint8_t operator[](int i) const { return ids_[i]; }

  bool operator==(const SegPatch&) const = default;

 private:
  int side_ = 0;
  int n_segments_ = 0;
  std::vector<std::uint8_t> ids_;
};

/// Binary boundary map of a SegPatch.
struct EdgePatch {
  int side = 0;
  std::vector<std::uint8_t> bits;  // 0/1 per pixel, raster order

  int count() const;
  bool operator==(const EdgePatch&) const = default;
};

/// Pixel (i,j) is a boundary iff its id differs from the pixel to its left
/// or the pixel above it (neighbours outside the patch are ignored).
EdgePatch derive_edges(const SegPatch& y);

/// The same rule applied to a full label map.
template <typename Scalar>
BinaryMap boundary_map(const Plane<Scalar>& labels) {
  BinaryMap out = BinaryMap::Zero(labels.rows(), labels.cols());
  for (int r = 0; r < labels.rows(); ++r)
    for (int c = 0; c < labels.cols(); ++c) {
      const bool left = c > 0 && labels(r, c) != labels(r, c - 1);
      const bool up = r > 0 && labels(r, c) != labels(r - 1, c);
      out(r, c) = (left || up) ? 1 : 0;
    }
  return out;
}

}  // namespace sedge
