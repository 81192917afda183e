#pragma once

#include "sedge/image.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sedge {

/// Feature-channel settings. Stored verbatim in model files so detection
/// reproduces the training-time channels.
struct ChannelParams {
  int shrink = 2;        // channel downsample factor
  int n_orients = 4;     // orientation bins per gradient scale
  int norm_radius = 4;   // gradient magnitude normalization radius
  int channel_blur = 2;  // triangle radius for pixel-lookup channels
  int ss_blur = 8;       // triangle radius for self-similarity channels
  int grid_cells = 5;    // self-similarity grid is grid_cells x grid_cells

  void validate() const;
  bool operator==(const ChannelParams&) const = default;
};

/// Magnitude normalization constant: M / (blur(M) + kGradientNormEps).
inline constexpr float kGradientNormEps = 0.01f;

/// Affine LUV scaling: L/270, (u+88)/270, (v+134)/270. Keeps every sRGB
/// colour inside [0,1] with a single shared scale for the three channels.
inline constexpr double kLuvScale = 1.0 / 270.0;
inline constexpr double kLuvOffsetU = 88.0;
inline constexpr double kLuvOffsetV = 134.0;

/// Convert an RGB image to rescaled CIE-LUV (D65 white). Throws
/// std::invalid_argument("luv requires rgb") for non-3-plane input.
Image rgb_to_luv(const Image& rgb);

struct GradientResult {
  FloatPlane magnitude;
  FloatPlane orientation;  // in [0, pi)
};

/// Per-pixel gradient of the strongest plane. Orientation comes from the
/// plane with the largest magnitude; with norm_radius > 0 the magnitude is
/// divided by its own triangle blur plus kGradientNormEps.
GradientResult gradient_mag_orient(const Image& planes, int norm_radius);

/// Hard-assign each magnitude value to the orientation bin containing its
/// angle; the bins sum exactly to the input magnitude.
std::vector<FloatPlane> orient_split(const FloatPlane& magnitude, const FloatPlane& orientation,
                                     int n_orients);

/// Channels at 1/shrink resolution covering the (padded) image.
///
/// For an RGB input the order is luv_l, luv_u, luv_v, mag_full, mag_half,
/// orient_full_0.., orient_half_0..; extra planes (e.g. depth) form a second
/// group laid out the same way after the first. `channels` are blurred with
/// channel_blur before downsampling, `ss` with ss_blur.
struct ChannelStack {
  int shrink = 2;
  int image_height = 0;  // unpadded input size
  int image_width = 0;
  Padding pad;           // padding applied before channel computation
  std::vector<FloatPlane> channels;
  std::vector<FloatPlane> ss;
  std::vector<std::string> channel_names;

  int n_channels() const { return static_cast<int>(channels.size()); }
  int height_ds() const { return channels.empty() ? 0 : static_cast<int>(channels[0].rows()); }
  int width_ds() const { return channels.empty() ? 0 : static_cast<int>(channels[0].cols()); }
};

/// Number of channels produced for an input with n_planes planes.
int channel_count(int n_planes, const ChannelParams& params);

/// Compute channels. The image is reflect-padded by `pad`, and then further
/// on the bottom/right so both dimensions are multiples of shrink.
ChannelStack compute_channels(const Image& img, const ChannelParams& params, const Padding& pad = {});

/// Index layout of the candidate feature vector of one d_in x d_in patch:
///
///   [0, n_lookup):  channel-major raster scan of the (d_in/shrink)^2 window,
///                   index = k*side^2 + row*side + col
///   [n_lookup, size): per channel k, cell-mean differences mean(a) - mean(b)
///                   for all grid-cell pairs a < b in raster order,
///                   index = n_lookup + k*n_pairs + pair
class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(int d_in, const ChannelParams& params, int n_channels);

  int side() const { return side_; }
  int n_channels() const { return n_channels_; }
  int n_lookup() const { return n_lookup_; }
  int n_pairs() const { return n_pairs_; }
  int size() const { return n_lookup_ + n_pairs_ * n_channels_; }
  int d_in() const { return d_in_; }
  int shrink() const { return shrink_; }

  /// Cell boundaries in downsampled window coordinates (grid_cells + 1 values).
  const std::vector<int>& cell_bounds() const { return bounds_; }
  const std::vector<std::array<std::uint8_t, 2>>& cell_pairs() const { return pairs_; }

 private:
  int d_in_ = 0;
  int shrink_ = 1;
  int side_ = 0;
  int n_channels_ = 0;
  int n_lookup_ = 0;
  int n_pairs_ = 0;
  std::vector<int> bounds_;
  std::vector<std::array<std::uint8_t, 2>> pairs_;
};

/// Feature accessor for one patch. The patch is addressed by the top-left
/// corner of its window in downsampled stack coordinates. Self-similarity
/// cell means are summed directly on construction, so identical cells give
/// bit-identical means and their difference is exactly zero.
class PatchFeatures {
 public:
  PatchFeatures(const ChannelStack& cs, const FeatureLayout& layout, int row_ds, int col_ds);

  float operator()(std::uint32_t index) const;

 private:
  const ChannelStack* cs_;
  const FeatureLayout* layout_;
  int row_;
  int col_;
  std::vector<double> cell_means_;  // channel-major, grid_cells^2 per channel
};

/// Downsampled top-left of the d_in patch centered at (row, col) of the
/// unpadded image. Throws std::out_of_range when the patch leaves the padded
/// image or is not aligned with the downsample grid.
std::array<int, 2> patch_origin_ds(const ChannelStack& cs, const FeatureLayout& layout, int row, int col);

/// Full candidate feature vector of the patch centered at (row, col).
Eigen::VectorXf extract_features(const ChannelStack& cs, const FeatureLayout& layout, int row, int col);

/// Selected entries of the feature vector, written to `out`.
void extract_features(const ChannelStack& cs, const FeatureLayout& layout, int row, int col,
                      std::span<const std::uint32_t> ids, std::span<float> out);

}  // namespace sedge
