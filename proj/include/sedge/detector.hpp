#pragma once

#include "sedge/tree.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sedge {

/// Per-pixel edge probability at input resolution, values in [0,1].
using EdgeProbMap = FloatPlane;

/// Which half of the 2T trees a patch-grid cell uses.
enum class TreeSchedule : std::uint8_t {
  Checkerboard = 0,  // parity of (grid_row + grid_col)
  Rows = 1,          // parity of grid_row only
};

struct DetectOptions {
  int sharpen_steps = 2;
  bool multiscale = false;
  int stride = 0;        // 0: the model's stride
  int n_trees_eval = 0;  // 0: the model's T
  TreeSchedule schedule = TreeSchedule::Checkerboard;
  int threads = 1;

  void validate() const;
};

/// Reflect padding used by detection (and by training-time feature
/// extraction, so both see identical channels). With label windows starting
/// at stride - d_out, every pixel is covered by (d_out/stride)^2 windows.
struct DetectGeometry {
  int stride = 2;
  int d_in = 32;
  int d_out = 16;
  int first = 0;  // first label-window offset, stride - d_out
  int offset = 0;  // (d_in - d_out) / 2
  Padding pad;
  int grid_rows = 0;
  int grid_cols = 0;

  DetectGeometry(int height, int width, int stride, int d_in, int d_out);

  /// Label-window top-left of grid cell i along one axis, unpadded coords.
  int window_start(int i) const { return first + stride * i; }
};

struct Detection {
  EdgeProbMap edges;
  LabelMap votes;  // leaf edge maps summed into each pixel
};

/// Index of the tree used by tree slot t in grid cell (i, j).
int tree_index(int i, int j, int t, int n_trees_eval, TreeSchedule schedule);

/// Reassign boundary-adjacent pixels of y to the 4-neighbouring segment with
/// the nearest mean colour, `steps` times. `color` holds one d_out^2 raster
/// per colour plane. Each step recomputes the means, then updates all pixels
/// at once.
SegPatch sharpen(std::span<const std::vector<float>> color, const SegPatch& y, int steps);

/// sum_j ||x(j) - mu_{ids(j)}||^2 for the given segment means (k x planes).
double sharpen_objective(std::span<const std::vector<float>> color, std::span<const std::uint8_t> ids,
                         const std::vector<std::vector<double>>& means);
std::vector<std::vector<double>> segment_means(std::span<const std::vector<float>> color, const SegPatch& y);

/// One synchronous reassignment pass with fixed means. The result keeps the
/// segment numbering of y (it is not canonicalized).
std::vector<std::uint8_t> sharpen_pass(std::span<const std::vector<float>> color, const SegPatch& y,
                      const std::vector<std::vector<double>>& means);

Detection detect_full(const Image& img, const Forest& forest, const DetectOptions& opts);
EdgeProbMap detect(const Image& img, const Forest& forest, const DetectOptions& opts);

/// Mean of single-scale detections at half, original and double size.
EdgeProbMap multiscale_detect(const Image& img, const Forest& forest, const DetectOptions& opts);

/// Dispatches on opts.multiscale.
EdgeProbMap run_detector(const Image& img, const Forest& forest, const DetectOptions& opts);

struct NmsOptions {
  int orient_radius = 2;   // blur radius before estimating orientation
  double attenuation = 1.0;  // multiplier applied to survivors
  int border = 0;          // suppress responses within this many pixels of the border
};

/// Direction of the edge normal at each pixel, radians in [0, pi): the
/// Hessian eigenvector of largest |eigenvalue| on a blurred copy of e.
FloatPlane edge_normal(const EdgeProbMap& e, int blur_radius);

/// Thin e to 1-pixel ridges: a pixel survives when neither neighbour at
/// distance 1 along the edge normal (bilinearly sampled) exceeds it. Pixels
/// of an exact plateau all survive, so a binary boundary map is unchanged.
EdgeProbMap nms(const EdgeProbMap& e, const NmsOptions& opts = {});

}  // namespace sedge
