#include "sedge/detector.hpp"

#include "sedge/filters.hpp"
#include "sedge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sedge {

void DetectOptions::validate() const {
  if (sharpen_steps < 0) throw std::invalid_argument("sharpen_steps must be >= 0");
  if (stride < 0) throw std::invalid_argument("stride must be >= 1");
  if (n_trees_eval < 0) throw std::invalid_argument("n_trees_eval must be >= 1");
}

DetectGeometry::DetectGeometry(int height, int width, int stride_, int d_in_, int d_out_)
    : stride(stride_), d_in(d_in_), d_out(d_out_) {
  if (stride < 1 || d_out % stride != 0) throw std::invalid_argument("stride must divide d_out");
  if (d_in < d_out || (d_in - d_out) % 2 != 0) throw std::invalid_argument("invalid patch sizes");
  first = stride - d_out;
  offset = (d_in - d_out) / 2;
  grid_rows = (height - 1 - first) / stride + 1;
  grid_cols = (width - 1 - first) / stride + 1;
  pad.top = pad.left = offset - first;
  pad.bottom = std::max(0, window_start(grid_rows - 1) - offset + d_in - height);
  pad.right = std::max(0, window_start(grid_cols - 1) - offset + d_in - width);
}

int tree_index(int i, int j, int t, int n_trees_eval, TreeSchedule schedule) {
  const int parity = schedule == TreeSchedule::Rows ? (i & 1) : ((i + j) & 1);
  return parity * n_trees_eval + t;
}

std::vector<std::vector<double>> segment_means(std::span<const std::vector<float>> color, const SegPatch& y) {
  const int n = y.side() * y.side();
  std::vector<std::vector<double>> means(y.n_segments(), std::vector<double>(color.size(), 0.0));
  std::vector<int> count(y.n_segments(), 0);
  for (int j = 0; j < n; ++j) {
    ++count[y[j]];
    for (size_t p = 0; p < color.size(); ++p) means[y[j]][p] += color[p][j];
  }
  for (int s = 0; s < y.n_segments(); ++s)
    for (auto& v : means[s]) v /= count[s];
  return means;
}

namespace {

double dist2(std::span<const std::vector<float>> color, int j, const std::vector<double>& mu) {
  double d = 0.0;
  for (size_t p = 0; p < color.size(); ++p) {
    const double t = color[p][j] - mu[p];
    d += t * t;
  }
  return d;
}

}  // namespace

double sharpen_objective(std::span<const std::vector<float>> color, std::span<const std::uint8_t> ids,
                         const std::vector<std::vector<double>>& means) {
  double total = 0.0;
  for (size_t j = 0; j < ids.size(); ++j) total += dist2(color, static_cast<int>(j), means[ids[j]]);
  return total;
}

std::vector<std::uint8_t> sharpen_pass(std::span<const std::vector<float>> color, const SegPatch& y,
                                       const std::vector<std::vector<double>>& means) {
  const int s = y.side();
  std::vector<std::uint8_t> out(y.ids());
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) {
      const int j = r * s + c;
      const std::uint8_t own = y[j];
      std::uint8_t cand[4];
      int nc = 0;
      if (r > 0) cand[nc++] = y[j - s];
      if (r + 1 < s) cand[nc++] = y[j + s];
      if (c > 0) cand[nc++] = y[j - 1];
      if (c + 1 < s) cand[nc++] = y[j + 1];
      double best = -1.0;
      for (int q = 0; q < nc; ++q) {
        if (cand[q] == own) continue;
        if (best < 0.0) best = dist2(color, j, means[own]);
        const double d = dist2(color, j, means[cand[q]]);
        if (d < best || (d == best && cand[q] < out[j] && out[j] != own)) {
          best = d;
          out[j] = cand[q];
        }
      }
    }
  return out;
}

SegPatch sharpen(std::span<const std::vector<float>> color, const SegPatch& y, int steps) {
  if (steps < 0) throw std::invalid_argument("sharpen steps must be >= 0");
  SegPatch cur = y;
  for (int k = 0; k < steps && cur.n_segments() > 1; ++k) {
    SegPatch next(cur.side(), sharpen_pass(color, cur, segment_means(color, cur)));
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

namespace {

/// Colour planes for sharpening: LUV of the first three planes plus any
/// extra planes, or the raw planes for grayscale input.
std::vector<FloatPlane> sharpen_source(const Image& padded) {
  if (padded.n_planes() < 3) return padded.planes;
  std::vector<FloatPlane> out =
      rgb_to_luv(Image({padded.planes[0], padded.planes[1], padded.planes[2]})).planes;
  out.insert(out.end(), padded.planes.begin() + 3, padded.planes.end());
  return out;
}

}  // namespace

Detection detect_full(const Image& img, const Forest& forest, const DetectOptions& opts) {
  opts.validate();
  img.validate();
  if (img.empty()) throw std::invalid_argument("detect: zero-sized image");
  if (img.n_planes() != forest.n_input_planes)
    throw std::invalid_argument("detect: image plane count does not match the model");
  const ForestParams& fp = forest.params;
  const int T = opts.n_trees_eval > 0 ? opts.n_trees_eval : fp.n_trees_eval;
  if (static_cast<int>(forest.trees.size()) < 2 * T)
    throw std::invalid_argument("detect: model has fewer than 2T trees");
  const int stride = opts.stride > 0 ? opts.stride : fp.stride;
  if (stride % forest.channels.shrink != 0)
    throw std::invalid_argument("detect: stride must be a multiple of the channel shrink factor");

  const int h = img.height();
  const int w = img.width();
  const DetectGeometry geo(h, w, stride, fp.d_in, fp.d_out);
  const ChannelStack cs = compute_channels(img, forest.channels, geo.pad);
  const FeatureLayout layout = forest.layout();
  for (const auto& t : forest.trees)
    if (t.n_features != static_cast<std::uint32_t>(layout.size()))
      throw std::invalid_argument("detect: model feature count does not match its channel parameters");

  std::vector<FloatPlane> color;
  if (opts.sharpen_steps > 0) color = sharpen_source(pad_reflect(img, geo.pad));
  const int d = fp.d_out;
  const int shrink = forest.channels.shrink;

  // Chunks of grid rows accumulate into private integer planes, so the sum
  // is exact and independent of scheduling.
  const int threads = std::max(1, std::min(resolve_threads(opts.threads), geo.grid_rows));
  const int ph = h + geo.pad.top + geo.pad.bottom;
  const int pw = w + geo.pad.left + geo.pad.right;
  std::vector<LabelMap> acc(threads, LabelMap::Zero(ph, pw));
  parallel_for(threads, threads, [&](std::size_t chunk) {
    LabelMap& a = acc[chunk];
    std::vector<std::vector<float>> window(color.size(), std::vector<float>(d * d));
    const int i0 = static_cast<int>(chunk) * geo.grid_rows / threads;
    const int i1 = static_cast<int>(chunk + 1) * geo.grid_rows / threads;
    for (int i = i0; i < i1; ++i)
      for (int j = 0; j < geo.grid_cols; ++j) {
        const PatchFeatures f(cs, layout, stride * i / shrink, stride * j / shrink);
        const int top = stride * i + geo.offset;  // label window, padded coords
        const int left = stride * j + geo.offset;
        if (!color.empty())
          for (size_t p = 0; p < color.size(); ++p)
            for (int r = 0; r < d; ++r)
              for (int c = 0; c < d; ++c) window[p][r * d + c] = color[p](top + r, left + c);
        for (int t = 0; t < T; ++t) {
          const StructTree& tree = forest.trees[tree_index(i, j, t, T, opts.schedule)];
          const TreeLeaf& leaf = tree.leaves[tree.find_leaf(f)];
          if (leaf.seg.n_segments() < 2) continue;
          if (color.empty()) {
            for (int r = 0; r < d; ++r)
              for (int c = 0; c < d; ++c) a(top + r, left + c) += leaf.edge.bits[r * d + c];
          } else {
            const EdgePatch e = derive_edges(sharpen(window, leaf.seg, opts.sharpen_steps));
            for (int r = 0; r < d; ++r)
              for (int c = 0; c < d; ++c) a(top + r, left + c) += e.bits[r * d + c];
          }
        }
      }
  });
  for (int k = 1; k < threads; ++k) acc[0] += acc[k];

  // Every label window contributes T votes to each of its pixels.
  LabelMap votes = LabelMap::Zero(h, w);
  for (int i = 0; i < geo.grid_rows; ++i) {
    const int r0 = std::max(0, geo.window_start(i));
    const int r1 = std::min(h, geo.window_start(i) + d);
    for (int j = 0; j < geo.grid_cols; ++j) {
      const int c0 = std::max(0, geo.window_start(j));
      const int c1 = std::min(w, geo.window_start(j) + d);
      votes.block(r0, c0, r1 - r0, c1 - c0) += T;
    }
  }
  Detection out;
  out.edges.resize(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      out.edges(r, c) = std::clamp(
          static_cast<float>(static_cast<double>(acc[0](r + geo.pad.top, c + geo.pad.left)) / votes(r, c)), 0.0f,
          1.0f);
  out.votes = std::move(votes);
  return out;
}

EdgeProbMap detect(const Image& img, const Forest& forest, const DetectOptions& opts) {
  return detect_full(img, forest, opts).edges;
}

EdgeProbMap multiscale_detect(const Image& img, const Forest& forest, const DetectOptions& opts) {
  if (img.height() < 16 || img.width() < 16) throw std::invalid_argument("multiscale detection needs >= 16x16");
  const int h = img.height();
  const int w = img.width();
  Plane<double> sum = Plane<double>::Zero(h, w);
  for (const double s : {0.5, 1.0, 2.0}) {
    const int sh = std::max(1, static_cast<int>(std::lround(h * s)));
    const int sw = std::max(1, static_cast<int>(std::lround(w * s)));
    const EdgeProbMap e = detect(s == 1.0 ? img : resize_bilinear(img, sh, sw), forest, opts);
    sum += resize_bilinear(e, h, w).cast<double>();
  }
  return (sum / 3.0).cast<float>().cwiseMax(0.0f).cwiseMin(1.0f);
}

EdgeProbMap run_detector(const Image& img, const Forest& forest, const DetectOptions& opts) {
  return opts.multiscale ? multiscale_detect(img, forest, opts) : detect(img, forest, opts);
}

FloatPlane edge_normal(const EdgeProbMap& e, int blur_radius) {
  const Plane<double> b = triangle_blur(Plane<double>(e.cast<double>()), blur_radius);
  Plane<double> gx, gy, gxx, gxy, gyx, gyy;
  central_gradient(b, gx, gy);
  central_gradient(gx, gxx, gxy);
  central_gradient(gy, gyx, gyy);
  FloatPlane out(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) {
      const double a = gxx(r, c);
      const double bb = 0.5 * (gxy(r, c) + gyx(r, c));
      const double cc = gyy(r, c);
      // Eigenvector of the larger eigenvalue is at theta; the other is
      // perpendicular. Take the one with the larger magnitude.
      double theta = 0.5 * std::atan2(2.0 * bb, a - cc);
      const double mid = 0.5 * (a + cc);
      const double rad = std::hypot(0.5 * (a - cc), bb);
      if (std::abs(mid - rad) > std::abs(mid + rad)) theta += 0.5 * std::numbers::pi;
      theta = std::fmod(theta, std::numbers::pi);
      if (theta < 0) theta += std::numbers::pi;
      out(r, c) = static_cast<float>(theta);
    }
  return out;
}

EdgeProbMap nms(const EdgeProbMap& e, const NmsOptions& opts) {
  const FloatPlane normal = edge_normal(e, opts.orient_radius);
  const int h = static_cast<int>(e.rows());
  const int w = static_cast<int>(e.cols());
  EdgeProbMap out = EdgeProbMap::Zero(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const float v = e(r, c);
      if (v <= 0.0f) continue;
      const double dy = std::sin(normal(r, c));
      const double dx = std::cos(normal(r, c));
      // Interpolating equal values need not reproduce them exactly, so a
      // neighbour must exceed v by a relative margin. Plateaus survive whole.
      const double tol = 1e-6 * v;
      bool keep = true;
      for (const int s : {-1, 1})
        if (sample_bilinear(e, r + s * dy, c + s * dx) - v > tol) keep = false;
      if (!keep) continue;
      double m = opts.attenuation;
      if (opts.border > 0) {
        const int dist = std::min({r, c, h - 1 - r, w - 1 - c});
        if (dist < opts.border) m *= static_cast<double>(dist) / opts.border;
      }
      out(r, c) = static_cast<float>(std::min<double>(v, v * m));
    }
  return out;
}

}  // namespace sedge
