#include "sedge/channels.hpp"

#include "sedge/filters.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sedge {

namespace {

// Linear RGB -> XYZ (D65), the same matrix used by the classic channel
// feature toolboxes.
constexpr double kRgbToXyz[3][3] = {
    {0.430574, 0.341550, 0.178325},
    {0.222015, 0.706655, 0.071330},
    {0.020183, 0.129553, 0.939180},
};

struct WhitePoint {
  double un;
  double vn;
};

WhitePoint white_point() {
  const double x = kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2];
  const double y = kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2];
  const double z = kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2];
  const double d = x + 15 * y + 3 * z;
  return {4 * x / d, 9 * y / d};
}

struct PlaneGroup {
  std::vector<FloatPlane> planes;  // color-like planes of this modality
  std::string suffix;
  bool luv = false;
};

std::vector<PlaneGroup> split_groups(const Image& img) {
  std::vector<PlaneGroup> groups;
  const int n = img.n_planes();
  const int first = n >= 3 ? 3 : 1;
  PlaneGroup g0;
  if (first == 3) {
    Image rgb({img.planes[0], img.planes[1], img.planes[2]});
    g0.planes = rgb_to_luv(rgb).planes;
    g0.luv = true;
  } else {
    g0.planes = {img.planes[0]};
  }
  groups.push_back(std::move(g0));
  if (n > first) {
    PlaneGroup g1;
    g1.planes.assign(img.planes.begin() + first, img.planes.end());
    g1.suffix = "_x";
    groups.push_back(std::move(g1));
  }
  return groups;
}

}  // namespace

void ChannelParams::validate() const {
  if (shrink < 1) throw std::invalid_argument("shrink must be >= 1");
  if (n_orients < 1) throw std::invalid_argument("n_orients must be >= 1");
  if (norm_radius < 0 || channel_blur < 0 || ss_blur < 0)
    throw std::invalid_argument("blur radii must be >= 0");
  if (grid_cells < 1 || grid_cells > 16) throw std::invalid_argument("grid_cells must be in [1,16]");
}

Image rgb_to_luv(const Image& rgb) {
  if (rgb.n_planes() != 3) throw std::invalid_argument("luv requires rgb");
  const int h = rgb.height();
  const int w = rgb.width();
  const WhitePoint wp = white_point();
  constexpr double kappa = 29.0 * 29.0 * 29.0 / 27.0;
  constexpr double y_knee = 8.0 / kappa;
  Image out = Image::zeros(h, w, 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double px[3] = {rgb.planes[0](r, c), rgb.planes[1](r, c), rgb.planes[2](r, c)};
      double xyz[3];
      for (int i = 0; i < 3; ++i)
        xyz[i] = kRgbToXyz[i][0] * px[0] + kRgbToXyz[i][1] * px[1] + kRgbToXyz[i][2] * px[2];
      const double lum = xyz[1] > y_knee ? 116.0 * std::cbrt(xyz[1]) - 16.0 : xyz[1] * kappa;
      const double denom = xyz[0] + 15 * xyz[1] + 3 * xyz[2];
      double u = 0.0;
      double v = 0.0;
      if (denom > 1e-12) {
        u = 13.0 * lum * (4 * xyz[0] / denom - wp.un);
        v = 13.0 * lum * (9 * xyz[1] / denom - wp.vn);
      }
      out.planes[0](r, c) = static_cast<float>(lum * kLuvScale);
      out.planes[1](r, c) = static_cast<float>((u + kLuvOffsetU) * kLuvScale);
      out.planes[2](r, c) = static_cast<float>((v + kLuvOffsetV) * kLuvScale);
    }
  }
  return out;
}

GradientResult gradient_mag_orient(const Image& planes, int norm_radius) {
  if (planes.empty()) throw std::invalid_argument("gradient requires at least one plane");
  const int h = planes.height();
  const int w = planes.width();
  FloatPlane best_sq = FloatPlane::Constant(h, w, -1.0f);
  FloatPlane best_gx = FloatPlane::Zero(h, w);
  FloatPlane best_gy = FloatPlane::Zero(h, w);
  FloatPlane gx, gy;
  for (const auto& p : planes.planes) {
    central_gradient(p, gx, gy);
    const FloatPlane sq = gx.square() + gy.square();
    for (int i = 0; i < sq.size(); ++i) {
      if (sq.data()[i] > best_sq.data()[i]) {
        best_sq.data()[i] = sq.data()[i];
        best_gx.data()[i] = gx.data()[i];
        best_gy.data()[i] = gy.data()[i];
      }
    }
  }
  GradientResult res;
  res.magnitude = best_sq.sqrt();
  res.orientation.resize(h, w);
  const double pi = std::numbers::pi;
  for (int i = 0; i < res.orientation.size(); ++i) {
    double o = 0.0;
    if (best_sq.data()[i] > 1e-20f) {
      o = std::atan2(static_cast<double>(best_gy.data()[i]), static_cast<double>(best_gx.data()[i]));
      if (o < 0) o += pi;
      if (o >= pi) o -= pi;
    }
    res.orientation.data()[i] = static_cast<float>(o);
  }
  if (norm_radius > 0) {
    const FloatPlane smooth = triangle_blur(res.magnitude, norm_radius);
    res.magnitude = res.magnitude / (smooth + kGradientNormEps);
  }
  return res;
}

std::vector<FloatPlane> orient_split(const FloatPlane& magnitude, const FloatPlane& orientation,
                                     int n_orients) {
  if (n_orients < 1) throw std::invalid_argument("n_orients must be >= 1");
  std::vector<FloatPlane> bins(n_orients, FloatPlane::Zero(magnitude.rows(), magnitude.cols()));
  const double bin_width = std::numbers::pi / n_orients;
  for (int i = 0; i < magnitude.size(); ++i) {
    int b = static_cast<int>(orientation.data()[i] / bin_width);
    b = std::clamp(b, 0, n_orients - 1);
    bins[b].data()[i] = magnitude.data()[i];
  }
  return bins;
}

int channel_count(int n_planes, const ChannelParams& params) {
  if (n_planes < 1) return 0;
  const int first = n_planes >= 3 ? 3 : 1;
  int k = first + 2 + 2 * params.n_orients;
  if (n_planes > first) k += (n_planes - first) + 2 + 2 * params.n_orients;
  return k;
}

ChannelStack compute_channels(const Image& img, const ChannelParams& params, const Padding& pad) {
  params.validate();
  if (img.empty()) throw std::invalid_argument("compute_channels: zero-sized image");
  const int align = std::lcm(params.shrink, 2);
  Padding full = pad;
  const int ph = img.height() + pad.top + pad.bottom;
  const int pw = img.width() + pad.left + pad.right;
  full.bottom += (align - ph % align) % align;
  full.right += (align - pw % align) % align;
  const Image padded = pad_reflect(img, full);
  const int h = padded.height();
  const int w = padded.width();

  std::vector<FloatPlane> full_res;
  std::vector<std::string> names;
  for (const auto& group : split_groups(padded)) {
    const Image gimg(group.planes);
    if (group.luv) {
      full_res.insert(full_res.end(), group.planes.begin(), group.planes.end());
      names.insert(names.end(), {"luv_l", "luv_u", "luv_v"});
    } else {
      for (size_t i = 0; i < group.planes.size(); ++i) {
        full_res.push_back(group.planes[i]);
        names.push_back((group.suffix.empty() ? "gray" : "extra_") +
                        (group.suffix.empty() ? std::string() : std::to_string(i)));
      }
    }
    const GradientResult g_full = gradient_mag_orient(gimg, params.norm_radius);
    Image half;
    for (const auto& p : group.planes) half.planes.push_back(downsample_box(p, 2));
    const GradientResult g_half = gradient_mag_orient(half, params.norm_radius);

    full_res.push_back(g_full.magnitude);
    names.push_back("mag_full" + group.suffix);
    full_res.push_back(upsample_nearest(g_half.magnitude, 2, h, w));
    names.push_back("mag_half" + group.suffix);
    const auto bins_full = orient_split(g_full.magnitude, g_full.orientation, params.n_orients);
    for (int b = 0; b < params.n_orients; ++b) {
      full_res.push_back(bins_full[b]);
      names.push_back("orient_full_" + std::to_string(b) + group.suffix);
    }
    // Half-scale magnitudes are binned at their native resolution and then
    // replicated up.
    const auto bins_half = orient_split(g_half.magnitude, g_half.orientation, params.n_orients);
    for (int b = 0; b < params.n_orients; ++b) {
      full_res.push_back(upsample_nearest(bins_half[b], 2, h, w));
      names.push_back("orient_half_" + std::to_string(b) + group.suffix);
    }
  }

  ChannelStack cs;
  cs.shrink = params.shrink;
  cs.image_height = img.height();
  cs.image_width = img.width();
  cs.pad = full;
  cs.channel_names = std::move(names);
  cs.channels.reserve(full_res.size());
  cs.ss.reserve(full_res.size());
  for (const auto& p : full_res) {
    cs.channels.push_back(downsample_box(triangle_blur(p, params.channel_blur), params.shrink));
    cs.ss.push_back(downsample_box(triangle_blur(p, params.ss_blur), params.shrink));
  }
  return cs;
}

FeatureLayout::FeatureLayout(int d_in, const ChannelParams& params, int n_channels)
    : d_in_(d_in), shrink_(params.shrink), n_channels_(n_channels) {
  if (d_in <= 0 || d_in % params.shrink != 0)
    throw std::invalid_argument("patch size must be a positive multiple of shrink");
  side_ = d_in / params.shrink;
  if (params.grid_cells > side_) throw std::invalid_argument("grid_cells exceeds patch window");
  n_lookup_ = side_ * side_ * n_channels;
  const int g = params.grid_cells;
  bounds_.resize(g + 1);
  for (int i = 0; i <= g; ++i)
    bounds_[i] = static_cast<int>(std::lround(static_cast<double>(i) * side_ / g));
  for (int a = 0; a < g * g; ++a)
    for (int b = a + 1; b < g * g; ++b)
      pairs_.push_back({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)});
  n_pairs_ = static_cast<int>(pairs_.size());
}

PatchFeatures::PatchFeatures(const ChannelStack& cs, const FeatureLayout& layout, int row_ds, int col_ds)
    : cs_(&cs), layout_(&layout), row_(row_ds), col_(col_ds) {
  const auto& b = layout.cell_bounds();
  const int g = static_cast<int>(b.size()) - 1;
  cell_means_.resize(static_cast<size_t>(layout.n_channels()) * g * g);
  for (int k = 0; k < layout.n_channels(); ++k) {
    const FloatPlane& p = cs.ss[k];
    for (int cy = 0; cy < g; ++cy)
      for (int cx = 0; cx < g; ++cx) {
        double sum = 0.0;
        for (int r = row_ + b[cy]; r < row_ + b[cy + 1]; ++r)
          for (int c = col_ + b[cx]; c < col_ + b[cx + 1]; ++c) sum += p(r, c);
        cell_means_[(static_cast<size_t>(k) * g + cy) * g + cx] = sum / ((b[cy + 1] - b[cy]) * (b[cx + 1] - b[cx]));
      }
  }
}

float PatchFeatures::operator()(std::uint32_t index) const {
  const int side = layout_->side();
  const std::uint32_t n_lookup = static_cast<std::uint32_t>(layout_->n_lookup());
  if (index < n_lookup) {
    const int area = side * side;
    const int k = static_cast<int>(index) / area;
    const int rem = static_cast<int>(index) % area;
    return cs_->channels[k](row_ + rem / side, col_ + rem % side);
  }
  const int q = static_cast<int>(index - n_lookup);
  const int k = q / layout_->n_pairs();
  const auto& pair = layout_->cell_pairs()[q % layout_->n_pairs()];
  const size_t base = static_cast<size_t>(k) * (layout_->cell_bounds().size() - 1) * (layout_->cell_bounds().size() - 1);
  return static_cast<float>(cell_means_[base + pair[0]] - cell_means_[base + pair[1]]);
}

std::array<int, 2> patch_origin_ds(const ChannelStack& cs, const FeatureLayout& layout, int row, int col) {
  if (layout.n_channels() != cs.n_channels())
    throw std::invalid_argument("feature layout does not match channel stack");
  const int top = row - layout.d_in() / 2 + cs.pad.top;
  const int left = col - layout.d_in() / 2 + cs.pad.left;
  if (top < 0 || left < 0 || top % cs.shrink != 0 || left % cs.shrink != 0)
    throw std::out_of_range("patch center out of bounds or off the shrink grid");
  const int r = top / cs.shrink;
  const int c = left / cs.shrink;
  if (r + layout.side() > cs.height_ds() || c + layout.side() > cs.width_ds())
    throw std::out_of_range("patch center out of bounds or off the shrink grid");
  return {r, c};
}

Eigen::VectorXf extract_features(const ChannelStack& cs, const FeatureLayout& layout, int row, int col) {
  const auto [r, c] = patch_origin_ds(cs, layout, row, col);
  const PatchFeatures f(cs, layout, r, c);
  Eigen::VectorXf out(layout.size());
  for (int i = 0; i < layout.size(); ++i) out[i] = f(static_cast<std::uint32_t>(i));
  return out;
}

void extract_features(const ChannelStack& cs, const FeatureLayout& layout, int row, int col,
                      std::span<const std::uint32_t> ids, std::span<float> out) {
  if (ids.size() != out.size()) throw std::invalid_argument("feature id/output size mismatch");
  const auto [r, c] = patch_origin_ds(cs, layout, row, col);
  const PatchFeatures f(cs, layout, r, c);
  for (size_t i = 0; i < ids.size(); ++i) out[i] = f(ids[i]);
}

}  // namespace sedge
