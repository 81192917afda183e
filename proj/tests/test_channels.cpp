#include "sedge/channels.hpp"
#include "sedge/filters.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>

using namespace sedge;
using sedge::testing::constant_image;
using sedge::testing::random_image;
using sedge::testing::random_plane;

namespace {

/// Textbook CIE-LUV of linear RGB under the same primaries, as an oracle.
std::array<double, 3> luv_reference(double r, double g, double b) {
  const double X = 0.430574 * r + 0.341550 * g + 0.178325 * b;
  const double Y = 0.222015 * r + 0.706655 * g + 0.071330 * b;
  const double Z = 0.020183 * r + 0.129553 * g + 0.939180 * b;
  const double Xn = 0.430574 + 0.341550 + 0.178325;
  const double Yn = 0.222015 + 0.706655 + 0.071330;
  const double Zn = 0.020183 + 0.129553 + 0.939180;
  const double yr = Y / Yn;  // Yn is 1 up to rounding of the matrix
  const double eps = 216.0 / 24389.0;
  const double L = yr > eps ? 116.0 * std::cbrt(Y) - 16.0 : 24389.0 / 27.0 * Y;
  const double d = X + 15 * Y + 3 * Z;
  const double dn = Xn + 15 * Yn + 3 * Zn;
  const double u = d > 0 ? 13 * L * (4 * X / d - 4 * Xn / dn) : 0.0;
  const double v = d > 0 ? 13 * L * (9 * Y / d - 9 * Yn / dn) : 0.0;
  return {L / 270.0, (u + 88.0) / 270.0, (v + 134.0) / 270.0};
}

}  // namespace

TEST(RgbToLuv, BlackHasZeroLightness) {
  const Image luv = rgb_to_luv(constant_image(2, 2, 0, 0, 0));
  EXPECT_EQ(luv.planes[0](0, 0), 0.0f);
}

TEST(RgbToLuv, WhiteSitsOnTheWhitePoint) {
  const Image luv = rgb_to_luv(constant_image(2, 2, 1, 1, 1));
  EXPECT_NEAR(luv.planes[1](0, 0), kLuvOffsetU * kLuvScale, 1e-6);
  EXPECT_NEAR(luv.planes[2](0, 0), kLuvOffsetV * kLuvScale, 1e-6);
  EXPECT_NEAR(luv.planes[0](0, 0), 100.0 / 270.0, 1e-4);
}

TEST(RgbToLuv, LightnessMonotone) {
  const Image a = rgb_to_luv(constant_image(1, 1, 0.5f, 0.5f, 0.5f));
  const Image b = rgb_to_luv(constant_image(1, 1, 0.25f, 0.25f, 0.25f));
  EXPECT_GT(a.planes[0](0, 0), b.planes[0](0, 0));
}

TEST(RgbToLuv, MatchesReferenceAndStaysInUnitRange) {
  const Image rgb = random_image(16, 16, 3, 9);
  const Image luv = rgb_to_luv(rgb);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      const auto ref = luv_reference(rgb.planes[0](r, c), rgb.planes[1](r, c), rgb.planes[2](r, c));
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(luv.planes[k](r, c), ref[k], 1e-5);
        EXPECT_GE(luv.planes[k](r, c), 0.0f);
        EXPECT_LE(luv.planes[k](r, c), 1.0f);
      }
    }
  // Saturated primaries are the extremes of u and v.
  for (auto [r, g, b] : {std::array<float, 3>{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) {
    const Image x = rgb_to_luv(constant_image(1, 1, r, g, b));
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(x.planes[k](0, 0), 0.0f);
      EXPECT_LE(x.planes[k](0, 0), 1.0f);
    }
  }
}

TEST(RgbToLuv, RejectsNonRgb) {
  try {
    rgb_to_luv(Image::zeros(4, 4, 1));
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "luv requires rgb");
  }
}

TEST(Gradient, ConstantImageHasZeroMagnitude) {
  const GradientResult g = gradient_mag_orient(constant_image(12, 12, 0.3f, 0.6f, 0.9f), 4);
  EXPECT_EQ(g.magnitude.abs().maxCoeff(), 0.0f);
}

TEST(Gradient, VerticalStepHasHorizontalGradient) {
  Image img = Image::zeros(10, 10, 1);
  img.planes[0].rightCols(5).setConstant(1.0f);
  const GradientResult g = gradient_mag_orient(img, 0);
  for (int r = 0; r < 10; ++r) {
    EXPECT_GT(g.magnitude(r, 5), 0.0f);
    const double o = g.orientation(r, 5);
    EXPECT_LT(std::min(o, std::numbers::pi - o), 1e-6);
  }
}

TEST(Gradient, RampInteriorMagnitude) {
  const int W = 20;
  Image img = Image::zeros(8, W, 1);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < W; ++c) img.planes[0](r, c) = static_cast<float>(c) / W;
  const GradientResult g = gradient_mag_orient(img, 0);
  for (int r = 0; r < 8; ++r)
    for (int c = 1; c < W - 1; ++c) EXPECT_NEAR(g.magnitude(r, c), 1.0 / W, 1e-6);
}

TEST(Gradient, OrientationRangeAndMaxPlane) {
  const Image img = random_image(16, 16, 3, 4);
  const GradientResult g = gradient_mag_orient(img, 0);
  EXPECT_GE(g.orientation.minCoeff(), 0.0f);
  EXPECT_LT(g.orientation.maxCoeff(), static_cast<float>(std::numbers::pi));
  // Magnitude equals the max over planes of the per-plane magnitude.
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      double best = 0.0;
      for (const auto& p : img.planes) {
        const double gx = 0.5 * (p(r, std::min(c + 1, 15)) - p(r, std::max(c - 1, 0)));
        const double gy = 0.5 * (p(std::min(r + 1, 15), c) - p(std::max(r - 1, 0), c));
        best = std::max(best, std::hypot(gx, gy));
      }
      EXPECT_NEAR(g.magnitude(r, c), best, 1e-6);
    }
}

TEST(Gradient, NormalizationFormula) {
  const Image img = random_image(24, 24, 1, 5);
  const GradientResult raw = gradient_mag_orient(img, 0);
  const GradientResult norm = gradient_mag_orient(img, 4);
  const FloatPlane want = raw.magnitude / (triangle_blur(raw.magnitude, 4) + kGradientNormEps);
  EXPECT_LT((norm.magnitude - want).abs().maxCoeff(), 1e-5f);
}

TEST(Gradient, InvariantToConstantOffset) {
  Image a = random_image(16, 16, 3, 6);
  for (auto& p : a.planes) p *= 0.5f;
  Image b = a;
  for (auto& p : b.planes) p += 0.25f;
  const GradientResult ga = gradient_mag_orient(a, 4);
  const GradientResult gb = gradient_mag_orient(b, 4);
  EXPECT_LT((ga.magnitude - gb.magnitude).abs().maxCoeff(), 1e-5f);
}

TEST(OrientSplit, SingleBinIsMagnitude) {
  const FloatPlane m = random_plane(8, 8, 1);
  const FloatPlane o = random_plane(8, 8, 2, 0.0f, 3.14f);
  const auto bins = orient_split(m, o, 1);
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_TRUE((bins[0] == m).all());
}

TEST(OrientSplit, AllInBinZero) {
  const FloatPlane m = random_plane(8, 8, 1);
  const FloatPlane o = FloatPlane::Constant(8, 8, 0.1f);
  const auto bins = orient_split(m, o, 4);
  EXPECT_TRUE((bins[0] == m).all());
  for (int b = 1; b < 4; ++b) EXPECT_EQ(bins[b].abs().maxCoeff(), 0.0f);
}

TEST(OrientSplit, BinsSumToMagnitude) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FloatPlane m = random_plane(13, 11, seed);
    const FloatPlane o = random_plane(13, 11, seed + 100, 0.0f, static_cast<float>(std::numbers::pi) - 1e-6f);
    for (int n : {1, 2, 4, 6}) {
      const auto bins = orient_split(m, o, n);
      FloatPlane sum = FloatPlane::Zero(13, 11);
      for (const auto& b : bins) sum += b;
      EXPECT_LE((sum - m).abs().maxCoeff(), 1e-6f);
    }
  }
}

TEST(ComputeChannels, ShapesForRgb32) {
  const ChannelStack cs = compute_channels(random_image(32, 32, 3, 1), ChannelParams{});
  ASSERT_EQ(cs.n_channels(), 13);
  EXPECT_EQ(cs.height_ds(), 16);
  EXPECT_EQ(cs.width_ds(), 16);
  EXPECT_EQ(cs.ss.size(), 13u);
  const std::vector<std::string> names = {"luv_l",         "luv_u",         "luv_v",         "mag_full",
                                          "mag_half",      "orient_full_0", "orient_full_1", "orient_full_2",
                                          "orient_full_3", "orient_half_0", "orient_half_1", "orient_half_2",
                                          "orient_half_3"};
  EXPECT_EQ(cs.channel_names, names);
  for (int k = 0; k < 13; ++k) {
    EXPECT_TRUE(cs.channels[k].isFinite().all());
    if (k >= 3) EXPECT_GE(cs.channels[k].minCoeff(), 0.0f);
  }
}

TEST(ComputeChannels, ConstantImageHasNoGradientChannels) {
  const ChannelStack cs = compute_channels(constant_image(32, 32, 0.2f, 0.5f, 0.7f), ChannelParams{});
  for (int k = 3; k < 13; ++k) EXPECT_EQ(cs.channels[k].abs().maxCoeff(), 0.0f) << cs.channel_names[k];
}

TEST(ComputeChannels, ExtraPlaneAddsElevenChannels) {
  EXPECT_EQ(channel_count(3, ChannelParams{}), 13);
  EXPECT_EQ(channel_count(4, ChannelParams{}), 24);
  EXPECT_EQ(channel_count(1, ChannelParams{}), 11);
  const ChannelStack cs = compute_channels(random_image(32, 32, 4, 2), ChannelParams{});
  EXPECT_EQ(cs.n_channels(), 24);
  EXPECT_EQ(cs.channel_names[13], "extra_0");
}

TEST(ComputeChannels, OddSizesArePaddedToShrinkMultiple) {
  const ChannelStack cs = compute_channels(random_image(33, 21, 3, 3), ChannelParams{});
  EXPECT_EQ(cs.height_ds(), 17);
  EXPECT_EQ(cs.width_ds(), 11);
  EXPECT_EQ(cs.image_height, 33);
}

TEST(ComputeChannels, Deterministic) {
  const Image img = random_image(40, 36, 3, 4);
  const ChannelStack a = compute_channels(img, ChannelParams{}, Padding{22, 23, 22, 23});
  const ChannelStack b = compute_channels(img, ChannelParams{}, Padding{22, 23, 22, 23});
  ASSERT_EQ(a.n_channels(), b.n_channels());
  for (int k = 0; k < a.n_channels(); ++k) {
    ASSERT_EQ(a.channels[k].size(), b.channels[k].size());
    EXPECT_EQ(std::memcmp(a.channels[k].data(), b.channels[k].data(), a.channels[k].size() * sizeof(float)), 0);
    EXPECT_EQ(std::memcmp(a.ss[k].data(), b.ss[k].data(), a.ss[k].size() * sizeof(float)), 0);
  }
}

TEST(ComputeChannels, ZeroSizedImageThrows) {
  EXPECT_THROW(compute_channels(Image{}, ChannelParams{}), std::invalid_argument);
  EXPECT_THROW(compute_channels(Image::zeros(0, 5, 3), ChannelParams{}), std::invalid_argument);
}

TEST(Features, DefaultLengthIs7228) {
  const FeatureLayout layout(32, ChannelParams{}, 13);
  EXPECT_EQ(layout.n_lookup(), 3328);
  EXPECT_EQ(layout.n_pairs(), 300);
  EXPECT_EQ(layout.size(), 7228);
  const ChannelStack cs = compute_channels(random_image(32, 32, 3, 1), ChannelParams{});
  EXPECT_EQ(extract_features(cs, layout, 16, 16).size(), 7228);
}

TEST(Features, CountIdentityAcrossParameters) {
  for (int shrink : {1, 2, 4})
    for (int grid : {1, 3, 5})
      for (int orients : {1, 4, 6}) {
        ChannelParams p;
        p.shrink = shrink;
        p.grid_cells = grid;
        p.n_orients = orients;
        const int K = channel_count(3, p);
        const FeatureLayout layout(32, p, K);
        const int side = 32 / shrink;
        const int g2 = grid * grid;
        EXPECT_EQ(layout.size(), side * side * K + g2 * (g2 - 1) / 2 * K);
      }
}

TEST(Features, LayoutOrderingMatchesDocumentation) {
  const Image img = random_image(48, 48, 3, 8);
  const ChannelStack cs = compute_channels(img, ChannelParams{}, Padding{8, 8, 8, 8});
  const FeatureLayout layout(32, ChannelParams{}, 13);
  const Eigen::VectorXf f = extract_features(cs, layout, 24, 24);
  const auto [r0, c0] = patch_origin_ds(cs, layout, 24, 24);
  EXPECT_EQ(r0, 8);
  EXPECT_EQ(f[5 * 256 + 3 * 16 + 7], cs.channels[5](r0 + 3, c0 + 7));
  // Pair (0, 24) of channel 2: top-left minus bottom-right cell.
  const auto& b = layout.cell_bounds();
  ASSERT_EQ(b, (std::vector<int>{0, 3, 6, 10, 13, 16}));
  auto cell = [&](int k, int cy, int cx) {
    double s = 0.0;
    for (int r = b[cy]; r < b[cy + 1]; ++r)
      for (int c = b[cx]; c < b[cx + 1]; ++c) s += cs.ss[k](r0 + r, c0 + c);
    return s / ((b[cy + 1] - b[cy]) * (b[cx + 1] - b[cx]));
  };
  const int pair_index = 23;  // pairs from cell 0 are (0,1)..(0,24)
  EXPECT_NEAR(f[3328 + 2 * 300 + pair_index], cell(2, 0, 0) - cell(2, 4, 4), 1e-6);
  EXPECT_NEAR(f[3328 + 300 + 24], cell(1, 0, 1) - cell(1, 0, 2), 1e-6);  // pair (1,2)
}

TEST(Features, ConstantImagePairwiseExactlyZero) {
  const ChannelStack cs = compute_channels(constant_image(64, 64, 0.3f, 0.6f, 0.2f), ChannelParams{});
  const FeatureLayout layout(32, ChannelParams{}, 13);
  for (int center : {16, 32, 48}) {
    const Eigen::VectorXf f = extract_features(cs, layout, center, center);
    for (int i = layout.n_lookup(); i < layout.size(); ++i) ASSERT_EQ(f[i], 0.0f) << "feature " << i;
  }
}

TEST(Features, TranslationMovesFeatures) {
  // Shifting by a multiple of shrink moves the pixel-lookup window with it.
  const Image a = random_image(96, 96, 3, 10);
  Image b = a;
  for (auto& p : b.planes) p = shift_reflect(p, 4, 4);
  const ChannelParams params;
  const FeatureLayout layout(32, params, 13);
  const Eigen::VectorXf fa = extract_features(compute_channels(a, params), layout, 48, 48);
  const Eigen::VectorXf fb = extract_features(compute_channels(b, params), layout, 52, 52);
  EXPECT_LT((fa - fb).cwiseAbs().maxCoeff(), 1e-5f);
}

TEST(Features, OutOfBoundsThrows) {
  const ChannelStack cs = compute_channels(random_image(32, 32, 3, 1), ChannelParams{});
  const FeatureLayout layout(32, ChannelParams{}, 13);
  EXPECT_THROW(extract_features(cs, layout, 14, 16), std::out_of_range);
  EXPECT_THROW(extract_features(cs, layout, 18, 16), std::out_of_range);
  EXPECT_THROW(extract_features(cs, layout, 17, 16), std::out_of_range);  // off the shrink grid
}

TEST(Features, SubsetMatchesFullVector) {
  const ChannelStack cs = compute_channels(random_image(40, 40, 3, 2), ChannelParams{}, Padding{8, 8, 8, 8});
  const FeatureLayout layout(32, ChannelParams{}, 13);
  const Eigen::VectorXf full = extract_features(cs, layout, 20, 22);
  const std::vector<std::uint32_t> ids = {0, 17, 3327, 3328, 5000, 7227};
  std::vector<float> out(ids.size());
  extract_features(cs, layout, 20, 22, ids, out);
  for (size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(out[i], full[ids[i]]);
}
