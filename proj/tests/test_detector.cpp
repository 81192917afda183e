#include "sedge/detector.hpp"
#include "sedge/filters.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace sedge;
using sedge::testing::constant_image;
using sedge::testing::random_image;
using sedge::testing::small_forest;

namespace {

SegPatch step_mask(int boundary_col) {
  std::vector<std::uint8_t> ids(256);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) ids[r * 16 + c] = c >= boundary_col ? 1 : 0;
  return SegPatch(16, ids);
}

/// 2T single-leaf trees. Tree k's leaf edge map is all ones, so every vote
/// lands as a 1 and edges must equal 1 wherever a pixel has any votes.
Forest constant_leaf_forest(int T) {
  Forest f;
  f.params.n_trees_eval = T;
  f.params.n_trees_trained = 2 * T;
  const std::uint32_t nf = static_cast<std::uint32_t>(f.layout().size());
  for (int k = 0; k < 2 * T; ++k) {
    StructTree t;
    t.n_features = nf;
    t.nodes = {TreeNode{}};
    EdgePatch e;
    e.side = 16;
    e.bits.assign(256, 1);
    t.leaves = {TreeLeaf{step_mask(8), e, 1}};
    f.trees.push_back(t);
  }
  return f;
}

Image two_region_image(int h, int w, int boundary_col) {
  Image img = Image::zeros(h, w, 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const bool right = c >= boundary_col;
      img.planes[0](r, c) = right ? 0.8f : 0.2f;
      img.planes[1](r, c) = right ? 0.3f : 0.6f;
      img.planes[2](r, c) = right ? 0.1f : 0.5f;
    }
  return img;
}

}  // namespace

TEST(Geometry, DefaultPaddingAndGrid) {
  const DetectGeometry g(128, 128, 2, 32, 16);
  EXPECT_EQ(g.first, -14);
  EXPECT_EQ(g.offset, 8);
  EXPECT_EQ(g.pad.top, 22);
  EXPECT_EQ(g.pad.left, 22);
  EXPECT_EQ(g.grid_rows, 71);
  // The last label window still covers the last row.
  EXPECT_GE(g.window_start(g.grid_rows - 1) + 16, 128);
  EXPECT_LE(g.window_start(g.grid_rows - 1), 127);
  EXPECT_THROW(DetectGeometry(10, 10, 3, 32, 16), std::invalid_argument);
}

TEST(TreeSchedule, CheckerboardAlternatesHalves) {
  const int T = 4;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      std::set<int> here, right, down;
      for (int t = 0; t < T; ++t) {
        here.insert(tree_index(i, j, t, T, TreeSchedule::Checkerboard));
        right.insert(tree_index(i, j + 1, t, T, TreeSchedule::Checkerboard));
        down.insert(tree_index(i + 1, j, t, T, TreeSchedule::Checkerboard));
      }
      std::set<int> all = here;
      all.insert(right.begin(), right.end());
      EXPECT_EQ(all.size(), 8u);
      EXPECT_EQ(*all.rbegin(), 7);
      all = here;
      all.insert(down.begin(), down.end());
      EXPECT_EQ(all.size(), 8u);
    }
  EXPECT_EQ(tree_index(0, 1, 0, 4, TreeSchedule::Rows), 0);
  EXPECT_EQ(tree_index(1, 0, 0, 4, TreeSchedule::Rows), 4);
}

TEST(Detect, EveryPixelReceives256Votes) {
  const Forest f = constant_leaf_forest(4);
  DetectOptions o;
  o.sharpen_steps = 0;
  const Detection d = detect_full(random_image(128, 128, 3, 1), f, o);
  EXPECT_EQ(d.votes.minCoeff(), 256);
  EXPECT_EQ(d.votes.maxCoeff(), 256);
  // Accumulated edge votes equal the vote count everywhere.
  EXPECT_EQ(d.edges.minCoeff(), 1.0f);
}

TEST(Detect, VoteCountScalesWithTreesAndStride) {
  const Forest f = constant_leaf_forest(4);
  DetectOptions o;
  o.sharpen_steps = 0;
  o.n_trees_eval = 2;
  EXPECT_EQ(detect_full(random_image(40, 36, 3, 2), f, o).votes.maxCoeff(), 128);
  o.n_trees_eval = 0;
  o.stride = 4;
  const Detection d = detect_full(random_image(40, 36, 3, 2), f, o);
  EXPECT_EQ(d.votes.minCoeff(), 64);
  EXPECT_EQ(d.votes.maxCoeff(), 64);
}

TEST(Detect, OutputShapeAndRange) {
  const Forest& f = small_forest();
  const Image img = random_image(37, 45, 3, 3);
  const EdgeProbMap e = detect(img, f, DetectOptions{});
  EXPECT_EQ(e.rows(), 37);
  EXPECT_EQ(e.cols(), 45);
  EXPECT_GE(e.minCoeff(), 0.0f);
  EXPECT_LE(e.maxCoeff(), 1.0f);
}

TEST(Detect, ConstantImageIsNearZero) {
  const Forest& f = small_forest();
  const EdgeProbMap e = detect(constant_image(64, 64, 0.4f, 0.5f, 0.6f), f, DetectOptions{});
  EXPECT_LT(e.mean(), 0.05f);
  DetectOptions ms;
  ms.multiscale = true;
  EXPECT_LT(run_detector(constant_image(64, 64, 0.4f, 0.5f, 0.6f), f, ms).mean(), 0.05f);
}

TEST(Detect, ConstantLeafForestOnConstantImageHasNoSharpeningEffect) {
  // With single-segment leaves nothing is accumulated at all.
  Forest f = constant_leaf_forest(4);
  for (auto& t : f.trees) t.leaves[0].seg = SegPatch(16, std::vector<std::uint8_t>(256, 0));
  const EdgeProbMap e = detect(constant_image(32, 32, 0.4f, 0.5f, 0.6f), f, DetectOptions{});
  EXPECT_EQ(e.maxCoeff(), 0.0f);
}

TEST(Detect, StraightBoundaryStandsOut) {
  const Forest& f = small_forest();
  const Image img = two_region_image(64, 64, 32);
  for (int steps : {0, 2}) {
    DetectOptions o;
    o.sharpen_steps = steps;
    const EdgeProbMap e = detect(img, f, o);
    float on = 0.0f;
    std::vector<float> off;
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) {
        if (c >= 31 && c <= 32)
          on = std::max(on, e(r, c));
        else
          off.push_back(e(r, c));
      }
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    const float median = off[off.size() / 2];
    EXPECT_GT(on, 0.2f) << "steps " << steps;
    EXPECT_GE(on, 5.0f * median) << "steps " << steps;
  }
}

TEST(Detect, TranslationByStrideMovesTheMap) {
  const Forest& f = small_forest();
  const Image a = random_image(80, 80, 3, 4);
  Image b = a;
  for (auto& p : b.planes) p = shift_reflect(p, 2, 2);
  DetectOptions o;
  const EdgeProbMap ea = detect(a, f, o);
  const EdgeProbMap eb = detect(b, f, o);
  // Away from the borders the channel values and votes coincide.
  const int m = 26;
  const float diff = (ea.block(m, m, 80 - 2 * m - 2, 80 - 2 * m - 2) - eb.block(m + 2, m + 2, 80 - 2 * m - 2, 80 - 2 * m - 2))
                         .abs()
                         .maxCoeff();
  EXPECT_LT(diff, 1e-6f);
}

TEST(Detect, SharpeningChangesOutput) {
  const Forest& f = small_forest();
  const Image img = sedge::synth_corpus(3, sedge::SynthOptions{1, 64, 64}).images[0];
  DetectOptions o0, o2;
  o0.sharpen_steps = 0;
  o2.sharpen_steps = 2;
  const EdgeProbMap a = detect(img, f, o0);
  const EdgeProbMap b = detect(img, f, o2);
  EXPECT_GT((a - b).abs().maxCoeff(), 0.0f);
}

TEST(Detect, Errors) {
  const Forest& f = small_forest();
  EXPECT_THROW(detect(random_image(32, 32, 1, 1), f, DetectOptions{}), std::invalid_argument);
  DetectOptions bad;
  bad.stride = 3;
  EXPECT_THROW(detect(random_image(32, 32, 3, 1), f, bad), std::invalid_argument);
  bad = DetectOptions{};
  bad.n_trees_eval = 3;
  EXPECT_THROW(detect(random_image(32, 32, 3, 1), f, bad), std::invalid_argument);
  bad = DetectOptions{};
  bad.sharpen_steps = -1;
  EXPECT_THROW(detect(random_image(32, 32, 3, 1), f, bad), std::invalid_argument);
  Forest g = f;
  g.channels.grid_cells = 3;
  EXPECT_THROW(detect(random_image(32, 32, 3, 1), g, DetectOptions{}), std::invalid_argument);
}

TEST(Detect, ThreadCountDoesNotChangeOutput) {
  const Forest& f = small_forest();
  const Image img = random_image(70, 50, 3, 8);
  DetectOptions a, b;
  a.threads = 1;
  b.threads = 3;
  EXPECT_TRUE((detect(img, f, a) == detect(img, f, b)).all());
}

TEST(Multiscale, IsMeanOfThreeScales) {
  const Forest& f = small_forest();
  const Image img = random_image(40, 48, 3, 5);
  DetectOptions o;
  const EdgeProbMap ms = multiscale_detect(img, f, o);
  Plane<double> want = Plane<double>::Zero(40, 48);
  want += resize_bilinear(detect(resize_bilinear(img, 20, 24), f, o), 40, 48).cast<double>();
  want += detect(img, f, o).cast<double>();
  want += resize_bilinear(detect(resize_bilinear(img, 80, 96), f, o), 40, 48).cast<double>();
  want /= 3.0;
  EXPECT_LT((ms.cast<double>() - want).abs().maxCoeff(), 1e-6);
  EXPECT_THROW(multiscale_detect(random_image(12, 40, 3, 1), f, o), std::invalid_argument);
}

// ---- sharpening ----

TEST(Sharpen, ZeroStepsIsIdentity) {
  const std::vector<std::vector<float>> color(1, std::vector<float>(256, 0.5f));
  const SegPatch y = step_mask(5);
  EXPECT_EQ(sharpen(color, y, 0), y);
  EXPECT_THROW(sharpen(color, y, -1), std::invalid_argument);
}

TEST(Sharpen, AlignedMaskIsFixedPoint) {
  std::vector<std::vector<float>> color(2, std::vector<float>(256));
  for (int j = 0; j < 256; ++j) {
    color[0][j] = j % 16 >= 8 ? 0.9f : 0.1f;
    color[1][j] = j % 16 >= 8 ? 0.2f : 0.4f;
  }
  for (int steps : {1, 2, 5}) EXPECT_EQ(sharpen(color, step_mask(8), steps), step_mask(8));
}

TEST(Sharpen, OffsetBoundaryMovesTowardsEdge) {
  std::vector<std::vector<float>> color(1, std::vector<float>(256));
  for (int j = 0; j < 256; ++j) color[0][j] = j % 16 >= 8 ? 1.0f : 0.0f;
  const SegPatch truth = step_mask(8);
  auto hamming = [&](const SegPatch& y) {
    int d = 0;
    for (int j = 0; j < 256; ++j) d += y[j] != truth[j];
    return d;
  };
  for (int offset : {-2, 2}) {
    const SegPatch y = step_mask(8 + offset);
    EXPECT_EQ(hamming(y), 32);
    EXPECT_LT(hamming(sharpen(color, y, 2)), hamming(y));
    EXPECT_EQ(hamming(sharpen(color, y, 2)), 0);
    EXPECT_EQ(hamming(sharpen(color, y, 1)), 16);
  }
}

TEST(Sharpen, PassNeverIncreasesObjective) {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int planes = 1 + trial % 3;
    std::vector<std::vector<float>> color(planes, std::vector<float>(256));
    for (auto& p : color)
      for (auto& v : p) v = static_cast<float>(rng.uniform());
    std::vector<std::uint8_t> ids(256);
    const int k = 2 + static_cast<int>(rng.below(4));
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) ids[r * 16 + c] = static_cast<std::uint8_t>((r / 6 + c / 5 * 2) % k);
    const SegPatch y(16, ids);
    const auto means = segment_means(color, y);
    const auto next = sharpen_pass(color, y, means);
    EXPECT_LE(sharpen_objective(color, next, means), sharpen_objective(color, y.ids(), means) + 1e-9);
    // Only moves to neighbouring segments.
    for (int j = 0; j < 256; ++j) {
      if (next[j] == y[j]) continue;
      const int r = j / 16, c = j % 16;
      const bool adj = (r > 0 && y[j - 16] == next[j]) || (r < 15 && y[j + 16] == next[j]) ||
                       (c > 0 && y[j - 1] == next[j]) || (c < 15 && y[j + 1] == next[j]);
      EXPECT_TRUE(adj);
    }
  }
}

// ---- NMS ----

TEST(Nms, BlurredLineThinsToOnePixel) {
  EdgeProbMap e = EdgeProbMap::Zero(40, 40);
  e.col(20).setConstant(1.0f);
  e = triangle_blur(e, 2);
  const EdgeProbMap t = nms(e);
  for (int r = 5; r < 35; ++r) {
    int n = 0;
    for (int c = 0; c < 40; ++c) n += t(r, c) > 0.0f;
    EXPECT_EQ(n, 1) << "row " << r;
    EXPECT_GT(t(r, 20), 0.0f);
  }
}

TEST(Nms, ThreePixelBandKeepsCentre) {
  EdgeProbMap e = EdgeProbMap::Zero(30, 30);
  e.row(14).setConstant(0.5f);
  e.row(15).setConstant(1.0f);
  e.row(16).setConstant(0.5f);
  const EdgeProbMap t = nms(e);
  for (int c = 3; c < 27; ++c) {
    EXPECT_EQ(t(15, c), 1.0f);
    EXPECT_EQ(t(14, c), 0.0f);
    EXPECT_EQ(t(16, c), 0.0f);
  }
}

TEST(Nms, DiagonalLine) {
  EdgeProbMap e = EdgeProbMap::Zero(40, 40);
  for (int i = 0; i < 40; ++i) e(i, i) = 1.0f;
  e = triangle_blur(e, 1);
  const EdgeProbMap t = nms(e);
  for (int i = 6; i < 34; ++i) {
    EXPECT_GT(t(i, i), 0.0f);
    EXPECT_EQ(t(i, i + 2), 0.0f);
    EXPECT_EQ(t(i + 2, i), 0.0f);
  }
}

TEST(Nms, NeverIncreasesAndZeroStaysZero) {
  const EdgeProbMap e = sedge::testing::random_plane(32, 32, 7);
  const EdgeProbMap t = nms(e);
  EXPECT_TRUE((t <= e).all());
  EXPECT_EQ(nms(EdgeProbMap::Zero(10, 10)).maxCoeff(), 0.0f);
}

TEST(Nms, BorderRamp) {
  EdgeProbMap e = EdgeProbMap::Zero(20, 20);
  e.col(0).setConstant(1.0f);
  e.col(10).setConstant(1.0f);
  NmsOptions o;
  o.border = 4;
  const EdgeProbMap t = nms(e, o);
  EXPECT_EQ(t(10, 0), 0.0f);
  EXPECT_EQ(t(10, 10), 1.0f);
  EXPECT_FLOAT_EQ(t(2, 10), 0.5f);
}

TEST(EdgeNormal, AxisAlignedEdges) {
  EdgeProbMap v = EdgeProbMap::Zero(21, 21);
  v.col(10).setConstant(1.0f);
  const FloatPlane nv = edge_normal(v, 2);
  EXPECT_NEAR(std::min<double>(nv(10, 10), std::numbers::pi - nv(10, 10)), 0.0, 1e-6);
  const EdgeProbMap h = v.transpose();
  const FloatPlane nh = edge_normal(h, 2);
  EXPECT_NEAR(nh(10, 10), std::numbers::pi / 2, 1e-6);
}

TEST(Nms, BinaryBoundaryMapUnchanged) {
  const SynthCorpus c = synth_corpus(21, SynthOptions{3, 64, 80});
  for (const auto& gt : c.truths) {
    const EdgeProbMap e = gt.boundaries[0].cast<float>();
    EXPECT_TRUE((nms(e) == e).all());
  }
}
