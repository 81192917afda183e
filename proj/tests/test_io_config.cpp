#include "sedge/config.hpp"
#include "sedge/dataset.hpp"
#include "sedge/io.hpp"
#include "sedge/model_io.hpp"
#include "sedge/synth.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace sedge;
using sedge::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

// ---- PNG / raw ----

TEST(Png, RgbRoundTripIsExactAt8Bits) {
  TempDir dir("png");
  Image img = Image::zeros(7, 9, 3);
  Rng rng(1);
  for (auto& p : img.planes)
    for (int i = 0; i < p.size(); ++i) p.data()[i] = static_cast<float>(rng.below(256)) / 255.0f;
  write_png(dir.path() / "a.png", img);
  const Image back = read_png(dir.path() / "a.png");
  ASSERT_EQ(back.n_planes(), 3);
  for (int k = 0; k < 3; ++k) EXPECT_TRUE((back.planes[k] == img.planes[k]).all());
}

TEST(Png, GrayAnd16Bit) {
  TempDir dir("png16");
  const FloatPlane p = sedge::testing::random_plane(5, 6, 2);
  write_png(dir.path() / "g.png", p, 16);
  const Image back = read_png(dir.path() / "g.png");
  ASSERT_EQ(back.n_planes(), 1);
  EXPECT_LT((back.planes[0] - p).abs().maxCoeff(), 0.5f / 65535.0f + 1e-7f);
  EXPECT_THROW(write_png(dir.path() / "x.png", p, 12), std::invalid_argument);
}

TEST(Png, LabelsRoundTrip) {
  TempDir dir("labels");
  LabelMap m(4, 5);
  for (int i = 0; i < 20; ++i) m.data()[i] = i * 1000;
  write_png_labels(dir.path() / "l.png", m);
  EXPECT_TRUE((read_png_labels(dir.path() / "l.png") == m).all());
  write_png(dir.path() / "rgb.png", Image::zeros(4, 5, 3));
  EXPECT_THROW(read_png_labels(dir.path() / "rgb.png"), IoError);
}

TEST(Png, Errors) {
  TempDir dir("pngerr");
  EXPECT_THROW(read_png(dir.path() / "missing.png"), IoError);
  std::ofstream(dir.path() / "bad.png") << "not a png at all";
  EXPECT_THROW(read_png(dir.path() / "bad.png"), IoError);
}

TEST(RawPlane, RoundTripAndHeader) {
  TempDir dir("raw");
  const FloatPlane p = sedge::testing::random_plane(3, 4, 5);
  write_raw_plane(dir.path() / "p.raw", p);
  const std::string bytes = slurp(dir.path() / "p.raw");
  ASSERT_EQ(bytes.size(), 8u + 12 * 4);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 4);  // width first
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
  EXPECT_TRUE((read_raw_plane(dir.path() / "p.raw") == p).all());
  std::ofstream(dir.path() / "short.raw", std::ios::binary) << bytes.substr(0, 20);
  EXPECT_THROW(read_raw_plane(dir.path() / "short.raw"), IoError);
}

// ---- model files ----

TEST(ModelFile, HeaderLayout) {
  const auto bytes = serialize_forest(sedge::testing::small_forest());
  ASSERT_GT(bytes.size(), 16u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SEDF");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5], 0);
}

TEST(ModelFile, RoundTripIsByteIdentical) {
  TempDir dir("model");
  const Forest& f = sedge::testing::small_forest();
  save_forest(dir.path() / "m.sedf", f);
  const Forest g = load_forest(dir.path() / "m.sedf");
  EXPECT_EQ(g, f);
  save_forest(dir.path() / "n.sedf", g);
  EXPECT_EQ(slurp(dir.path() / "m.sedf"), slurp(dir.path() / "n.sedf"));
}

TEST(ModelFile, AnyFlippedByteIsRejected) {
  const auto bytes = serialize_forest(sedge::testing::small_forest());
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto b = bytes;
    const size_t pos = trial < 16 ? static_cast<size_t>(trial) : rng.below(b.size());
    b[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    EXPECT_THROW(deserialize_forest(b), DataError) << "byte " << pos;
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(deserialize_forest(truncated), DataError);
}

TEST(ModelFile, MissingFileIsIoError) {
  EXPECT_THROW(load_forest("/nonexistent/dir/model.sedf"), IoError);
}

// ---- config ----

TEST(Config, DefaultsMatchGoldenFile) {
  const std::string golden = slurp(std::filesystem::path(SEDGE_TEST_DATA) / "default_config.json");
  EXPECT_EQ(nlohmann::json::parse(config_to_json(RunConfig{})), nlohmann::json::parse(golden));
}

TEST(Config, DefaultsAreTheTunedSettings) {
  const RunConfig c;
  EXPECT_EQ(c.forest.m, 256);
  EXPECT_EQ(c.forest.k_classes, 2);
  EXPECT_EQ(c.forest.n_trees_eval, 4);
  EXPECT_EQ(c.forest.n_trees_trained, 8);
  EXPECT_EQ(c.forest.stride, 2);
  EXPECT_EQ(c.forest.d_in, 32);
  EXPECT_EQ(c.forest.d_out, 16);
  EXPECT_EQ(c.forest.min_samples, 8);
  EXPECT_EQ(c.forest.max_depth, 64);
  EXPECT_EQ(c.forest.n_patches, 1000000);
  EXPECT_DOUBLE_EQ(c.forest.frac_features, 0.25);
  EXPECT_DOUBLE_EQ(c.forest.positive_fraction, 0.5);
  EXPECT_EQ(c.detect.sharpen_steps, 2);
  EXPECT_EQ(c.channels.shrink, 2);
  EXPECT_EQ(c.channels.n_orients, 4);
  EXPECT_EQ(c.channels.grid_cells, 5);
  EXPECT_EQ(c.eval_thresholds, 99);
  EXPECT_DOUBLE_EQ(c.eval_tolerance, 0.0075);
}

TEST(Config, ParseRoundTrip) {
  RunConfig c;
  c.forest.m = 64;
  c.forest.gain = GainType::Entropy;
  c.forest.discretizer = Discretizer::Kmeans;
  c.detect.schedule = TreeSchedule::Rows;
  c.paths.model = "x.sedf";
  c.threads = 3;
  const RunConfig d = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(d), config_to_json(c));
  EXPECT_EQ(d.forest, c.forest);
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const RunConfig c = parse_config(R"({"forest": {"n_patches": 20000}})");
  EXPECT_EQ(c.forest.n_patches, 20000);
  EXPECT_EQ(c.forest.m, 256);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(R"({"forest": {"mm": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"forest": {"gain": "variance"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"forest": {"m": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_THROW(parse_config(R"({"forest": {"n_trees_trained": 5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"forest": {"k_classes": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"detect": {"sharpen_steps": -1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"eval": {"tolerance": 0}})"), ConfigError);
}

TEST(Config, SetParameterBySweepName) {
  RunConfig c;
  set_parameter(c, "n_trees", "2");
  EXPECT_EQ(c.forest.n_trees_eval, 2);
  EXPECT_EQ(c.forest.n_trees_trained, 4);
  set_parameter(c, "discretizer", "kmeans");
  EXPECT_EQ(c.forest.discretizer, Discretizer::Kmeans);
  set_parameter(c, "sharpen_steps", "1");
  EXPECT_EQ(c.detect.sharpen_steps, 1);
  try {
    set_parameter(c, "nope", "1");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& n : sweep_parameter_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
  for (const char* n : {"m", "k_classes", "discretizer", "gain", "d_in", "d_out", "n_patches", "n_images",
                        "positive_fraction", "frac_features", "n_trees", "max_depth", "min_samples",
                        "sharpen_steps", "norm_radius", "grid_cells", "n_orients", "channel_blur", "ss_blur"})
    EXPECT_NE(std::find(sweep_parameter_names().begin(), sweep_parameter_names().end(), n),
              sweep_parameter_names().end())
        << n;
}

TEST(Config, DottedOverrides) {
  RunConfig c;
  set_config_value(c, "forest.n_trees_eval", "2");
  set_config_value(c, "forest.n_trees_trained", "4");
  set_config_value(c, "threads", "2");
  set_config_value(c, "paths.model", "out.sedf");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.paths.model, "out.sedf");
  EXPECT_THROW(set_config_value(c, "forest.zzz", "1"), ConfigError);
}

// ---- datasets and synthetic corpus ----

TEST(Synth, DeterministicAndWellFormed) {
  SynthOptions o;
  o.n_images = 6;
  const SynthCorpus a = synth_corpus(4, o);
  const SynthCorpus b = synth_corpus(4, o);
  ASSERT_EQ(a.images.size(), 6u);
  double density = 0.0;
  for (int i = 0; i < 6; ++i) {
    ASSERT_EQ(a.truths[i].boundaries.size(), 1u);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE((a.images[i].planes[k] == b.images[i].planes[k]).all());
    EXPECT_TRUE((a.truths[i].segmentations[0] == b.truths[i].segmentations[0]).all());
    EXPECT_EQ(a.images[i].height(), 128);
    EXPECT_NO_THROW(a.images[i].validate());
    const int n_seg = a.truths[i].segmentations[0].maxCoeff() + 1;
    EXPECT_GE(n_seg, 2);
    EXPECT_LE(n_seg, 8);
    density += a.truths[i].boundaries[0].cast<double>().mean();
  }
  density /= 6;
  EXPECT_GE(density, 0.005);
  EXPECT_LE(density, 0.10);
  const SynthCorpus other = synth_corpus(5, o);
  EXPECT_FALSE((other.images[0].planes[0] == a.images[0].planes[0]).all());
}

TEST(Synth, SingleSegmentHasNoBoundaries) {
  SynthOptions o;
  o.n_images = 2;
  o.min_segments = o.max_segments = 1;
  o.noise_sigma = 0.0;
  const SynthCorpus c = synth_corpus(1, o);
  for (const auto& gt : c.truths) EXPECT_EQ(gt.boundaries[0].cast<int>().sum(), 0);
}

TEST(Dataset, WriteLoadRoundTrip) {
  TempDir dir("ds");
  SynthOptions o;
  o.n_images = 3;
  o.height = 40;
  o.width = 30;
  const SynthCorpus c = synth_corpus(2, o);
  write_dataset(dir.path(), c.images, c.truths, {"b", "a", "c"});
  const Dataset d = load_dataset(dir.path());
  EXPECT_EQ(d.ids, (std::vector<std::string>{"a", "b", "c"}));
  for (int k = 0; k < 3; ++k) EXPECT_TRUE((d.images[0].planes[k] == c.images[1].planes[k]).all());
  EXPECT_TRUE((d.truths[0].boundaries[0] == c.truths[1].boundaries[0]).all());
}

TEST(Dataset, Errors) {
  TempDir dir("dserr");
  EXPECT_THROW(load_dataset(dir.path()), IoError);
  std::filesystem::create_directories(dir.path() / "images");
  write_png(dir.path() / "images" / "x.png", Image::zeros(8, 8, 3));
  EXPECT_THROW(load_dataset(dir.path()), DataError);
  EXPECT_NO_THROW(load_dataset(dir.path(), false));
  std::filesystem::create_directories(dir.path() / "groundtruth" / "x");
  write_png_labels(dir.path() / "groundtruth" / "x" / "00.png", LabelMap::Zero(8, 9));
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}
