#include "sedge/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace sedge {

namespace {

class Writer {
 public:
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) {
    std::uint32_t b;
    std::memcpy(&b, &v, 4);
    u32(b);
  }
  void f64(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, 8);
    u64(b);
  }
};

class Reader {
 public:
  Reader(const std::uint8_t* data, size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() { return *take(1); }
  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() {
    const std::uint32_t b = u32();
    float v;
    std::memcpy(&v, &b, 4);
    return v;
  }
  double f64() {
    const std::uint64_t b = u64();
    double v;
    std::memcpy(&v, &b, 8);
    return v;
  }
  const std::uint8_t* take(size_t n) {
    if (size_ - pos_ < n) throw DataError("model file truncated");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == size_; }

 private:
  const std::uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, size_t n) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

void write_channels(Writer& w, const ChannelParams& p) {
  for (int v : {p.shrink, p.n_orients, p.norm_radius, p.channel_blur, p.ss_blur, p.grid_cells}) w.i32(v);
}

ChannelParams read_channels(Reader& r) {
  ChannelParams p;
  p.shrink = r.i32();
  p.n_orients = r.i32();
  p.norm_radius = r.i32();
  p.channel_blur = r.i32();
  p.ss_blur = r.i32();
  p.grid_cells = r.i32();
  return p;
}

void write_params(Writer& w, const ForestParams& p) {
  for (int v : {p.n_trees_trained, p.n_trees_eval, p.m, p.k_classes, p.pca_dims, p.max_depth, p.min_samples})
    w.i32(v);
  w.f64(p.frac_features);
  w.i32(p.n_patches);
  w.i32(p.n_images);
  w.f64(p.positive_fraction);
  w.u8(static_cast<std::uint8_t>(p.gain));
  w.u8(static_cast<std::uint8_t>(p.discretizer));
  for (int v : {p.n_thresholds, p.stride, p.d_in, p.d_out}) w.i32(v);
  w.u64(p.seed);
}

ForestParams read_params(Reader& r) {
  ForestParams p;
  p.n_trees_trained = r.i32();
  p.n_trees_eval = r.i32();
  p.m = r.i32();
  p.k_classes = r.i32();
  p.pca_dims = r.i32();
  p.max_depth = r.i32();
  p.min_samples = r.i32();
  p.frac_features = r.f64();
  p.n_patches = r.i32();
  p.n_images = r.i32();
  p.positive_fraction = r.f64();
  const std::uint8_t gain = r.u8();
  const std::uint8_t disc = r.u8();
  if (gain > 1 || disc > 1) throw DataError("model: invalid gain or discretizer code");
  p.gain = static_cast<GainType>(gain);
  p.discretizer = static_cast<Discretizer>(disc);
  p.n_thresholds = r.i32();
  p.stride = r.i32();
  p.d_in = r.i32();
  p.d_out = r.i32();
  p.seed = r.u64();
  return p;
}

}  // namespace

std::vector<std::uint8_t> serialize_forest(const Forest& forest) {
  Writer w;
  for (char c : kModelMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kModelVersion);
  write_channels(w, forest.channels);
  write_params(w, forest.params);
  w.u32(static_cast<std::uint32_t>(forest.n_input_planes));
  w.u32(static_cast<std::uint32_t>(forest.trees.size()));
  const int d = forest.params.d_out;
  const int n = d * d;
  for (const auto& t : forest.trees) {
    w.u32(t.n_features);
    w.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& nd : t.nodes) {
      w.u8(nd.is_leaf ? 1 : 0);
      w.u32(nd.feature);
      w.f32(nd.threshold);
      w.u32(nd.left);
      w.u32(nd.right);
    }
    w.u32(static_cast<std::uint32_t>(t.leaves.size()));
    for (const auto& leaf : t.leaves) {
      if (leaf.seg.side() != d || leaf.edge.side != d) throw std::invalid_argument("leaf side does not match d_out");
      for (int j = 0; j < n; ++j) w.u8(leaf.seg[j]);
      for (int b = 0; b < (n + 7) / 8; ++b) {
        std::uint8_t byte = 0;
        for (int k = 0; k < 8 && 8 * b + k < n; ++k)
          if (leaf.edge.bits[8 * b + k]) byte |= static_cast<std::uint8_t>(1u << k);
        w.u8(byte);
      }
      w.u32(leaf.count);
    }
  }
  w.u32(crc_of(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

Forest deserialize_forest(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) throw DataError("model file truncated");
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) throw DataError("not a model file (bad magic)");
  Reader crc_reader(bytes.data() + bytes.size() - 4, 4);
  if (crc_reader.u32() != crc_of(bytes.data(), bytes.size() - 4)) throw DataError("model CRC mismatch");

  Reader r(bytes.data() + 4, bytes.size() - 8);
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) throw DataError("unsupported model version " + std::to_string(version));
  Forest f;
  f.channels = read_channels(r);
  f.params = read_params(r);
  try {
    f.channels.validate();
    f.params.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model parameters invalid: ") + e.what());
  }
  f.n_input_planes = static_cast<int>(r.u32());
  if (f.n_input_planes < 1 || f.n_input_planes > 64) throw DataError("model: invalid input plane count");
  const std::uint32_t n_trees = r.u32();
  if (n_trees > 4096) throw DataError("model: implausible tree count");
  const std::uint32_t expect_features = static_cast<std::uint32_t>(f.layout().size());
  const int d = f.params.d_out;
  const int n = d * d;
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    StructTree tree;
    tree.n_features = r.u32();
    if (tree.n_features != expect_features) throw DataError("model: tree feature count mismatch");
    const std::uint32_t n_nodes = r.u32();
    if (n_nodes == 0 || n_nodes > bytes.size()) throw DataError("model: invalid node count");
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes) {
      const std::uint8_t leaf = r.u8();
      if (leaf > 1) throw DataError("model: invalid leaf flag");
      nd.is_leaf = leaf == 1;
      nd.feature = r.u32();
      nd.threshold = r.f32();
      nd.left = r.u32();
      nd.right = r.u32();
    }
    const std::uint32_t n_leaves = r.u32();
    if (n_leaves > n_nodes) throw DataError("model: invalid leaf count");
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      const auto& nd = tree.nodes[i];
      const bool ok = nd.is_leaf ? nd.left < n_leaves
                                 : nd.feature < expect_features && nd.left > i && nd.right > i &&
                                       nd.left < n_nodes && nd.right < n_nodes;
      if (!ok) throw DataError("model: invalid node links");
    }
    tree.leaves.resize(n_leaves);
    for (auto& leaf : tree.leaves) {
      const std::uint8_t* ids = r.take(n);
      leaf.seg = SegPatch(d, std::span<const std::uint8_t>(ids, n));
      if (!std::equal(ids, ids + n, leaf.seg.ids().begin())) throw DataError("model: non-canonical leaf mask");
      leaf.edge.side = d;
      leaf.edge.bits.assign(n, 0);
      const std::uint8_t* mask = r.take((n + 7) / 8);
      for (int j = 0; j < n; ++j) leaf.edge.bits[j] = (mask[j / 8] >> (j % 8)) & 1u;
      leaf.count = r.u32();
    }
    f.trees.push_back(std::move(tree));
  }
  if (!r.done()) throw DataError("model: trailing bytes");
  return f;
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  const std::vector<std::uint8_t> bytes = serialize_forest(forest);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open model " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize_forest(bytes);
}

}  // namespace sedge
