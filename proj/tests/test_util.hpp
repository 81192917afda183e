#pragma once

#include "sedge/commands.hpp"
#include "sedge/synth.hpp"
#include "sedge/training.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace sedge::testing {

inline FloatPlane random_plane(int h, int w, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  FloatPlane p(h, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(gen);
  return p;
}

inline Image random_image(int h, int w, int planes, std::uint64_t seed) {
  Image img;
  for (int k = 0; k < planes; ++k) img.planes.push_back(random_plane(h, w, seed * 31 + k));
  return img;
}

inline Image constant_image(int h, int w, float r, float g, float b) {
  Image img = Image::zeros(h, w, 3);
  img.planes[0].setConstant(r);
  img.planes[1].setConstant(g);
  img.planes[2].setConstant(b);
  return img;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("sedge_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// A small forest trained on a synthetic corpus; cheap enough for unit tests.
inline const Forest& small_forest() {
  static const Forest forest = [] {
    SynthOptions so;
    so.n_images = 12;
    so.height = 64;
    so.width = 64;
    const SynthCorpus c = synth_corpus(7, so);
    ForestParams p;
    p.n_trees_eval = 2;
    p.n_trees_trained = 4;
    p.n_patches = 3000;
    p.seed = 5;
    return train_forest(c.images, c.truths, p, ChannelParams{});
  }();
  return forest;
}

}  // namespace sedge::testing
