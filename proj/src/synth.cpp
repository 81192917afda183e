#include "sedge/synth.hpp"

#include "sedge/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sedge {

SynthCorpus synth_corpus(std::uint64_t seed, const SynthOptions& opts) {
  if (opts.n_images < 1) throw std::invalid_argument("n_images must be >= 1");
  if (opts.height < 1 || opts.width < 1) throw std::invalid_argument("image size must be positive");
  if (opts.min_segments < 1 || opts.max_segments < opts.min_segments)
    throw std::invalid_argument("invalid segment count range");
  SynthCorpus out;
  const int h = opts.height;
  const int w = opts.width;
  for (int n = 0; n < opts.n_images; ++n) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(n)));
    const int k = opts.min_segments +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.max_segments - opts.min_segments + 1)));
    std::vector<std::array<double, 2>> sites(k);
    for (auto& s : sites) s = {rng.uniform(0.0, h), rng.uniform(0.0, w)};
    std::vector<std::array<double, 3>> colors;
    for (int s = 0; s < k; ++s) {
      std::array<double, 3> c{};
      for (int attempt = 0;; ++attempt) {
        for (auto& v : c) v = rng.uniform(0.1, 0.9);
        const bool far = std::all_of(colors.begin(), colors.end(), [&](const auto& o) {
          return std::hypot(c[0] - o[0], c[1] - o[1], c[2] - o[2]) >= opts.min_color_dist;
        });
        if (far || attempt >= 1000) break;
      }
      colors.push_back(c);
    }
    // Illumination: a random planar ramp centred on the image.
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double gy = std::sin(angle);
    const double gx = std::cos(angle);
    const double span = std::abs(gy) * h + std::abs(gx) * w;

    LabelMap labels(h, w);
    Image img = Image::zeros(h, w, 3);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int s = 0; s < k; ++s) {
          const double d = std::pow(r + 0.5 - sites[s][0], 2) + std::pow(c + 0.5 - sites[s][1], 2);
          if (d < best_d) {
            best_d = d;
            best = s;
          }
        }
        labels(r, c) = best;
        const double ramp = opts.illumination * (((r + 0.5 - h / 2.0) * gy + (c + 0.5 - w / 2.0) * gx) / span);
        for (int p = 0; p < 3; ++p) {
          const double v = colors[best][p] + ramp + opts.noise_sigma * rng.normal();
          img.planes[p](r, c) = static_cast<float>(std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0);
        }
      }
    // Cells can be empty; relabel to a compact range.
    std::vector<int> remap(k, -1);
    int next = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      auto& v = labels.data()[i];
      if (remap[v] < 0) remap[v] = next++;
      v = remap[v];
    }
    out.images.push_back(std::move(img));
    out.truths.push_back(GroundTruth::from_segmentations({labels}));
  }
  return out;
}

}  // namespace sedge
