#pragma once

#include "sedge/eval.hpp"

#include <cstdint>
#include <vector>

namespace sedge {

struct SynthOptions {
  int n_images = 10;
  int height = 128;
  int width = 128;
  int min_segments = 2;
  int max_segments = 8;
  double noise_sigma = 0.02;
  double illumination = 0.15;    // peak-to-peak amplitude of the smooth ramp
  double min_color_dist = 0.25;  // minimum RGB distance between segment colours
};

struct SynthCorpus {
  std::vector<Image> images;
  std::vector<GroundTruth> truths;  // one annotator per image
};

/// Random Voronoi partitions with flat colours, illumination ramp and
/// Gaussian noise. Pixel values are multiples of 1/255, so an 8-bit PNG
/// round trip is exact. Deterministic per seed.
SynthCorpus synth_corpus(std::uint64_t seed, const SynthOptions& opts);

}  // namespace sedge
