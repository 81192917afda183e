#pragma once

#include "sedge/eval.hpp"
#include "sedge/tree.hpp"

#include <functional>
#include <vector>

namespace sedge {

/// One training patch: label-window top-left (unpadded) and annotator.
struct PatchSample {
  int image = 0;
  int row = 0;
  int col = 0;
  int annotator = 0;
  bool positive = false;
};

/// Per-tree patch draw. Candidate label windows lie on the detection grid
/// and fully inside the image; each candidate takes a random annotator.
/// Every image contributes up to ceil(n_patches / n_images) samples, a
/// positive_fraction share of them positive; missing positives are not
/// replaced by negatives. `images` restricts sampling to a subset (empty:
/// all images).
std::vector<PatchSample> sample_patches(const std::vector<GroundTruth>& truths, const ForestParams& params,
                                        Rng& rng, const std::vector<int>& images = {});

struct TreeStats {
  int index = 0;
  int n_samples = 0;
  int n_positive = 0;
  int depth = 0;
  int n_leaves = 0;
  double seconds = 0.0;
};

struct TrainOptions {
  int threads = 1;
  std::function<void(const TreeStats&)> on_tree;  // called in tree order
};

/// Train all 2T trees. Tree t uses seed mix_seed(params.seed, t), so the
/// model does not depend on the thread count.
Forest train_forest(const std::vector<Image>& images, const std::vector<GroundTruth>& truths,
                    const ForestParams& params, const ChannelParams& channels, const TrainOptions& opts = {});

/// Training set of one tree built from already sampled patches.
TrainingSet build_training_set(const std::vector<Image>& images, const std::vector<GroundTruth>& truths,
                               const std::vector<PatchSample>& samples, const std::vector<std::uint32_t>& feature_ids,
                               const ForestParams& params, const ChannelParams& channels);

}  // namespace sedge
