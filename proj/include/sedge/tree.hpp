#pragma once

#include "sedge/channels.hpp"
#include "sedge/discretize.hpp"
#include "sedge/segpatch.hpp"
#include "sedge/split.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sedge {

/// Structured forest training settings. Defaults are the tuned settings of
/// the reference detector.
struct ForestParams {
  int n_trees_trained = 8;  // 2T
  int n_trees_eval = 4;     // T
  int m = 256;              // sampled pixel pairs per node
  int k_classes = 2;
  int pca_dims = 5;         // projection used by k-means discretization
  int max_depth = 64;
  int min_samples = 8;      // minimum samples per leaf
  double frac_features = 0.25;
  int n_patches = 1000000;  // per tree
  int n_images = 0;         // training images used; 0 = all
  double positive_fraction = 0.5;
  GainType gain = GainType::Gini;
  Discretizer discretizer = Discretizer::Pca;
  int n_thresholds = 8;
  int stride = 2;
  int d_in = 32;
  int d_out = 16;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  float threshold = 0.0f;
  std::uint32_t left = 0;   // leaf index for leaves
  std::uint32_t right = 0;

  bool operator==(const TreeNode&) const = default;
};

struct TreeLeaf {
  SegPatch seg;
  EdgePatch edge;
  std::uint32_t count = 0;  // training samples that reached the leaf

  bool operator==(const TreeLeaf&) const = default;
};

class StructTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<TreeLeaf> leaves;
  std::uint32_t n_features = 0;  // full candidate feature count

  /// Leaf index reached by a sample whose features are produced on demand.
  template <typename FeatureFn>
  std::uint32_t find_leaf(FeatureFn&& feature) const {
    std::uint32_t i = 0;
    while (!nodes[i].is_leaf) {
      const TreeNode& nd = nodes[i];
      i = feature(nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    return nodes[i].left;
  }

  /// Throws std::invalid_argument on a feature-length mismatch.
  const TreeLeaf& predict(std::span<const float> x) const;

  int depth() const;
  int n_leaves() const { return static_cast<int>(leaves.size()); }
  int n_internal() const { return static_cast<int>(nodes.size() - leaves.size()); }

  bool operator==(const StructTree&) const = default;
};

/// Training data of one tree: features restricted to the tree's subset.
struct TrainingSet {
  std::uint32_t n_features_total = 0;
  std::vector<std::uint32_t> feature_ids;  // ascending; column c of x is feature_ids[c]
  Eigen::MatrixXf x;                       // samples x feature_ids.size()
  std::vector<SegPatch> labels;
};

/// round(frac * n_total) distinct feature ids, ascending.
std::vector<std::uint32_t> select_feature_subset(std::uint32_t n_total, double frac, Rng& rng);

/// Train one structured tree. Every node draws its own pair sampling and
/// discretization from a seed derived from (tree_seed, path), so the result
/// depends only on the inputs.
StructTree train_tree(const TrainingSet& data, const ForestParams& params, std::uint64_t tree_seed);

/// A trained model: channel settings, training settings and 2T trees.
struct Forest {
  ChannelParams channels;
  ForestParams params;
  int n_input_planes = 3;
  std::vector<StructTree> trees;

  FeatureLayout layout() const {
    return FeatureLayout(params.d_in, channels, channel_count(n_input_planes, channels));
  }
  bool operator==(const Forest&) const = default;
};

}  // namespace sedge
