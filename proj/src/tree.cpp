#include "sedge/tree.hpp"

#include "sedge/mapping.hpp"
#include "sedge/medoid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace sedge {

void ForestParams::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (n_trees_eval < 1) fail("n_trees_eval must be >= 1");
  if (n_trees_trained != 2 * n_trees_eval) fail("n_trees_trained must equal 2 * n_trees_eval");
  if (k_classes < 2 || k_classes > 32) fail("k_classes must be in [2,32]");
  if (pca_dims < 1 || pca_dims > 5) fail("pca_dims must be in [1,5]");
  if (max_depth < 0) fail("max_depth must be >= 0");
  if (min_samples < 1) fail("min_samples must be >= 1");
  if (!(frac_features > 0.0 && frac_features <= 1.0)) fail("frac_features must be in (0,1]");
  if (n_patches < 1) fail("n_patches must be >= 1");
  if (n_images < 0) fail("n_images must be >= 0");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) fail("positive_fraction must be in [0,1]");
  if (n_thresholds < 1) fail("n_thresholds must be >= 1");
  if (stride < 1) fail("stride must be >= 1");
  if (d_out < 2 || d_out > 255) fail("d_out must be in [2,255]");
  if (d_in < d_out || (d_in - d_out) % 2 != 0) fail("d_in must be >= d_out with an even difference");
  if (d_out % stride != 0) fail("stride must divide d_out");
  if (m < 1 || m > total_pairs(d_out)) fail("m must be in [1, C(d_out^2, 2)]");
}

const TreeLeaf& StructTree::predict(std::span<const float> x) const {
  if (x.size() != n_features) throw std::invalid_argument("feature vector length does not match tree");
  return leaves[find_leaf([&](std::uint32_t f) { return x[f]; })];
}

int StructTree::depth() const {
  if (nodes.empty()) return 0;
  std::function<int(std::uint32_t)> walk = [&](std::uint32_t i) -> int {
    if (nodes[i].is_leaf) return 0;
    return 1 + std::max(walk(nodes[i].left), walk(nodes[i].right));
  };
  return walk(0);
}

std::vector<std::uint32_t> select_feature_subset(std::uint32_t n_total, double frac, Rng& rng) {
  const auto count = std::clamp<std::uint32_t>(static_cast<std::uint32_t>(std::lround(frac * n_total)), 1, n_total);
  std::vector<std::uint32_t> ids(n_total);
  std::iota(ids.begin(), ids.end(), 0u);
  for (std::uint32_t i = 0; i < count; ++i)
    std::swap(ids[i], ids[i + rng.below(n_total - i)]);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params) : data_(data), params_(params) {
    columns_.resize(data.feature_ids.size());
    std::iota(columns_.begin(), columns_.end(), 0u);
    search_.n_thresholds = params.n_thresholds;
    search_.gain = params.gain;
    search_.k_classes = params.k_classes;
    search_.min_child = params.min_samples;
  }

  std::uint32_t build(std::vector<std::uint32_t> rows, int depth, std::uint64_t seed) {
    const auto index = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    Rng rng(seed);
    std::optional<SplitCandidate> split;
    int medoid = 0;
    {
      const PairSampling phi = sample_pairs(params_.d_out, params_.m, rng);
      const Eigen::MatrixXf z = mapping_matrix(data_.labels, rows, phi);
      const bool can_split = depth < params_.max_depth && rows.size() >= 2 * static_cast<size_t>(params_.min_samples);
      if (can_split) {
        const DiscreteLabels disc = discretize(z, params_.k_classes, params_.discretizer, rng, params_.pca_dims);
        const bool one_class = std::all_of(disc.labels.begin(), disc.labels.end(),
                                           [&](std::uint8_t l) { return l == disc.labels[0]; });
        if (!disc.degenerate && !one_class) {
          split = best_split(data_.x, rows, disc.labels, columns_, search_, rng);
          if (split && split->gain <= 1e-12) split.reset();
        }
      }
      if (!split) medoid = medoid_index(z);
    }
    if (!split) {
      TreeLeaf leaf;
      leaf.seg = data_.labels[rows[medoid]];
      leaf.edge = derive_edges(leaf.seg);
      leaf.count = static_cast<std::uint32_t>(rows.size());
      tree_.nodes[index] = TreeNode{true, 0, 0.0f, static_cast<std::uint32_t>(tree_.leaves.size()), 0};
      tree_.leaves.push_back(std::move(leaf));
      return index;
    }
    const std::uint32_t col = split->split.feature;
    const float tau = split->split.threshold;
    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : rows) (data_.x(r, col) < tau ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const std::uint32_t l = build(std::move(left_rows), depth + 1, mix_seed(seed, 1));
    const std::uint32_t r = build(std::move(right_rows), depth + 1, mix_seed(seed, 2));
    tree_.nodes[index] = TreeNode{false, data_.feature_ids[col], tau, l, r};
    return index;
  }

  StructTree take() { return std::move(tree_); }

 private:
  const TrainingSet& data_;
  const ForestParams& params_;
  std::vector<std::uint32_t> columns_;
  SplitSearch search_;
  StructTree tree_;
};

}  // namespace

StructTree train_tree(const TrainingSet& data, const ForestParams& params, std::uint64_t tree_seed) {
  params.validate();
  if (data.labels.empty()) throw std::invalid_argument("train_tree: empty training set");
  if (data.x.rows() != static_cast<Eigen::Index>(data.labels.size()) ||
      data.x.cols() != static_cast<Eigen::Index>(data.feature_ids.size()))
    throw std::invalid_argument("train_tree: feature matrix shape mismatch");
  for (const auto& y : data.labels)
    if (y.side() != params.d_out) throw std::invalid_argument("train_tree: label side does not match d_out");
  TreeBuilder builder(data, params);
  std::vector<std::uint32_t> rows(data.labels.size());
  std::iota(rows.begin(), rows.end(), 0u);
  builder.build(std::move(rows), 0, mix_seed(tree_seed, 0x5eed));
  StructTree tree = builder.take();
  tree.n_features = data.n_features_total;
  return tree;
}

}  // namespace sedge
