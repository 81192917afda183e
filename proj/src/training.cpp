#include "sedge/training.hpp"

#include "sedge/detector.hpp"
#include "sedge/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace sedge {

std::vector<PatchSample> sample_patches(const std::vector<GroundTruth>& truths, const ForestParams& params, Rng& rng,
                                        const std::vector<int>& images) {
  std::vector<int> use = images;
  if (use.empty()) {
    use.resize(truths.size());
    std::iota(use.begin(), use.end(), 0);
  }
  if (use.empty()) throw std::invalid_argument("sample_patches: no training images");
  const int d = params.d_out;
  const long per_image = (params.n_patches + static_cast<long>(use.size()) - 1) / static_cast<long>(use.size());
  const long want_pos = std::lround(per_image * params.positive_fraction);
  const long want_neg = per_image - want_pos;

  std::vector<PatchSample> out;
  for (const int im : use) {
    const GroundTruth& gt = truths.at(im);
    if (gt.segmentations.empty()) throw std::invalid_argument("sample_patches: image without annotators");
    const int h = gt.height();
    const int w = gt.width();
    const DetectGeometry geo(h, w, params.stride, params.d_in, params.d_out);
    std::vector<PatchSample> pos, neg;
    for (int i = 0; i < geo.grid_rows; ++i) {
      const int r = geo.window_start(i);
      if (r < 0 || r + d > h) continue;
      for (int j = 0; j < geo.grid_cols; ++j) {
        const int c = geo.window_start(j);
        if (c < 0 || c + d > w) continue;
        PatchSample s{im, r, c, static_cast<int>(rng.below(gt.segmentations.size())), false};
        const LabelMap& seg = gt.segmentations[s.annotator];
        const auto first = seg(r, c);
        s.positive = (seg.block(r, c, d, d) != first).any();
        (s.positive ? pos : neg).push_back(s);
      }
    }
    rng.shuffle(pos.begin(), pos.end());
    rng.shuffle(neg.begin(), neg.end());
    pos.resize(std::min<long>(want_pos, static_cast<long>(pos.size())));
    neg.resize(std::min<long>(want_neg, static_cast<long>(neg.size())));
    // Keep raster order within an image for memory locality.
    std::vector<PatchSample> both(pos);
    both.insert(both.end(), neg.begin(), neg.end());
    std::sort(both.begin(), both.end(),
              [](const PatchSample& a, const PatchSample& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    out.insert(out.end(), both.begin(), both.end());
  }
  if (static_cast<long>(out.size()) > params.n_patches) {
    std::vector<std::size_t> idx(out.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(params.n_patches);
    std::sort(idx.begin(), idx.end());
    std::vector<PatchSample> kept;
    kept.reserve(idx.size());
    for (auto i : idx) kept.push_back(out[i]);
    out = std::move(kept);
  }
  return out;
}

namespace {

struct TreeJob {
  std::uint64_t seed = 0;
  std::vector<PatchSample> samples;
  TrainingSet data;
};

/// Fill the feature matrices of several trees, computing each image's
/// channels once.
void fill_features(const std::vector<Image>& images, const ForestParams& params, const ChannelParams& channels,
                   std::vector<TreeJob*>& jobs, int threads) {
  const std::uint32_t total = static_cast<std::uint32_t>(
      FeatureLayout(params.d_in, channels, channel_count(images.at(0).n_planes(), channels)).size());
  for (auto* job : jobs) {
    job->data.n_features_total = total;
    job->data.x.resize(static_cast<Eigen::Index>(job->samples.size()),
                       static_cast<Eigen::Index>(job->data.feature_ids.size()));
  }
  // Row ranges of each image inside each job (samples are grouped by image
  // in increasing image order).
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ranges(jobs.size(),
                                                                       std::vector<std::pair<std::size_t, std::size_t>>(
                                                                           images.size(), {0, 0}));
  for (std::size_t t = 0; t < jobs.size(); ++t) {
    const auto& s = jobs[t]->samples;
    for (std::size_t i = 0; i < s.size();) {
      std::size_t k = i;
      while (k < s.size() && s[k].image == s[i].image) ++k;
      ranges[t][s[i].image] = {i, k};
      i = k;
    }
  }
  parallel_for(images.size(), threads, [&](std::size_t im) {
    bool needed = false;
    for (std::size_t t = 0; t < jobs.size(); ++t) needed |= ranges[t][im].second > ranges[t][im].first;
    if (!needed) return;
    const Image& img = images[im];
    const DetectGeometry geo(img.height(), img.width(), params.stride, params.d_in, params.d_out);
    const ChannelStack cs = compute_channels(img, channels, geo.pad);
    const FeatureLayout layout(params.d_in, channels, cs.n_channels());
    if (static_cast<std::uint32_t>(layout.size()) != total)
      throw std::invalid_argument("training images disagree in plane count");
    for (std::size_t t = 0; t < jobs.size(); ++t) {
      TreeJob& job = *jobs[t];
      const auto& ids = job.data.feature_ids;
      for (std::size_t i = ranges[t][im].first; i < ranges[t][im].second; ++i) {
        const PatchSample& s = job.samples[i];
        const PatchFeatures f(cs, layout, (s.row - geo.first) / channels.shrink, (s.col - geo.first) / channels.shrink);
        for (std::size_t c = 0; c < ids.size(); ++c) job.data.x(static_cast<Eigen::Index>(i), c) = f(ids[c]);
      }
    }
  });
}

std::vector<SegPatch> sample_labels(const std::vector<GroundTruth>& truths, const std::vector<PatchSample>& samples,
                                    int d) {
  std::vector<SegPatch> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    out.push_back(SegPatch::from_window(truths[s.image].segmentations[s.annotator], s.row, s.col, d));
  return out;
}

void check_inputs(const std::vector<Image>& images, const std::vector<GroundTruth>& truths, const ForestParams& params,
                  const ChannelParams& channels) {
  params.validate();
  channels.validate();
  if (images.empty()) throw std::invalid_argument("training needs at least one image");
  if (images.size() != truths.size()) throw std::invalid_argument("one ground truth per training image is required");
  if (params.stride % channels.shrink != 0)
    throw std::invalid_argument("stride must be a multiple of the channel shrink factor");
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].n_planes() != images[0].n_planes())
      throw std::invalid_argument("training images disagree in plane count");
    if (truths[i].height() != images[i].height() || truths[i].width() != images[i].width())
      throw std::invalid_argument("ground truth size differs from its image");
    if (images[i].height() < params.d_out || images[i].width() < params.d_out)
      throw std::invalid_argument("training image smaller than the label window");
  }
}

}  // namespace

TrainingSet build_training_set(const std::vector<Image>& images, const std::vector<GroundTruth>& truths,
                               const std::vector<PatchSample>& samples, const std::vector<std::uint32_t>& feature_ids,
                               const ForestParams& params, const ChannelParams& channels) {
  check_inputs(images, truths, params, channels);
  TreeJob job;
  job.samples = samples;
  job.data.feature_ids = feature_ids;
  std::vector<TreeJob*> jobs{&job};
  fill_features(images, params, channels, jobs, 1);
  job.data.labels = sample_labels(truths, samples, params.d_out);
  return std::move(job.data);
}

Forest train_forest(const std::vector<Image>& images, const std::vector<GroundTruth>& truths,
                    const ForestParams& params, const ChannelParams& channels, const TrainOptions& opts) {
  check_inputs(images, truths, params, channels);
  Forest forest;
  forest.channels = channels;
  forest.params = params;
  forest.n_input_planes = images[0].n_planes();
  const auto total = static_cast<std::uint32_t>(forest.layout().size());

  std::vector<int> subset(images.size());
  std::iota(subset.begin(), subset.end(), 0);
  if (params.n_images > 0 && params.n_images < static_cast<int>(images.size())) {
    Rng pick(mix_seed(params.seed, 0x1a6e5));
    pick.shuffle(subset.begin(), subset.end());
    subset.resize(params.n_images);
    std::sort(subset.begin(), subset.end());
  }

  const int threads = resolve_threads(opts.threads);
  const int n_trees = params.n_trees_trained;
  forest.trees.resize(n_trees);
  for (int b0 = 0; b0 < n_trees; b0 += threads) {
    const int b1 = std::min(n_trees, b0 + threads);
    std::vector<TreeJob> jobs(b1 - b0);
    std::vector<TreeJob*> ptrs;
    for (int t = b0; t < b1; ++t) {
      TreeJob& job = jobs[t - b0];
      job.seed = mix_seed(params.seed, static_cast<std::uint64_t>(t));
      Rng rng(job.seed);
      job.data.feature_ids = select_feature_subset(total, params.frac_features, rng);
      job.samples = sample_patches(truths, params, rng, subset);
      if (job.samples.empty()) throw std::invalid_argument("no training patches could be sampled");
      job.data.labels = sample_labels(truths, job.samples, params.d_out);
      ptrs.push_back(&job);
    }
    fill_features(images, params, channels, ptrs, threads);
    std::vector<TreeStats> stats(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t k) {
      const auto start = std::chrono::steady_clock::now();
      TreeJob& job = jobs[k];
      StructTree tree = train_tree(job.data, params, job.seed);
      TreeStats& st = stats[k];
      st.index = b0 + static_cast<int>(k);
      st.n_samples = static_cast<int>(job.samples.size());
      st.n_positive = static_cast<int>(
          std::count_if(job.samples.begin(), job.samples.end(), [](const PatchSample& s) { return s.positive; }));
      st.depth = tree.depth();
      st.n_leaves = tree.n_leaves();
      st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      forest.trees[b0 + k] = std::move(tree);
      job.data = TrainingSet{};
    });
    if (opts.on_tree)
      for (const auto& st : stats) opts.on_tree(st);
  }
  return forest;
}

}  // namespace sedge
