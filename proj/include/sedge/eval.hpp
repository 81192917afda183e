#pragma once

#include "sedge/detector.hpp"

#include <string>
#include <vector>

namespace sedge {

/// Annotator segmentations of one image and their boundary maps.
struct GroundTruth {
  std::vector<LabelMap> segmentations;
  std::vector<BinaryMap> boundaries;

  static GroundTruth from_segmentations(std::vector<LabelMap> segs);
  int height() const { return boundaries.empty() ? 0 : static_cast<int>(boundaries[0].rows()); }
  int width() const { return boundaries.empty() ? 0 : static_cast<int>(boundaries[0].cols()); }
};

/// Default match tolerance as a fraction of the image diagonal.
inline constexpr double kDefaultTolerance = 0.0075;

struct MatchCounts {
  long matched_pred = 0;  // predicted pixels matched in at least one map
  long total_pred = 0;
  long matched_gt = 0;    // summed over annotators
  long total_gt = 0;

  MatchCounts& operator+=(const MatchCounts& o);
  bool operator==(const MatchCounts&) const = default;
};

/// One-to-one matching of predicted boundary pixels to each ground-truth
/// map within tol * diagonal. Candidate pairs are assigned greedily in order
/// of increasing distance (ties: lower predicted index, then lower gt index).
MatchCounts match_boundaries(const BinaryMap& pred, const std::vector<BinaryMap>& gt, double tol = kDefaultTolerance);

/// Per-map matching result, for tests and diagnostics.
struct MapMatch {
  std::vector<int> pred_to_gt;  // raster index of the matched gt pixel or -1
  long matched = 0;
};
MapMatch match_one(const BinaryMap& pred, const BinaryMap& gt, double radius);

struct PRPoint {
  double threshold = 0.0;
  MatchCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f() const;
};

/// Thresholds i / (n + 1) for i = 1..n.
std::vector<double> eval_thresholds(int n);

/// Precision is 0 without predictions and recall is 0 without ground truth.
PRPoint make_point(double threshold, const MatchCounts& c);
double f_measure(double p, double r);

struct EvalOptions {
  int n_thresholds = 99;
  double tolerance = kDefaultTolerance;
  NmsOptions nms;
  int threads = 1;
};

/// Curves of one image: counts at each threshold after NMS + binarization.
std::vector<MatchCounts> image_counts(const EdgeProbMap& e, const GroundTruth& gt, const EvalOptions& opts);

struct EvalReport {
  std::vector<PRPoint> curve;             // pooled over images
  std::vector<std::vector<MatchCounts>> per_image;
  double ods = 0.0;
  double ods_threshold = 0.0;
  double ois = 0.0;
  double ap = 0.0;
  double r50 = 0.0;
  int n_thresholds = 0;
  int n_images = 0;
};

/// Pool per-image counts into the dataset curve and compute the summary.
EvalReport summarize(const std::vector<double>& thresholds, std::vector<std::vector<MatchCounts>> per_image);

/// Summary statistics of a curve ordered by increasing threshold.
double ods_of(const std::vector<PRPoint>& curve, double* threshold = nullptr);
double ap_of(const std::vector<PRPoint>& curve);
double r50_of(const std::vector<PRPoint>& curve);
double ois_of(const std::vector<std::vector<MatchCounts>>& per_image);

EvalReport evaluate(const std::vector<EdgeProbMap>& preds, const std::vector<GroundTruth>& gts, const EvalOptions& opts);

std::string report_json(const EvalReport& r);
std::string report_csv(const EvalReport& r);
std::string report_text(const EvalReport& r);

}  // namespace sedge
