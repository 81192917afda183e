#include "sedge/eval.hpp"

#include "sedge/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace sedge {

GroundTruth GroundTruth::from_segmentations(std::vector<LabelMap> segs) {
  GroundTruth gt;
  for (const auto& s : segs) {
    if (!gt.boundaries.empty() && (s.rows() != gt.height() || s.cols() != gt.width()))
      throw std::invalid_argument("ground-truth segmentations differ in size");
    gt.boundaries.push_back(boundary_map(s));
  }
  gt.segmentations = std::move(segs);
  return gt;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  matched_pred += o.matched_pred;
  total_pred += o.total_pred;
  matched_gt += o.matched_gt;
  total_gt += o.total_gt;
  return *this;
}

MapMatch match_one(const BinaryMap& pred, const BinaryMap& gt, double radius) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("prediction and ground truth differ in size");
  const int h = static_cast<int>(pred.rows());
  const int w = static_cast<int>(pred.cols());
  const int reach = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius + 1e-9;

  struct Candidate {
    int d2;
    int pred;
    int gt;
  };
  std::vector<Candidate> cand;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!pred(y, x)) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int gy = y + dy;
        if (gy < 0 || gy >= h) continue;
        for (int dx = -reach; dx <= reach; ++dx) {
          const int gx = x + dx;
          const int d2 = dy * dy + dx * dx;
          if (gx < 0 || gx >= w || d2 > r2 || !gt(gy, gx)) continue;
          cand.push_back({d2, y * w + x, gy * w + gx});
        }
      }
    }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d2, a.pred, a.gt) < std::tie(b.d2, b.pred, b.gt);
  });
  MapMatch m;
  m.pred_to_gt.assign(static_cast<size_t>(h) * w, -1);
  std::vector<std::uint8_t> gt_used(static_cast<size_t>(h) * w, 0);
  for (const auto& c : cand) {
    if (m.pred_to_gt[c.pred] >= 0 || gt_used[c.gt]) continue;
    m.pred_to_gt[c.pred] = c.gt;
    gt_used[c.gt] = 1;
    ++m.matched;
  }
  return m;
}

MatchCounts match_boundaries(const BinaryMap& pred, const std::vector<BinaryMap>& gt, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("match tolerance must be > 0");
  const double radius = tol * std::hypot(static_cast<double>(pred.rows()), static_cast<double>(pred.cols()));
  MatchCounts out;
  out.total_pred = (pred != 0).count();
  std::vector<std::uint8_t> any(pred.size(), 0);
  for (const auto& g : gt) {
    const MapMatch m = match_one(pred, g, radius);
    for (size_t i = 0; i < any.size(); ++i)
      if (m.pred_to_gt[i] >= 0) any[i] = 1;
    out.matched_gt += m.matched;
    out.total_gt += (g != 0).count();
  }
  out.matched_pred = std::count(any.begin(), any.end(), 1);
  return out;
}

double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

double PRPoint::f() const { return f_measure(precision, recall); }

std::vector<double> eval_thresholds(int n) {
  if (n < 1) throw std::invalid_argument("n_thresholds must be >= 1");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1) / (n + 1);
  return t;
}

PRPoint make_point(double threshold, const MatchCounts& c) {
  PRPoint p;
  p.threshold = threshold;
  p.counts = c;
  p.precision = c.total_pred > 0 ? static_cast<double>(c.matched_pred) / c.total_pred : 0.0;
  p.recall = c.total_gt > 0 ? static_cast<double>(c.matched_gt) / c.total_gt : 0.0;
  return p;
}

std::vector<MatchCounts> image_counts(const EdgeProbMap& e, const GroundTruth& gt, const EvalOptions& opts) {
  if (gt.boundaries.empty()) throw std::invalid_argument("ground truth has no annotators");
  if (e.rows() != gt.height() || e.cols() != gt.width())
    throw std::invalid_argument("prediction and ground truth differ in size");
  const EdgeProbMap thin = nms(e, opts.nms);
  std::vector<MatchCounts> out;
  for (const double t : eval_thresholds(opts.n_thresholds)) {
    const BinaryMap bin = (thin >= static_cast<float>(t)).cast<std::uint8_t>();
    out.push_back(match_boundaries(bin, gt.boundaries, opts.tolerance));
  }
  return out;
}

double ods_of(const std::vector<PRPoint>& curve, double* threshold) {
  double best = 0.0;
  double best_t = curve.empty() ? 0.0 : curve.front().threshold;
  for (const auto& p : curve)
    if (p.f() > best) {
      best = p.f();
      best_t = p.threshold;
    }
  if (threshold) *threshold = best_t;
  return best;
}

double ois_of(const std::vector<std::vector<MatchCounts>>& per_image) {
  MatchCounts pooled;
  for (const auto& counts : per_image) {
    size_t best = 0;
    double best_f = -1.0;
    for (size_t i = 0; i < counts.size(); ++i) {
      const double f = make_point(0.0, counts[i]).f();
      if (f > best_f) {
        best_f = f;
        best = i;
      }
    }
    if (!counts.empty()) pooled += counts[best];
  }
  return make_point(0.0, pooled).f();
}

double ap_of(const std::vector<PRPoint>& curve) {
  std::vector<std::pair<double, double>> rp;  // (recall, precision)
  for (const auto& p : curve) rp.emplace_back(p.recall, p.precision);
  std::stable_sort(rp.begin(), rp.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> pmax(rp.size());
  double run = 0.0;
  for (size_t i = rp.size(); i-- > 0;) {
    run = std::max(run, rp[i].second);
    pmax[i] = run;
  }
  double ap = 0.0;
  double prev = 0.0;
  for (size_t i = 0; i < rp.size(); ++i) {
    ap += (rp[i].first - prev) * pmax[i];
    prev = rp[i].first;
  }
  return ap;
}

double r50_of(const std::vector<PRPoint>& curve) {
  double best = 0.0;
  for (size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].precision >= 0.5) best = std::max(best, curve[i].recall);
    if (i + 1 < curve.size()) {
      const PRPoint& a = curve[i];
      const PRPoint& b = curve[i + 1];
      if ((a.precision - 0.5) * (b.precision - 0.5) < 0.0) {
        const double u = (0.5 - a.precision) / (b.precision - a.precision);
        best = std::max(best, a.recall + u * (b.recall - a.recall));
      }
    }
  }
  return best;
}

EvalReport summarize(const std::vector<double>& thresholds, std::vector<std::vector<MatchCounts>> per_image) {
  EvalReport r;
  r.n_thresholds = static_cast<int>(thresholds.size());
  r.n_images = static_cast<int>(per_image.size());
  std::vector<MatchCounts> pooled(thresholds.size());
  for (const auto& counts : per_image) {
    if (counts.size() != thresholds.size()) throw std::invalid_argument("per-image curve length mismatch");
    for (size_t i = 0; i < counts.size(); ++i) pooled[i] += counts[i];
  }
  for (size_t i = 0; i < thresholds.size(); ++i) r.curve.push_back(make_point(thresholds[i], pooled[i]));
  r.ods = ods_of(r.curve, &r.ods_threshold);
  r.ois = ois_of(per_image);
  r.ap = ap_of(r.curve);
  r.r50 = r50_of(r.curve);
  r.per_image = std::move(per_image);
  return r;
}

EvalReport evaluate(const std::vector<EdgeProbMap>& preds, const std::vector<GroundTruth>& gts,
                    const EvalOptions& opts) {
  if (preds.size() != gts.size()) throw std::invalid_argument("one prediction per image is required");
  std::vector<std::vector<MatchCounts>> per_image(preds.size());
  parallel_for(preds.size(), resolve_threads(opts.threads),
               [&](std::size_t i) { per_image[i] = image_counts(preds[i], gts[i], opts); });
  return summarize(eval_thresholds(opts.n_thresholds), std::move(per_image));
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["ods"] = r.ods;
  j["ods_threshold"] = r.ods_threshold;
  j["ois"] = r.ois;
  j["ap"] = r.ap;
  j["r50"] = r.r50;
  j["n_thresholds"] = r.n_thresholds;
  j["n_images"] = r.n_images;
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (const auto& p : r.curve)
    curve.push_back({{"threshold", p.threshold},
                     {"matched_pred", p.counts.matched_pred},
                     {"total_pred", p.counts.total_pred},
                     {"matched_gt", p.counts.matched_gt},
                     {"total_gt", p.counts.total_gt},
                     {"precision", p.precision},
                     {"recall", p.recall},
                     {"f", p.f()}});
  j["curve"] = std::move(curve);
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "threshold,matched_pred,total_pred,matched_gt,total_gt,precision,recall,f\n";
  for (const auto& p : r.curve)
    os << p.threshold << ',' << p.counts.matched_pred << ',' << p.counts.total_pred << ',' << p.counts.matched_gt
       << ',' << p.counts.total_gt << ',' << p.precision << ',' << p.recall << ',' << p.f() << '\n';
  return os.str();
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "ODS %.4f (t=%.3f)  OIS %.4f  AP %.4f  R50 %.4f  [%d images, %d thresholds]\n",
                r.ods, r.ods_threshold, r.ois, r.ap, r.r50, r.n_images, r.n_thresholds);
  os << line;
  os << "threshold  precision  recall     F\n";
  for (const auto& p : r.curve) {
    std::snprintf(line, sizeof line, "%9.4f  %9.4f  %9.4f  %.4f\n", p.threshold, p.precision, p.recall, p.f());
    os << line;
  }
  return os.str();
}

}  // namespace sedge
