#include "stabeval/accuracy.hpp"

#include <algorithm>
#include <numeric>

namespace stabeval {

PRCurve pr_curve(std::span<const Detection> dets, const Sequence& seq, int class_id, double iou_threshold,
                 SubThresholdPolicy policy) {
  const ScoreSweep sweep(dets, seq, class_id);
  if (sweep.gt_box_count() == 0) throw PreconditionError("undefined recall: class has no ground-truth boxes");
  return pr_curve_from(sweep.run(iou_threshold, policy));
}

PRCurve pr_curve_from(std::span<const OperatingPoint> points) {
  PRCurve curve;
  curve.points.reserve(points.size());
  for (const auto& p : points) curve.points.push_back({p.recall, p.precision, p.score_threshold});
  return curve;
}

double precision_envelope(const PRCurve& curve, double recall) {
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.recall >= recall) best = std::max(best, p.precision);
  return best;
}

double average_precision(const PRCurve& curve) {
  if (curve.points.empty()) return 0.0;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size());
  for (const auto& p : curve.points) pts.emplace_back(p.recall, p.precision);
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = pts.size() - 1; i-- > 0;) pts[i].second = std::max(pts[i].second, pts[i + 1].second);
  double ap = 0.0, prev_recall = 0.0;
  for (const auto& [r, p] : pts) {
    ap += (r - prev_recall) * p;
    prev_recall = r;
  }
  return ap;
}

IoUSweep ap_sweep(std::span<const Detection> dets, const Sequence& seq, int class_id, const IoUGrid& grid) {
  const ScoreSweep sweep(dets, seq, class_id);
  if (sweep.gt_box_count() == 0) throw PreconditionError("undefined recall: class has no ground-truth boxes");
  IoUSweep out;
  out.thresholds = grid.thresholds();
  for (const double t : grid.thresholds()) out.values.push_back(average_precision(pr_curve_from(sweep.run(t))));
  return out;
}

double accuracy_auc(std::span<const Detection> dets, const Sequence& seq, int class_id, const IoUGrid& grid) {
  const IoUSweep s = ap_sweep(dets, seq, class_id, grid);
  return normalized_trapezoid(s.thresholds, s.values);
}

double mauc(const std::map<std::string, double>& per_class_auc) {
  if (per_class_auc.empty()) throw PreconditionError("mAUC needs at least one class");
  double sum = 0.0;
  for (const auto& [name, v] : per_class_auc) sum += v;
  return sum / static_cast<double>(per_class_auc.size());
}

double tracklet_iou(const std::map<int, Box>& tracklet, const Trajectory& truth, double min_box_iou) {
  std::size_t hits = 0, shared = 0;
  for (const auto& [frame, box] : tracklet) {
    const auto it = truth.boxes.find(frame);
    if (it == truth.boxes.end()) continue;
    ++shared;
    if (iou(box, it->second) >= min_box_iou) ++hits;
  }
  const std::size_t uni = tracklet.size() + truth.boxes.size() - shared;
  return uni > 0 ? static_cast<double>(hits) / static_cast<double>(uni) : 0.0;
}

double tracklet_map(std::span<const Detection> dets, const Sequence& seq, int class_id, double min_tracklet_iou) {
  struct Tracklet {
    std::int64_t id = 0;
    double score_sum = 0.0;
    std::map<int, Box> boxes;
    double mean() const { return score_sum / static_cast<double>(boxes.size()); }
  };
  std::map<std::int64_t, Tracklet> by_id;
  for (const auto& d : dets) {
    if (d.class_id != class_id) continue;
    if (!d.track_id) throw PreconditionError("tracklet metric requires track ids");
    auto& t = by_id[*d.track_id];
    t.id = *d.track_id;
    t.score_sum += d.score;
    // One box per frame; a duplicate keeps the first.
    t.boxes.emplace(d.frame, d.box);
  }

  std::vector<const Trajectory*> truths;
  for (const auto& t : seq.trajectories)
    if (t.class_id == class_id) truths.push_back(&t);
  if (by_id.empty() || truths.empty()) return 0.0;

  std::vector<Tracklet> ranked;
  for (auto& [id, t] : by_id) ranked.push_back(std::move(t));
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.mean() > b.mean(); });

  std::vector<char> claimed(truths.size(), 0);
  PRCurve curve;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    double best = 0.0;
    std::size_t best_k = truths.size();
    for (std::size_t k = 0; k < truths.size(); ++k) {
      if (claimed[k]) continue;
      const double v = tracklet_iou(ranked[i].boxes, *truths[k]);
      if (v > best) best = v, best_k = k;
    }
    if (best_k < truths.size() && best >= min_tracklet_iou) {
      claimed[best_k] = 1;
      ++tp;
    }
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(truths.size()),
                            static_cast<double>(tp) / static_cast<double>(i + 1), ranked[i].mean()});
  }
  return average_precision(curve);
}

}  // namespace stabeval
