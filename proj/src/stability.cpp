#include "stabeval/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "stabeval/accuracy.hpp"

namespace stabeval {

double population_std(std::span<const double> values) {
  if (values.size() <= 1) return 0.0;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) return 0.0;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double fragment_error(std::span<const EvaluatedTrajectory> evaluated) {
  if (evaluated.empty()) {
    warn("fragment error over zero trajectories");
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& t : evaluated) {
    const std::size_t len = t.statuses.size();
    if (len <= 1) continue;
    std::size_t changes = 0;
    for (std::size_t i = 1; i < len; ++i) changes += t.statuses[i] != t.statuses[i - 1];
    sum += static_cast<double>(changes) / static_cast<double>(len - 1);
  }
  return sum / static_cast<double>(evaluated.size());
}

namespace {

template <class PerTrajectory>
double mean_over_detected(std::span<const EvaluatedTrajectory> evaluated, const char* what, PerTrajectory f) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : evaluated) {
    if (t.detected_count() == 0) continue;
    sum += f(t);
    ++n;
  }
  if (n == 0) {
    warn(std::string(what) + ": no trajectory has a matched frame");
    return 0.0;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double center_error(std::span<const EvaluatedTrajectory> evaluated) {
  return mean_over_detected(evaluated, "center error",
                            [](const auto& t) { return population_std(t.e_x) + population_std(t.e_y); });
}

double scale_ratio_error(std::span<const EvaluatedTrajectory> evaluated) {
  return mean_over_detected(evaluated, "scale and ratio error",
                            [](const auto& t) { return population_std(t.e_s) + population_std(t.e_r); });
}

StabilityComponents stability_at(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                 double iou_threshold, double score_threshold, SubThresholdPolicy policy) {
  const auto evaluated = associate_sequence(dets, seq, iou_threshold, score_threshold, class_id, policy);
  StabilityComponents c;
  std::size_t total = 0, detected = 0;
  bool any_detected = false;
  for (const auto& t : evaluated) {
    total += t.statuses.size();
    detected += t.detected_count();
    any_detected = any_detected || t.detected_count() > 0;
  }
  if (!evaluated.empty()) c.fragment = fragment_error(evaluated);
  if (any_detected) {
    c.center = center_error(evaluated);
    c.scale_ratio = scale_ratio_error(evaluated);
  }
  c.phi = c.fragment + c.center + c.scale_ratio;
  c.recall = total > 0 ? static_cast<double>(detected) / static_cast<double>(total) : 0.0;
  return c;
}

std::vector<double> sample_on_recall_grid(std::span<const OperatingPoint> points, double OperatingPoint::*metric) {
  const auto& grid = recall_grid();
  std::vector<double> out(grid.size(), 0.0);
  if (points.empty()) return out;
  // Recall is non-decreasing under gate-before-solve; the running maximum keeps
  // "first point reaching r" well defined for the other policy too.
  std::size_t p = 0;
  double reached = points[0].recall;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (p + 1 < points.size() && reached < grid[i]) {
      ++p;
      reached = std::max(reached, points[p].recall);
    }
    out[i] = reached >= grid[i] ? points[p].*metric : points.back().*metric;
  }
  return out;
}

ErrorRecallAuc error_recall_auc(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                double iou_threshold, SubThresholdPolicy policy) {
  const ScoreSweep sweep(dets, seq, class_id);
  const auto m = measure_threshold(sweep, iou_threshold, policy);
  return {m.fragment, m.center, m.scale_ratio};
}

ThresholdMetrics measure_threshold(const ScoreSweep& sweep, double iou_threshold, SubThresholdPolicy policy) {
  const auto points = sweep.run(iou_threshold, policy);
  const auto& grid = recall_grid();
  ThresholdMetrics m;
  m.iou_threshold = iou_threshold;
  m.operating_points = points.size();

  const PRCurve pr = pr_curve_from(points);
  m.average_precision = average_precision(pr);
  m.precision_curve.reserve(grid.size());
  for (const double r : grid) m.precision_curve.push_back(precision_envelope(pr, r));

  m.fragment_curve = sample_on_recall_grid(points, &OperatingPoint::fragment);
  m.center_curve = sample_on_recall_grid(points, &OperatingPoint::center);
  m.scale_ratio_curve = sample_on_recall_grid(points, &OperatingPoint::scale_ratio);
  m.fragment = normalized_trapezoid(grid, m.fragment_curve);
  m.center = normalized_trapezoid(grid, m.center_curve);
  m.scale_ratio = normalized_trapezoid(grid, m.scale_ratio_curve);
  return m;
}

StabilityReport stability_score(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                const IoUGrid& grid, unsigned workers, SubThresholdPolicy policy) {
  const ScoreSweep sweep(dets, seq, class_id);
  if (sweep.gt_box_count() == 0)
    throw PreconditionError("undefined recall: class " + std::to_string(class_id) + " has no ground-truth boxes");

  StabilityReport report;
  report.class_id = class_id;
  report.gt_boxes = sweep.gt_box_count();
  report.trajectories = sweep.trajectory_count();
  report.detections = sweep.detection_count();
  report.grid = grid;
  report.per_threshold.resize(grid.size());

  const auto& thresholds = grid.thresholds();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < thresholds.size(); i = next++)
      report.per_threshold[i] = measure_threshold(sweep, thresholds[i], policy);
  };
  const unsigned n = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(thresholds.size()));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }

  finalize(report);
  return report;
}

void finalize(StabilityReport& report) {
  std::vector<double> xs, ap, f, c, r;
  for (const auto& m : report.per_threshold) {
    xs.push_back(m.iou_threshold);
    ap.push_back(m.average_precision);
    f.push_back(m.fragment);
    c.push_back(m.center);
    r.push_back(m.scale_ratio);
  }
  report.accuracy_auc = normalized_trapezoid(xs, ap);
  report.E_F = normalized_trapezoid(xs, f);
  report.E_C = normalized_trapezoid(xs, c);
  report.E_R = normalized_trapezoid(xs, r);
  report.phi = report.E_F + report.E_C + report.E_R;
}

}  // namespace stabeval
