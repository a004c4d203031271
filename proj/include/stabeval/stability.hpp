#pragma once

#include <span>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/curve.hpp"
#include "stabeval/matching.hpp"
#include "stabeval/sweep.hpp"

namespace stabeval {

/// Population standard deviation (divides by n). Exactly 0 for a constant
/// series and for n <= 1.
double population_std(std::span<const double> values);

/// Mean over all trajectories of status changes / (length - 1). Length-one
/// trajectories contribute 0.
double fragment_error(std::span<const EvaluatedTrajectory> evaluated);

/// Mean over trajectories with a matched frame of std(e_x) + std(e_y).
double center_error(std::span<const EvaluatedTrajectory> evaluated);

/// Mean over trajectories with a matched frame of std(e_s) + std(e_r).
double scale_ratio_error(std::span<const EvaluatedTrajectory> evaluated);

struct StabilityComponents {
  double fragment = 0.0;     // E_F
  double center = 0.0;       // E_C
  double scale_ratio = 0.0;  // E_R
  double phi = 0.0;          // E_F + E_C + E_R
  double recall = 0.0;
};

/// All three components at a single (IoU threshold, score threshold) point.
StabilityComponents stability_at(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                 double iou_threshold, double score_threshold,
                                 SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Samples one metric of a score sweep onto recall_grid(): each grid recall
/// takes the value of the first operating point reaching it; recalls beyond
/// the last point hold the last point's value. No points -> all zeros.
std::vector<double> sample_on_recall_grid(std::span<const OperatingPoint> points, double OperatingPoint::*metric);

struct ErrorRecallAuc {
  double fragment = 0.0;
  double center = 0.0;
  double scale_ratio = 0.0;
};

ErrorRecallAuc error_recall_auc(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                double iou_threshold,
                                SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Everything measured at one IoU threshold. Curves are sampled on recall_grid().
struct ThresholdMetrics {
  double iou_threshold = 0.0;
  double average_precision = 0.0;
  double fragment = 0.0;
  double center = 0.0;
  double scale_ratio = 0.0;
  std::size_t operating_points = 0;
  std::vector<double> precision_curve;
  std::vector<double> fragment_curve;
  std::vector<double> center_curve;
  std::vector<double> scale_ratio_curve;

  double stability() const { return fragment + center + scale_ratio; }
};

/// Accuracy and stability of one class over an IoU grid.
struct StabilityReport {
  int class_id = 1;
  std::size_t gt_boxes = 0;
  std::size_t trajectories = 0;
  std::size_t detections = 0;
  IoUGrid grid;
  std::vector<ThresholdMetrics> per_threshold;
  double accuracy_auc = 0.0;
  double E_F = 0.0;
  double E_C = 0.0;
  double E_R = 0.0;
  double phi = 0.0;  // E_F + E_C + E_R
};

ThresholdMetrics measure_threshold(const ScoreSweep& sweep, double iou_threshold,
                                   SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Full per-class evaluation. Grid points are spread over `workers` threads;
/// the result does not depend on the worker count. Throws
/// PreconditionError("undefined recall") when the class has no GT boxes.
StabilityReport stability_score(std::span<const Detection> dets, const Sequence& seq, int class_id,
                                const IoUGrid& grid, unsigned workers = 1,
                                SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Reduces per-threshold values to the final AUCs; phi is set to the sum.
void finalize(StabilityReport& report);

}  // namespace stabeval
