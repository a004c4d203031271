#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/curve.hpp"
#include "stabeval/matching.hpp"
#include "stabeval/sweep.hpp"

namespace stabeval {

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score_threshold = 0.0;
};

/// Precision-recall points, one per distinct score threshold, highest first.
struct PRCurve {
  std::vector<PRPoint> points;
};

/// TP/FP at each score cut are decided by per-frame optimal matching at
/// iou_threshold. Throws PreconditionError("undefined recall") when the class
/// has no ground-truth boxes.
PRCurve pr_curve(std::span<const Detection> dets, const Sequence& seq, int class_id, double iou_threshold,
                 SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

PRCurve pr_curve_from(std::span<const OperatingPoint> points);

/// Upper envelope of precision at the given recall: the best precision among
/// points reaching at least that recall, 0 if none does.
double precision_envelope(const PRCurve& curve, double recall);

/// All-point interpolated AP: the area under the precision envelope.
double average_precision(const PRCurve& curve);

/// AP as a function of the IoU threshold.
struct IoUSweep {
  std::vector<double> thresholds;
  std::vector<double> values;
};

IoUSweep ap_sweep(std::span<const Detection> dets, const Sequence& seq, int class_id, const IoUGrid& grid);

/// Area under the AP-vs-IoU-threshold curve, normalized by the grid span.
double accuracy_auc(std::span<const Detection> dets, const Sequence& seq, int class_id, const IoUGrid& grid);

/// Unweighted mean of per-class AUCs. Throws on an empty map.
double mauc(const std::map<std::string, double>& per_class_auc);

/// Frames of the tracklet where its box overlaps the GT box by at least
/// min_box_iou, over the union of tracklet and GT frames.
double tracklet_iou(const std::map<int, Box>& tracklet, const Trajectory& truth, double min_box_iou = 0.5);

/// Tracklet-level mAP for one class: tracklets (detections grouped by track id)
/// are ranked by mean score and count as true positives when their tracklet IoU
/// with a not yet claimed GT trajectory is >= min_tracklet_iou.
/// Throws PreconditionError("tracklet metric requires track ids") when any
/// detection of the class lacks a track id.
double tracklet_map(std::span<const Detection> dets, const Sequence& seq, int class_id,
                    double min_tracklet_iou = 0.5);

}  // namespace stabeval
