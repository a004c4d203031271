#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stabeval/core.hpp"

namespace stabeval {

/// How IoUs below the matching threshold are treated by the assignment.
enum class SubThresholdPolicy {
  /// Sub-threshold IoUs are zeroed (no edge) before solving. Keeps the
  /// matched count monotone in the detection set.
  kGateBeforeSolve,
  /// Solve on raw IoUs, then dissolve pairs below the threshold.
  kDissolveAfterSolve,
};

struct GroundTruthBox {
  std::int64_t trajectory_id = 0;
  Box box;
};

struct MatchedPair {
  std::size_t detection = 0;
  std::int64_t trajectory_id = 0;
  double iou = 0.0;
};

struct FrameAssignment {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::int64_t> unmatched_gt;
};

/// Assignment on a precomputed IoU matrix (rows are detections, columns ground
/// truth). Returns (row, col) pairs with IoU >= min_iou, sorted by row. Rows and
/// columns without any usable edge are removed before solving.
std::vector<std::pair<Eigen::Index, Eigen::Index>> match_ious(
    const Eigen::Ref<const Eigen::MatrixXd>& ious, double min_iou,
    SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Optimal one-frame assignment of detections to ground-truth boxes.
FrameAssignment match_frame(std::span<const Detection> dets, std::span<const GroundTruthBox> gts, double min_iou,
                            SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

/// Normalized deviation of a predicted box from its ground truth:
/// center offsets over GT size, sqrt area ratio, aspect-ratio ratio.
struct Deviation {
  double e_x = 0.0;
  double e_y = 0.0;
  double e_s = 1.0;
  double e_r = 1.0;
};

Deviation deviation(const Box& predicted, const Box& truth);

/// Per-trajectory outcome at one operating point. statuses has one entry per
/// GT frame in frame order; the deviation series hold one value per detected
/// frame, in the same order.
struct EvaluatedTrajectory {
  std::int64_t id = 0;
  std::vector<bool> statuses;
  std::vector<double> e_x;
  std::vector<double> e_y;
  std::vector<double> e_s;
  std::vector<double> e_r;

  std::size_t detected_count() const { return e_x.size(); }
};

/// Matches detections with score >= min_score frame by frame and assembles the
/// status and deviation series of every trajectory. When class_id is given only
/// trajectories and detections of that class take part.
std::vector<EvaluatedTrajectory> associate_sequence(std::span<const Detection> dets, const Sequence& seq,
                                                    double min_iou, double min_score,
                                                    std::optional<int> class_id = std::nullopt,
                                                    SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve);

}  // namespace stabeval
