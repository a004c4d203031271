#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/matching.hpp"

namespace stabeval {

/// Metrics at one score threshold of a sweep.
struct OperatingPoint {
  double score_threshold = 0.0;
  std::size_t kept = 0;     // detections with score >= threshold
  std::size_t matched = 0;  // true positives
  double recall = 0.0;
  double precision = 0.0;
  double fragment = 0.0;
  double center = 0.0;
  double scale_ratio = 0.0;
};

/// Sweeps the score threshold over every distinct detection score of one class,
/// highest first. Adding a score group only re-solves the frames it touches and
/// only refreshes the trajectories whose matches changed, so a full sweep costs
/// about one small assignment per detection instead of one full evaluation per
/// threshold. Per-frame IoU matrices are computed once at construction; run()
/// is const and may be called concurrently for different IoU thresholds.
class ScoreSweep {
 public:
  ScoreSweep(std::span<const Detection> dets, const Sequence& seq, int class_id);

  std::vector<OperatingPoint> run(double iou_threshold,
                                  SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve) const;

  std::size_t gt_box_count() const { return entry_box_.size(); }
  std::size_t trajectory_count() const { return traj_offset_.size() - 1; }
  std::size_t detection_count() const { return det_box_.size(); }

 private:
  struct Frame {
    std::vector<int> entries;  // GT entry indices, trajectory order
    std::vector<int> dets;     // detection indices, input order
    Eigen::MatrixXd ious;      // dets x entries
  };

  // GT entries are laid out trajectory by trajectory, frame-ordered within.
  std::vector<std::size_t> traj_offset_;
  std::vector<int> entry_traj_;
  std::vector<Box> entry_box_;

  std::vector<Box> det_box_;
  std::vector<double> det_score_;
  std::vector<int> det_frame_;  // index into frames_
  std::vector<int> det_row_;    // row in that frame's IoU matrix
  std::vector<double> det_max_iou_;
  std::vector<int> order_;  // detections by score descending, index ascending

  std::vector<Frame> frames_;
};

}  // namespace stabeval
