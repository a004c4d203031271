#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "stabeval/core.hpp"

namespace stabeval {

/// Greedy NMS over the detections of one frame and class: keep the best
/// remaining box, drop everything overlapping it with IoU > iou_threshold.
/// Equal scores keep input order. Output is in selection order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// NMS where every kept box is replaced by the score-weighted mean of itself
/// and the boxes it suppressed. Scores are untouched. Non-positive scores in a
/// cluster are shifted to be positive before weighting.
std::vector<Detection> weighted_nms(std::span<const Detection> dets, double iou_threshold);

/// Applies nms or weighted_nms independently to every (frame, class) group.
/// Output is ordered by frame, then class, then selection order.
std::vector<Detection> suppress_per_frame(std::span<const Detection> dets, double iou_threshold, bool weighted);

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
};

/// Forward motion from `frame` to `frame + 1` at a box location.
class MotionField {
 public:
  virtual ~MotionField() = default;
  virtual Displacement at(int frame, const Box& box) const = 0;
};

class ZeroMotion final : public MotionField {
 public:
  Displacement at(int, const Box&) const override { return {}; }
};

/// One row of the displacement CSV `frame,det_index,dx,dy` (frame 1-based on
/// disk, det_index 0-based into the detection file).
struct DisplacementRow {
  int frame = 0;
  std::size_t det_index = 0;
  Displacement motion;
};

std::vector<DisplacementRow> parse_displacements(std::istream& in);

/// Motion sampled at detection boxes: a query returns the displacement of the
/// recorded detection in that frame overlapping the query box best, or zero
/// when nothing overlaps.
class DetectionMotion final : public MotionField {
 public:
  DetectionMotion(std::span<const Detection> dets, std::span<const DisplacementRow> rows);
  Displacement at(int frame, const Box& box) const override;

 private:
  std::multimap<int, std::pair<Box, Displacement>> samples_;
};

struct MgpOptions {
  int window = 1;
  double decay = 0.5;
  /// Copies outside [0, frame_count) are dropped; 0 leaves the end open.
  int frame_count = 0;
  /// Image extent for spatial clipping; no clipping when absent.
  std::optional<std::pair<double, double>> image_size;
};

/// Motion-guided propagation: every detection is copied to frames t-d and t+d
/// for d = 1..window, moved along the motion field step by step, with score
/// s * decay^d. Originals come first, unchanged, followed by the copies.
std::vector<Detection> mgp(std::span<const Detection> dets, const MgpOptions& options,
                           const MotionField& motion = ZeroMotion{});

/// A box reported by an external tracker, started from dets[source].
struct TrackerBox {
  int frame = 0;
  Box box;
  std::size_t source = 0;
};

/// `frame,source_index,left,top,width,height` with 1-based frames.
std::vector<TrackerBox> parse_tracker_boxes(std::istream& in);

/// Averages detections with overlapping tracker boxes. A tracker box takes part
/// when its source detection scored above min_score; it is paired with the
/// detection of its frame (same class as the source) with the highest IoU, if
/// that IoU >= min_iou. The detection box becomes the unweighted mean of itself
/// and every tracker box paired with it. Scores and count never change.
std::vector<Detection> track_fuse(std::span<const Detection> dets, std::span<const TrackerBox> tracker_boxes,
                                  double min_score = 0.8, double min_iou = 0.5);

}  // namespace stabeval
