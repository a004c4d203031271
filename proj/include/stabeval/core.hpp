#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabeval {

/// Axis-aligned box in center form. All coordinates are pixels.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static Box from_corners(double left, double top, double right, double bottom) {
    return Box{(left + right) / 2.0, (top + bottom) / 2.0, right - left, bottom - top};
  }
  static Box from_ltwh(double left, double top, double width, double height) {
    return Box{left + width / 2.0, top + height / 2.0, width, height};
  }

  double left() const { return cx - w / 2.0; }
  double top() const { return cy - h / 2.0; }
  double right() const { return cx + w / 2.0; }
  double bottom() const { return cy + h / 2.0; }
  double area() const { return w * h; }

  /// w > 0, h > 0 and every field finite.
  bool valid() const;

  bool operator==(const Box&) const = default;
};

/// Intersection over union. Total on valid boxes, result in [0, 1].
double iou(const Box& a, const Box& b);

struct Detection {
  int frame = 0;
  Box box;
  double score = 0.0;
  int class_id = 1;
  std::optional<std::int64_t> track_id;

  bool operator==(const Detection&) const = default;
};

/// Ground-truth track. Frames may have gaps.
struct Trajectory {
  std::int64_t id = 0;
  int class_id = 1;
  std::map<int, Box> boxes;

  bool operator==(const Trajectory&) const = default;
};

struct IgnoreRegion {
  int frame = 0;
  Box box;

  bool operator==(const IgnoreRegion&) const = default;
};

/// Ground truth for one video.
struct Sequence {
  std::string name;
  int frame_count = 0;
  std::vector<Trajectory> trajectories;
  std::vector<IgnoreRegion> ignore_regions;

  /// Throws PreconditionError when ids repeat, a trajectory is empty, a box is
  /// invalid, or a frame falls outside [0, frame_count).
  void validate() const;

  std::size_t box_count() const;
  std::size_t box_count(int class_id) const;

  bool operator==(const Sequence&) const = default;
};

/// Raised when input text cannot be parsed. Carries the 1-based line number
/// when one applies (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a metric or command precondition does not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Warnings are written to stderr unless silenced (tests silence them).
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace stabeval
