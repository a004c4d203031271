#pragma once

#include <span>
#include <string>
#include <vector>

namespace stabeval {

/// Strictly increasing IoU thresholds in (0, 1].
class IoUGrid {
 public:
  IoUGrid() = default;
  explicit IoUGrid(std::vector<double> thresholds);

  /// 0.05:0.95:0.05, 19 points.
  static IoUGrid default_grid();
  /// Parses "lo:hi:step" (inclusive of hi when it lies on the lattice).
  /// Values are rounded to 12 decimals so 0.05 * 12 reads back as 0.6.
  static IoUGrid parse(const std::string& range);

  const std::vector<double>& thresholds() const { return thresholds_; }
  std::size_t size() const { return thresholds_.size(); }
  bool operator==(const IoUGrid&) const = default;

 private:
  std::vector<double> thresholds_;
};

/// Trapezoidal area under (xs, ys) divided by the x span, so a constant curve
/// integrates to its height. A single point returns its value.
double normalized_trapezoid(std::span<const double> xs, std::span<const double> ys);

/// Recall axis used by every error-vs-recall curve: 0, 0.01, ..., 1 built as i/100.
const std::vector<double>& recall_grid();

}  // namespace stabeval
