#include "stabeval/curve.hpp"

#include <cmath>
#include <sstream>

#include "stabeval/core.hpp"

namespace stabeval {

namespace {
double round12(double v) { return std::round(v * 1e12) / 1e12; }
}  // namespace

IoUGrid::IoUGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw PreconditionError("IoU grid is empty");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const double t = thresholds_[i];
    if (!(t > 0.0 && t <= 1.0)) throw PreconditionError("IoU threshold outside (0, 1]: " + std::to_string(t));
    if (i > 0 && !(t > thresholds_[i - 1])) throw PreconditionError("IoU grid is not strictly increasing");
  }
}

IoUGrid IoUGrid::default_grid() { return parse("0.05:0.95:0.05"); }

IoUGrid IoUGrid::parse(const std::string& range) {
  std::istringstream in(range);
  std::string part;
  std::vector<double> v;
  while (std::getline(in, part, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw PreconditionError("bad IoU grid '" + range + "', expected lo:hi:step");
    }
  }
  if (v.size() != 3) throw PreconditionError("bad IoU grid '" + range + "', expected lo:hi:step");
  const double lo = v[0], hi = v[1], step = v[2];
  if (!(step > 0.0) || hi < lo) throw PreconditionError("bad IoU grid '" + range + "', need lo <= hi and step > 0");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> t;
  t.reserve(n);
  for (long i = 0; i < n; ++i) t.push_back(round12(lo + static_cast<double>(i) * step));
  return IoUGrid(std::move(t));
}

double normalized_trapezoid(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty()) return 0.0;
  if (xs.size() == 1) return ys[0];
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2.0;
  return area / (xs.back() - xs.front());
}

const std::vector<double>& recall_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(101);
    for (int i = 0; i <= 100; ++i) g[i] = static_cast<double>(i) / 100.0;
    return g;
  }();
  return grid;
}

}  // namespace stabeval
