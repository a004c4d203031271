#include "stabeval/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <set>

namespace stabeval {

bool Box::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  // Areas from the same corner differences as the intersection, so identical
  // boxes give exactly 1.
  const double area_a = (a.right() - a.left()) * (a.bottom() - a.top());
  const double area_b = (b.right() - b.left()) * (b.bottom() - b.top());
  return std::clamp(inter / (area_a + area_b - inter), 0.0, 1.0);
}

void Sequence::validate() const {
  if (frame_count < 0) throw PreconditionError("sequence '" + name + "' has negative frame count");
  std::set<std::int64_t> ids;
  for (const auto& t : trajectories) {
    if (!ids.insert(t.id).second)
      throw PreconditionError("duplicate trajectory id " + std::to_string(t.id));
    if (t.boxes.empty()) throw PreconditionError("trajectory " + std::to_string(t.id) + " is empty");
    for (const auto& [frame, box] : t.boxes) {
      if (frame < 0 || frame >= frame_count)
        throw PreconditionError("trajectory " + std::to_string(t.id) + " frame " + std::to_string(frame) +
                                " outside sequence of " + std::to_string(frame_count) + " frames");
      if (!box.valid())
        throw PreconditionError("trajectory " + std::to_string(t.id) + " has an invalid box at frame " +
                                std::to_string(frame));
    }
  }
  for (const auto& r : ignore_regions) {
    if (r.frame < 0 || r.frame >= frame_count || !r.box.valid())
      throw PreconditionError("invalid ignore region at frame " + std::to_string(r.frame));
  }
}

std::size_t Sequence::box_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.boxes.size();
  return n;
}

std::size_t Sequence::box_count(int class_id) const {
  std::size_t n = 0;
  for (const auto& t : trajectories)
    if (t.class_id == class_id) n += t.boxes.size();
  return n;
}

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {
std::atomic<bool> g_warnings{true};
}

void warn(const std::string& message) {
  if (g_warnings.load()) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

}  // namespace stabeval
