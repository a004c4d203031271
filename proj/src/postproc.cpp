#include "stabeval/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

namespace stabeval {

namespace {

std::vector<std::size_t> by_score(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

// Greedy clustering shared by both NMS flavours: clusters[i] starts with the
// kept detection followed by the ones it suppressed.
std::vector<std::vector<std::size_t>> clusters(std::span<const Detection> dets, double iou_threshold) {
  const auto order = by_score(dets);
  std::vector<char> suppressed(dets.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const std::size_t i = order[a];
    if (suppressed[i]) continue;
    std::vector<std::size_t> cluster{i};
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const std::size_t j = order[b];
      if (suppressed[j]) continue;
      if (iou(dets[i].box, dets[j].box) > iou_threshold) {
        suppressed[j] = 1;
        cluster.push_back(j);
      }
    }
    out.push_back(std::move(cluster));
  }
  return out;
}

}  // namespace

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<Detection> out;
  for (const auto& c : clusters(dets, iou_threshold)) out.push_back(dets[c.front()]);
  return out;
}

std::vector<Detection> weighted_nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<Detection> out;
  for (const auto& c : clusters(dets, iou_threshold)) {
    Detection kept = dets[c.front()];
    if (c.size() > 1) {
      double min_score = kept.score;
      for (const auto j : c) min_score = std::min(min_score, dets[j].score);
      const double shift = min_score <= 0.0 ? -min_score + 1e-6 : 0.0;
      double total = 0.0, cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
      for (const auto j : c) {
        const double wt = dets[j].score + shift;
        total += wt;
        cx += wt * dets[j].box.cx;
        cy += wt * dets[j].box.cy;
        w += wt * dets[j].box.w;
        h += wt * dets[j].box.h;
      }
      if (total > 0.0 && std::isfinite(total)) {
        kept.box = Box{cx / total, cy / total, w / total, h / total};
      } else {
        warn("weighted NMS: non-positive weight total, keeping the unweighted box");
      }
    }
    out.push_back(kept);
  }
  return out;
}

std::vector<Detection> suppress_per_frame(std::span<const Detection> dets, double iou_threshold, bool weighted) {
  std::map<std::pair<int, int>, std::vector<Detection>> groups;
  for (const auto& d : dets) groups[{d.frame, d.class_id}].push_back(d);
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& [key, group] : groups) {
    auto kept = weighted ? weighted_nms(group, iou_threshold) : nms(group, iou_threshold);
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  return f;
}

double field_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (s.find_first_not_of(" \t\r", used) != std::string::npos || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

bool skip_line(const std::string& line) {
  const auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

}  // namespace

std::vector<DisplacementRow> parse_displacements(std::istream& in) {
  std::vector<DisplacementRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (skip_line(line)) continue;
    const auto f = split_commas(line);
    if (f.size() != 4) throw ParseError("expected frame,det_index,dx,dy", n);
    const double frame = field_real(f[0], n), index = field_real(f[1], n);
    if (frame < 1 || index < 0 || frame != std::floor(frame) || index != std::floor(index))
      throw ParseError("frame must be a 1-based integer and det_index a 0-based integer", n);
    rows.push_back({static_cast<int>(frame) - 1, static_cast<std::size_t>(index),
                    {field_real(f[2], n), field_real(f[3], n)}});
  }
  return rows;
}

DetectionMotion::DetectionMotion(std::span<const Detection> dets, std::span<const DisplacementRow> rows) {
  for (const auto& r : rows) {
    if (r.det_index >= dets.size())
      throw PreconditionError("displacement row references detection " + std::to_string(r.det_index) + " of " +
                              std::to_string(dets.size()));
    const auto& d = dets[r.det_index];
    if (d.frame != r.frame)
      throw PreconditionError("displacement row for detection " + std::to_string(r.det_index) +
                              " names frame " + std::to_string(r.frame + 1) + ", detection is in frame " +
                              std::to_string(d.frame + 1));
    samples_.emplace(d.frame, std::make_pair(d.box, r.motion));
  }
}

Displacement DetectionMotion::at(int frame, const Box& box) const {
  Displacement best{};
  double best_iou = 0.0;
  for (auto [it, end] = samples_.equal_range(frame); it != end; ++it) {
    const double v = iou(box, it->second.first);
    if (v > best_iou) {
      best_iou = v;
      best = it->second.second;
    }
  }
  return best;
}

namespace {

std::optional<Box> clip(const Box& b, const std::optional<std::pair<double, double>>& image) {
  if (!image) return b;
  const double l = std::max(b.left(), 0.0), t = std::max(b.top(), 0.0);
  const double r = std::min(b.right(), image->first), btm = std::min(b.bottom(), image->second);
  if (!(r > l) || !(btm > t)) return std::nullopt;
  return Box::from_corners(l, t, r, btm);
}

}  // namespace

std::vector<Detection> mgp(std::span<const Detection> dets, const MgpOptions& options, const MotionField& motion) {
  if (options.window < 0) throw PreconditionError("MGP window must be non-negative");
  if (!(options.decay >= 0.0 && options.decay <= 1.0)) throw PreconditionError("MGP decay must lie in [0, 1]");

  std::vector<Detection> out(dets.begin(), dets.end());
  for (const auto& d : dets) {
    for (const int dir : {-1, 1}) {
      Box box = d.box;
      double score = d.score;
      for (int step = 1; step <= options.window; ++step) {
        const int from = d.frame + dir * (step - 1);
        const int to = d.frame + dir * step;
        // Forward uses the motion out of `from`; backward undoes the motion into it.
        const Displacement m = dir > 0 ? motion.at(from, box) : motion.at(to, box);
        box.cx += dir * m.dx;
        box.cy += dir * m.dy;
        score *= options.decay;
        if (to < 0 || (options.frame_count > 0 && to >= options.frame_count)) break;
        const auto placed = clip(box, options.image_size);
        if (!placed) continue;
        Detection copy = d;
        copy.frame = to;
        copy.box = *placed;
        copy.score = score;
        out.push_back(copy);
      }
    }
  }
  return out;
}

std::vector<TrackerBox> parse_tracker_boxes(std::istream& in) {
  std::vector<TrackerBox> boxes;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (skip_line(line)) continue;
    const auto f = split_commas(line);
    if (f.size() < 6) throw ParseError("expected frame,source_index,left,top,width,height", n);
    const double frame = field_real(f[0], n), source = field_real(f[1], n);
    if (frame < 1 || source < 0 || frame != std::floor(frame) || source != std::floor(source))
      throw ParseError("frame must be a 1-based integer and source_index a 0-based integer", n);
    const double w = field_real(f[4], n), h = field_real(f[5], n);
    if (!(w > 0.0) || !(h > 0.0)) throw ParseError("rejected row: non-positive box size", n);
    boxes.push_back({static_cast<int>(frame) - 1, Box::from_ltwh(field_real(f[2], n), field_real(f[3], n), w, h),
                     static_cast<std::size_t>(source)});
  }
  return boxes;
}

std::vector<Detection> track_fuse(std::span<const Detection> dets, std::span<const TrackerBox> tracker_boxes,
                                  double min_score, double min_iou) {
  std::multimap<int, std::size_t> by_frame;
  for (std::size_t i = 0; i < dets.size(); ++i) by_frame.emplace(dets[i].frame, i);

  std::vector<std::vector<Box>> paired(dets.size());
  for (const auto& t : tracker_boxes) {
    if (t.source >= dets.size())
      throw PreconditionError("tracker box references detection " + std::to_string(t.source) + " of " +
                              std::to_string(dets.size()));
    const Detection& source = dets[t.source];
    if (!(source.score > min_score)) continue;
    double best = 0.0;
    std::optional<std::size_t> best_i;
    for (auto [it, end] = by_frame.equal_range(t.frame); it != end; ++it) {
      if (dets[it->second].class_id != source.class_id) continue;
      const double v = iou(t.box, dets[it->second].box);
      if (v > best) best = v, best_i = it->second;
    }
    if (best_i && best >= min_iou) paired[*best_i].push_back(t.box);
  }

  std::vector<Detection> out(dets.begin(), dets.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (paired[i].empty()) continue;
    Box sum = out[i].box;
    for (const auto& b : paired[i]) {
      sum.cx += b.cx;
      sum.cy += b.cy;
      sum.w += b.w;
      sum.h += b.h;
    }
    const double n = static_cast<double>(paired[i].size() + 1);
    out[i].box = Box{sum.cx / n, sum.cy / n, sum.w / n, sum.h / n};
  }
  return out;
}

}  // namespace stabeval
