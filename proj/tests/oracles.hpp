#pragma once

// Test-only reference computations. Each one recomputes a quantity straight
// from its definition, without going through the code path it checks.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/matching.hpp"

namespace stabeval::oracle {

/// Maximum total weight over every injective row->column map (rows <= cols
/// after transposing), by enumerating permutations.
inline double best_assignment_total(const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd m = w.rows() <= w.cols() ? w : Eigen::MatrixXd(w.transpose());
  if (m.size() == 0) return 0.0;
  std::vector<int> cols(m.cols());
  std::iota(cols.begin(), cols.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) total += m(r, cols[r]);
    best = std::max(best, total);
    // Only the first rows() entries matter; skip permutations of the tail.
    std::reverse(cols.begin() + m.rows(), cols.end());
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Population std via the raw-moment route sqrt(E[x^2] - E[x]^2).
inline double raw_moment_std(const std::vector<double>& v) {
  if (v.size() <= 1) return 0.0;
  long double s = 0, s2 = 0;
  for (double x : v) s += x, s2 += static_cast<long double>(x) * x;
  const long double n = v.size();
  const long double var = s2 / n - (s / n) * (s / n);
  return var > 0 ? static_cast<double>(std::sqrt(var)) : 0.0;
}

struct Components {
  double fragment = 0, center = 0, scale_ratio = 0, recall = 0;
  std::size_t matched = 0, kept = 0;
};

/// Eq. 2-4 recomputed naively at one operating point: per-frame matching from
/// scratch, then status changes counted and deviations taken per trajectory.
inline Components components_at(const std::vector<Detection>& dets, const Sequence& seq, int class_id,
                                double min_iou, double min_score) {
  Components out;
  std::map<int, std::vector<Detection>> by_frame;
  for (const auto& d : dets)
    if (d.class_id == class_id && d.score >= min_score) by_frame[d.frame].push_back(d), ++out.kept;

  std::map<std::pair<std::int64_t, int>, Box> matched;  // (trajectory id, frame) -> det box
  std::map<int, std::vector<GroundTruthBox>> gt_by_frame;
  for (const auto& t : seq.trajectories)
    if (t.class_id == class_id)
      for (const auto& [f, b] : t.boxes) gt_by_frame[f].push_back({t.id, b});
  for (const auto& [f, gts] : gt_by_frame) {
    const auto it = by_frame.find(f);
    if (it == by_frame.end()) continue;
    for (const auto& p : match_frame(it->second, gts, min_iou).pairs)
      matched[{p.trajectory_id, f}] = it->second[p.detection].box;
  }

  double frag = 0, center = 0, scale = 0;
  std::size_t n = 0, detected_traj = 0, total = 0;
  for (const auto& t : seq.trajectories) {
    if (t.class_id != class_id) continue;
    ++n;
    std::vector<int> status;
    std::vector<double> ex, ey, es, er;
    for (const auto& [f, g] : t.boxes) {
      ++total;
      const auto m = matched.find({t.id, f});
      status.push_back(m != matched.end());
      if (m == matched.end()) continue;
      const Box& p = m->second;
      ex.push_back((p.cx - g.cx) / g.w);
      ey.push_back((p.cy - g.cy) / g.h);
      es.push_back(std::sqrt(p.w * p.h / (g.w * g.h)));
      er.push_back((p.w / p.h) / (g.w / g.h));
    }
    out.matched += ex.size();
    if (status.size() > 1) {
      int changes = 0;
      for (std::size_t i = 1; i < status.size(); ++i) changes += status[i] != status[i - 1];
      frag += static_cast<double>(changes) / static_cast<double>(status.size() - 1);
    }
    if (!ex.empty()) {
      ++detected_traj;
      center += raw_moment_std(ex) + raw_moment_std(ey);
      scale += raw_moment_std(es) + raw_moment_std(er);
    }
  }
  out.fragment = n ? frag / n : 0.0;
  out.center = detected_traj ? center / detected_traj : 0.0;
  out.scale_ratio = detected_traj ? scale / detected_traj : 0.0;
  out.recall = total ? static_cast<double>(out.matched) / total : 0.0;
  return out;
}

/// Distinct detection scores of a class, highest first.
inline std::vector<double> score_cuts(const std::vector<Detection>& dets, int class_id) {
  std::set<double, std::greater<>> s;
  for (const auto& d : dets)
    if (d.class_id == class_id) s.insert(d.score);
  return {s.begin(), s.end()};
}

/// AP by enumerating every score cut and integrating the precision envelope
/// on a fine recall lattice (every distinct recall is a multiple of 1/total).
inline double brute_force_ap(const std::vector<Detection>& dets, const Sequence& seq, int class_id, double min_iou) {
  std::vector<std::pair<double, double>> pr;
  for (const double cut : score_cuts(dets, class_id)) {
    const auto c = components_at(dets, seq, class_id, min_iou, cut);
    pr.emplace_back(c.recall, static_cast<double>(c.matched) / c.kept);
  }
  const std::size_t total = seq.box_count(class_id);
  double ap = 0.0;
  for (std::size_t k = 1; k <= total; ++k) {
    const double r = static_cast<double>(k) / total;
    double best = 0.0;
    for (const auto& [rec, prec] : pr)
      if (rec >= r - 1e-12) best = std::max(best, prec);
    ap += best / total;
  }
  return ap;
}

/// Random small scene: a few trajectories with gaps and noisy detections.
inline std::pair<Sequence, std::vector<Detection>> random_scene(std::mt19937_64& rng, int frames = 12,
                                                               int n_traj = 4, int n_classes = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sequence seq;
  seq.name = "random";
  seq.frame_count = frames;
  std::vector<Detection> dets;
  for (int k = 0; k < n_traj; ++k) {
    Trajectory t;
    t.id = 100 + k;
    t.class_id = 1 + k % n_classes;
    const double x = 20 + 30 * k + 10 * u(rng), y = 40 + 5 * u(rng);
    const double w = 15 + 10 * u(rng), h = 20 + 15 * u(rng);
    for (int f = 0; f < frames; ++f) {
      if (u(rng) < 0.15) continue;  // gap
      t.boxes[f] = Box{x + 1.5 * f, y + 0.5 * f, w, h};
    }
    if (t.boxes.empty()) t.boxes[0] = Box{x, y, w, h};
    for (const auto& [f, b] : t.boxes) {
      const int copies = u(rng) < 0.2 ? 0 : (u(rng) < 0.2 ? 2 : 1);
      for (int c = 0; c < copies; ++c) {
        Detection d;
        d.frame = f;
        d.class_id = t.class_id;
        d.box = Box{b.cx + (u(rng) - 0.5) * 0.5 * b.w, b.cy + (u(rng) - 0.5) * 0.5 * b.h, b.w * (0.8 + 0.4 * u(rng)),
                    b.h * (0.8 + 0.4 * u(rng))};
        d.score = std::round(u(rng) * 20) / 20;  // coarse, so ties happen
        dets.push_back(d);
      }
    }
    seq.trajectories.push_back(std::move(t));
  }
  for (int i = 0; i < frames; ++i) {  // clutter
    Detection d;
    d.frame = static_cast<int>(u(rng) * frames);
    d.class_id = 1 + static_cast<int>(u(rng) * n_classes);
    d.box = Box{200 * u(rng), 60 * u(rng), 10 + 20 * u(rng), 10 + 20 * u(rng)};
    d.score = std::round(u(rng) * 20) / 20;
    dets.push_back(d);
  }
  return {seq, dets};
}

}  // namespace stabeval::oracle
