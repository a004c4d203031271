#include "stabeval/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace stabeval {

namespace {

struct Contribution {
  double fragment = 0.0;
  double center = 0.0;
  double scale_ratio = 0.0;
  int detected = 0;  // trajectories with at least one matched frame

  Contribution operator+(const Contribution& o) const {
    return {fragment + o.fragment, center + o.center, scale_ratio + o.scale_ratio, detected + o.detected};
  }
};

// Sum tree over per-trajectory contributions. The root is a fixed-shape
// pairwise sum of the current leaves, so it carries no history: the same leaves
// always give bit-identical totals.
class SumTree {
 public:
  explicit SumTree(std::size_t n) {
    size_ = 1;
    while (size_ < n) size_ <<= 1;
    nodes_.assign(2 * size_, Contribution{});
  }
  void set(std::size_t i, const Contribution& c) {
    std::size_t p = i + size_;
    nodes_[p] = c;
    for (p >>= 1; p >= 1; p >>= 1) nodes_[p] = nodes_[2 * p] + nodes_[2 * p + 1];
  }
  const Contribution& total() const { return nodes_[1]; }

 private:
  std::size_t size_;
  std::vector<Contribution> nodes_;
};

// Count, mean and sum of squared deviations of the four deviation series
// (e_x, e_y, e_s, e_r) over a set of matched frames.
struct Moments {
  double n = 0.0;
  double mean[4] = {0.0, 0.0, 0.0, 0.0};
  double m2[4] = {0.0, 0.0, 0.0, 0.0};
};

// Pairwise merge of two moment sets. Equal means give delta 0, so a constant
// series keeps m2 at exactly 0.
Moments merge(const Moments& a, const Moments& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments m;
  m.n = a.n + b.n;
  for (int i = 0; i < 4; ++i) {
    const double delta = b.mean[i] - a.mean[i];
    m.mean[i] = a.mean[i] + delta * (b.n / m.n);
    m.m2[i] = a.m2[i] + b.m2[i] + delta * delta * (a.n * b.n / m.n);
  }
  return m;
}

// One fixed-shape merge tree per trajectory, leaves in frame order.
class MomentForest {
 public:
  explicit MomentForest(const std::vector<std::size_t>& offsets) {
    for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
      std::size_t size = 1;
      while (size < offsets[k + 1] - offsets[k]) size <<= 1;
      base_.push_back(nodes_size_);
      leaves_.push_back(size);
      nodes_size_ += 2 * size;
    }
    nodes_.resize(nodes_size_);
  }

  void set(std::size_t k, std::size_t i, const Moments& leaf) {
    Moments* t = nodes_.data() + base_[k];
    std::size_t p = leaves_[k] + i;
    t[p] = leaf;
    for (p >>= 1; p >= 1; p >>= 1) t[p] = merge(t[2 * p], t[2 * p + 1]);
  }

  const Moments& root(std::size_t k) const { return nodes_[base_[k] + 1]; }

 private:
  std::vector<std::size_t> base_, leaves_;
  std::size_t nodes_size_ = 0;
  std::vector<Moments> nodes_;
};

double std_of(const Moments& m, int i) { return m.n > 0.0 && m.m2[i] > 0.0 ? std::sqrt(m.m2[i] / m.n) : 0.0; }

}  // namespace

ScoreSweep::ScoreSweep(std::span<const Detection> dets, const Sequence& seq, int class_id) {
  std::unordered_map<int, int> frame_index;
  auto frame_slot = [&](int frame) {
    auto [it, inserted] = frame_index.try_emplace(frame, static_cast<int>(frames_.size()));
    if (inserted) frames_.emplace_back();
    return it->second;
  };

  traj_offset_.push_back(0);
  for (const auto& t : seq.trajectories) {
    if (t.class_id != class_id) continue;
    const int traj = static_cast<int>(traj_offset_.size()) - 1;
    for (const auto& [frame, box] : t.boxes) {
      const int e = static_cast<int>(entry_box_.size());
      entry_traj_.push_back(traj);
      entry_box_.push_back(box);
      frames_[frame_slot(frame)].entries.push_back(e);
    }
    traj_offset_.push_back(entry_box_.size());
  }

  for (const auto& d : dets) {
    if (d.class_id != class_id) continue;
    const int i = static_cast<int>(det_box_.size());
    const int f = frame_slot(d.frame);
    det_box_.push_back(d.box);
    det_score_.push_back(d.score);
    det_frame_.push_back(f);
    det_row_.push_back(static_cast<int>(frames_[f].dets.size()));
    frames_[f].dets.push_back(i);
  }

  det_max_iou_.assign(det_box_.size(), 0.0);
  for (auto& fr : frames_) {
    fr.ious.resize(fr.dets.size(), fr.entries.size());
    for (std::size_t r = 0; r < fr.dets.size(); ++r) {
      double best = 0.0;
      for (std::size_t c = 0; c < fr.entries.size(); ++c) {
        const double v = iou(det_box_[fr.dets[r]], entry_box_[fr.entries[c]]);
        fr.ious(r, c) = v;
        best = std::max(best, v);
      }
      det_max_iou_[fr.dets[r]] = best;
    }
  }

  order_.resize(det_box_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return det_score_[a] > det_score_[b]; });
}

std::vector<OperatingPoint> ScoreSweep::run(double iou_threshold, SubThresholdPolicy policy) const {
  const std::size_t n_traj = trajectory_count();
  const std::size_t n_entries = entry_box_.size();
  const bool gate = policy == SubThresholdPolicy::kGateBeforeSolve;

  std::vector<char> kept(det_box_.size(), 0);
  std::vector<int> entry_det(n_entries, -1);
  std::vector<int> fragments(n_traj, 0);
  std::vector<char> traj_dirty(n_traj, 0), frame_touched(frames_.size(), 0);
  std::vector<int> dirty, touched;
  SumTree tree(n_traj);
  MomentForest moments(traj_offset_);

  auto refresh = [&](int k) {
    const std::size_t t = traj_offset_[k + 1] - traj_offset_[k];
    const Moments& m = moments.root(k);
    Contribution c;
    c.fragment = t > 1 ? static_cast<double>(fragments[k]) / static_cast<double>(t - 1) : 0.0;
    if (m.n > 0.0) {
      c.detected = 1;
      c.center = std_of(m, 0) + std_of(m, 1);
      c.scale_ratio = std_of(m, 2) + std_of(m, 3);
    }
    tree.set(k, c);
  };

  auto set_entry = [&](int entry, int det) {
    const int old = entry_det[entry];
    if (old == det) return;
    const int k = entry_traj_[entry];
    const bool was = old >= 0, now = det >= 0;
    if (was != now) {
      const auto b = static_cast<int>(traj_offset_[k]), e = static_cast<int>(traj_offset_[k + 1]);
      for (const int nb : {entry - 1, entry + 1}) {
        if (nb < b || nb >= e) continue;
        const bool s = entry_det[nb] >= 0;
        fragments[k] += (s != now) - (s != was);
      }
    }
    entry_det[entry] = det;
    Moments leaf;
    if (now) {
      const Deviation dev = deviation(det_box_[det], entry_box_[entry]);
      leaf.n = 1.0;
      leaf.mean[0] = dev.e_x;
      leaf.mean[1] = dev.e_y;
      leaf.mean[2] = dev.e_s;
      leaf.mean[3] = dev.e_r;
    }
    moments.set(k, entry - traj_offset_[k], leaf);
    if (!traj_dirty[k]) {
      traj_dirty[k] = 1;
      dirty.push_back(k);
    }
  };

  std::vector<int> rows;
  std::vector<int> new_assign;
  auto rematch = [&](int f) {
    const Frame& fr = frames_[f];
    rows.clear();
    for (std::size_t r = 0; r < fr.dets.size(); ++r)
      if (kept[fr.dets[r]]) rows.push_back(static_cast<int>(r));
    Eigen::MatrixXd sub(rows.size(), fr.entries.size());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(i) = fr.ious.row(rows[i]);
    new_assign.assign(fr.entries.size(), -1);
    for (const auto& [r, c] : match_ious(sub, iou_threshold, policy)) new_assign[c] = fr.dets[rows[r]];
    for (std::size_t c = 0; c < fr.entries.size(); ++c) set_entry(fr.entries[c], new_assign[c]);
  };

  std::vector<OperatingPoint> points;
  std::size_t kept_count = 0;
  std::size_t matched_count = 0;
  for (std::size_t g = 0; g < order_.size();) {
    const double score = det_score_[order_[g]];
    for (; g < order_.size() && det_score_[order_[g]] == score; ++g) {
      const int d = order_[g];
      kept[d] = 1;
      ++kept_count;
      const bool usable = gate ? det_max_iou_[d] >= iou_threshold : det_max_iou_[d] > 0.0;
      if (usable && !frame_touched[det_frame_[d]]) {
        frame_touched[det_frame_[d]] = 1;
        touched.push_back(det_frame_[d]);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const int f : touched) {
      for (const int e : frames_[f].entries) matched_count -= entry_det[e] >= 0;
      rematch(f);
      for (const int e : frames_[f].entries) matched_count += entry_det[e] >= 0;
      frame_touched[f] = 0;
    }
    touched.clear();
    for (const int k : dirty) {
      refresh(k);
      traj_dirty[k] = 0;
    }
    dirty.clear();

    const Contribution& total = tree.total();
    OperatingPoint p;
    p.score_threshold = score;
    p.kept = kept_count;
    p.matched = matched_count;
    p.recall = n_entries > 0 ? static_cast<double>(matched_count) / static_cast<double>(n_entries) : 0.0;
    p.precision = static_cast<double>(matched_count) / static_cast<double>(kept_count);
    p.fragment = n_traj > 0 ? total.fragment / static_cast<double>(n_traj) : 0.0;
    if (total.detected > 0) {
      p.center = total.center / total.detected;
      p.scale_ratio = total.scale_ratio / total.detected;
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace stabeval
