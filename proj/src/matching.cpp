#include "stabeval/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stabeval/hungarian.hpp"

namespace stabeval {

std::vector<std::pair<Eigen::Index, Eigen::Index>> match_ious(const Eigen::Ref<const Eigen::MatrixXd>& ious,
                                                              double min_iou, SubThresholdPolicy policy) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  if (ious.size() == 0) return out;

  const bool gate = policy == SubThresholdPolicy::kGateBeforeSolve;
  auto usable = [&](double v) { return gate ? v >= min_iou : v > 0.0; };

  std::vector<Eigen::Index> rows, cols;
  std::vector<char> col_used(ious.cols(), 0);
  for (Eigen::Index r = 0; r < ious.rows(); ++r) {
    bool any = false;
    for (Eigen::Index c = 0; c < ious.cols(); ++c) {
      if (usable(ious(r, c))) {
        any = true;
        col_used[c] = 1;
      }
    }
    if (any) rows.push_back(r);
  }
  for (Eigen::Index c = 0; c < ious.cols(); ++c)
    if (col_used[c]) cols.push_back(c);
  if (rows.empty()) return out;

  Eigen::MatrixXd w(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = ious(rows[i], cols[j]);
      w(i, j) = usable(v) ? v : 0.0;
    }

  for (const auto& [i, j] : hungarian_max(w)) {
    const Eigen::Index r = rows[i], c = cols[j];
    if (ious(r, c) >= min_iou && usable(ious(r, c))) out.emplace_back(r, c);
  }
  return out;
}

FrameAssignment match_frame(std::span<const Detection> dets, std::span<const GroundTruthBox> gts, double min_iou,
                            SubThresholdPolicy policy) {
  Eigen::MatrixXd ious(dets.size(), gts.size());
  for (std::size_t i = 0; i < dets.size(); ++i)
    for (std::size_t j = 0; j < gts.size(); ++j) ious(i, j) = iou(dets[i].box, gts[j].box);

  FrameAssignment out;
  std::vector<char> det_paired(dets.size(), 0), gt_paired(gts.size(), 0);
  for (const auto& [r, c] : match_ious(ious, min_iou, policy)) {
    out.pairs.push_back({static_cast<std::size_t>(r), gts[c].trajectory_id, ious(r, c)});
    det_paired[r] = 1;
    gt_paired[c] = 1;
  }
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (!det_paired[i]) out.unmatched_detections.push_back(i);
  for (std::size_t j = 0; j < gts.size(); ++j)
    if (!gt_paired[j]) out.unmatched_gt.push_back(gts[j].trajectory_id);
  return out;
}

Deviation deviation(const Box& predicted, const Box& truth) {
  Deviation d;
  d.e_x = (predicted.cx - truth.cx) / truth.w;
  d.e_y = (predicted.cy - truth.cy) / truth.h;
  d.e_s = std::sqrt((predicted.w * predicted.h) / (truth.w * truth.h));
  d.e_r = (predicted.w / predicted.h) / (truth.w / truth.h);
  return d;
}

std::vector<EvaluatedTrajectory> associate_sequence(std::span<const Detection> dets, const Sequence& seq,
                                                    double min_iou, double min_score, std::optional<int> class_id,
                                                    SubThresholdPolicy policy) {
  // frame -> (trajectory slot, GT box)
  std::map<int, std::vector<std::pair<std::size_t, GroundTruthBox>>> gt_by_frame;
  std::vector<std::size_t> slots;
  for (std::size_t k = 0; k < seq.trajectories.size(); ++k) {
    const auto& t = seq.trajectories[k];
    if (class_id && t.class_id != *class_id) continue;
    slots.push_back(k);
    for (const auto& [frame, box] : t.boxes) gt_by_frame[frame].push_back({k, GroundTruthBox{t.id, box}});
  }

  std::map<int, std::vector<Detection>> dets_by_frame;
  for (const auto& d : dets) {
    if (d.score < min_score) continue;
    if (class_id && d.class_id != *class_id) continue;
    dets_by_frame[d.frame].push_back(d);
  }

  // (trajectory slot, frame) -> matched detection box
  std::map<std::pair<std::size_t, int>, Box> matched;
  for (const auto& [frame, entries] : gt_by_frame) {
    auto it = dets_by_frame.find(frame);
    if (it == dets_by_frame.end()) continue;
    std::vector<GroundTruthBox> gts;
    gts.reserve(entries.size());
    for (const auto& e : entries) gts.push_back(e.second);
    const auto assignment = match_frame(it->second, gts, min_iou, policy);
    for (const auto& p : assignment.pairs) {
      const auto e = std::find_if(entries.begin(), entries.end(),
                                  [&](const auto& x) { return x.second.trajectory_id == p.trajectory_id; });
      matched.emplace(std::make_pair(e->first, frame), it->second[p.detection].box);
    }
  }

  std::vector<EvaluatedTrajectory> out;
  out.reserve(slots.size());
  for (const std::size_t k : slots) {
    const auto& t = seq.trajectories[k];
    EvaluatedTrajectory ev;
    ev.id = t.id;
    ev.statuses.reserve(t.boxes.size());
    for (const auto& [frame, gt_box] : t.boxes) {
      const auto m = matched.find({k, frame});
      const bool detected = m != matched.end();
      ev.statuses.push_back(detected);
      if (detected) {
        const Deviation d = deviation(m->second, gt_box);
        ev.e_x.push_back(d.e_x);
        ev.e_y.push_back(d.e_y);
        ev.e_s.push_back(d.e_s);
        ev.e_r.push_back(d.e_r);
      }
    }
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace stabeval
