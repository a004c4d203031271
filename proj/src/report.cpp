#include "stabeval/report.hpp"

#include <map>
#include <cmath>
#include <set>

namespace stabeval {

const IoUGrid& EvaluationReport::grid() const {
  static const IoUGrid empty;
  return classes.empty() ? empty : classes.front().grid;
}

std::vector<Detection> remove_ignored(std::span<const Detection> dets, const Sequence& seq, double min_iou) {
  std::multimap<int, Box> regions;
  for (const auto& r : seq.ignore_regions) regions.emplace(r.frame, r.box);
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    bool ignored = false;
    for (auto [it, end] = regions.equal_range(d.frame); it != end && !ignored; ++it)
      ignored = iou(d.box, it->second) >= min_iou;
    if (!ignored) out.push_back(d);
  }
  return out;
}

EvaluationReport evaluate(std::span<const Detection> dets, const Sequence& seq, const EvaluationOptions& options) {
  seq.validate();
  for (const auto& d : dets) {
    if (d.frame < 0 || d.frame >= seq.frame_count)
      throw PreconditionError("detection at frame " + std::to_string(d.frame) + " outside sequence '" + seq.name +
                              "' of " + std::to_string(seq.frame_count) + " frames");
    if (!d.box.valid() || !std::isfinite(d.score))
      throw PreconditionError("invalid detection at frame " + std::to_string(d.frame));
  }

  std::set<int> classes;
  if (options.class_id) {
    classes.insert(*options.class_id);
  } else {
    for (const auto& t : seq.trajectories) classes.insert(t.class_id);
  }
  if (classes.empty()) throw PreconditionError("undefined recall: sequence '" + seq.name + "' has no ground truth");

  const auto kept = remove_ignored(dets, seq, options.ignore_iou);

  EvaluationReport report;
  report.sequence = seq.name;
  for (const int c : classes)
    report.classes.push_back(stability_score(kept, seq, c, options.grid, options.workers, options.policy));
  summarize(report);
  return report;
}

void summarize(EvaluationReport& report) {
  if (report.classes.empty()) return;
  const double n = static_cast<double>(report.classes.size());
  report.accuracy_auc = report.E_F = report.E_C = report.E_R = 0.0;
  for (const auto& c : report.classes) {
    report.accuracy_auc += c.accuracy_auc;
    report.E_F += c.E_F;
    report.E_C += c.E_C;
    report.E_R += c.E_R;
  }
  report.accuracy_auc /= n;
  report.E_F /= n;
  report.E_C /= n;
  report.E_R /= n;
  report.stability = report.E_F + report.E_C + report.E_R;
}

}  // namespace stabeval
