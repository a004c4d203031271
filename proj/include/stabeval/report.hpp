#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/curve.hpp"
#include "stabeval/matching.hpp"
#include "stabeval/stability.hpp"

namespace stabeval {

inline constexpr const char* kToolVersion = "0.1.0";

struct EvaluationOptions {
  IoUGrid grid = IoUGrid::default_grid();
  std::optional<int> class_id;  // all GT classes when empty
  unsigned workers = 1;
  SubThresholdPolicy policy = SubThresholdPolicy::kGateBeforeSolve;
  double ignore_iou = 0.5;
};

/// One evaluated (method, sequence) pair: per-class reports plus their means.
struct EvaluationReport {
  std::string tool_version = kToolVersion;
  std::string method;
  std::string sequence;
  std::map<std::string, std::string> config;
  std::vector<StabilityReport> classes;
  double accuracy_auc = 0.0;  // mAUC in [0, 1]
  double E_F = 0.0;
  double E_C = 0.0;
  double E_R = 0.0;
  double stability = 0.0;  // E_F + E_C + E_R

  const IoUGrid& grid() const;
};

/// Drops detections overlapping a same-frame ignore region with IoU >= min_iou.
std::vector<Detection> remove_ignored(std::span<const Detection> dets, const Sequence& seq, double min_iou = 0.5);

/// Validates inputs, removes ignored detections and scores every class.
/// Throws PreconditionError on detections outside the sequence or when there is
/// no ground truth to compute recall against.
EvaluationReport evaluate(std::span<const Detection> dets, const Sequence& seq, const EvaluationOptions& options);

/// Recomputes the cross-class means from the class reports.
void summarize(EvaluationReport& report);

}  // namespace stabeval
