#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stabeval/report.hpp"

namespace stabeval {

struct MetricSample {
  std::string sequence;
  std::string method;
  double accuracy = 0.0;
  double E_F = 0.0;
  double E_C = 0.0;
  double E_R = 0.0;
};

inline constexpr const char* kMetricNames[4] = {"accuracy", "E_F", "E_C", "E_R"};

MetricSample sample_from(const EvaluationReport& report);

/// Absolute Pearson correlation between the columns accuracy, E_F, E_C, E_R.
/// Needs at least 3 samples and no constant column (the error names it).
Eigen::Matrix4d correlation_matrix(std::span<const MetricSample> samples);

struct ScatterPoint {
  std::string method;
  std::string sequence;
  double accuracy = 0.0;  // mAUC in [0, 1]
  double stability = 0.0;
};

/// One (accuracy, stability) point per report. Reports must share one IoU grid.
std::vector<ScatterPoint> scatter_points(std::span<const EvaluationReport> reports);

/// 4x4 table with a header row and a label column.
void write_correlation_csv(std::ostream& out, const Eigen::Matrix4d& corr);

/// `method,sequence,accuracy,stability`; accuracy printed as mAUC x 100.
void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points);

}  // namespace stabeval
