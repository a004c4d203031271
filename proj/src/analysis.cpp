#include "stabeval/analysis.hpp"

#include <cmath>
#include <ostream>

#include "stabeval/io.hpp"

namespace stabeval {

MetricSample sample_from(const EvaluationReport& report) {
  return {report.sequence, report.method, report.accuracy_auc, report.E_F, report.E_C, report.E_R};
}

Eigen::Matrix4d correlation_matrix(std::span<const MetricSample> samples) {
  if (samples.size() < 3)
    throw PreconditionError("need at least 3 samples, got " + std::to_string(samples.size()));

  Eigen::MatrixXd x(samples.size(), 4);
  for (std::size_t i = 0; i < samples.size(); ++i)
    x.row(i) << samples[i].accuracy, samples[i].E_F, samples[i].E_C, samples[i].E_R;

  const Eigen::RowVector4d mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::RowVector4d norms = centered.colwise().norm();
  for (int c = 0; c < 4; ++c) {
    const bool constant = (x.col(c).array() == x(0, c)).all();
    if (constant || norms(c) == 0.0) throw PreconditionError(std::string("column ") + kMetricNames[c] + " is constant");
  }
  const Eigen::MatrixXd unit = centered.array().rowwise() / norms.array();
  const Eigen::Matrix4d raw = unit.transpose() * unit;
  // Symmetrize, clip rounding above 1 and keep the diagonal exact.
  Eigen::Matrix4d corr = ((raw + raw.transpose()) / 2.0).cwiseAbs().cwiseMin(1.0);
  corr.diagonal().setOnes();
  return corr;
}

std::vector<ScatterPoint> scatter_points(std::span<const EvaluationReport> reports) {
  std::vector<ScatterPoint> out;
  for (const auto& r : reports) {
    if (!(r.grid() == reports.front().grid()))
      throw PreconditionError("report for " + r.method + "/" + r.sequence + " uses a different IoU grid");
    out.push_back({r.method, r.sequence, r.accuracy_auc, r.stability});
  }
  return out;
}

void write_correlation_csv(std::ostream& out, const Eigen::Matrix4d& corr) {
  out << "metric";
  for (const auto* n : kMetricNames) out << ',' << n;
  out << '\n';
  for (int r = 0; r < 4; ++r) {
    out << kMetricNames[r];
    for (int c = 0; c < 4; ++c) out << ',' << format_real(corr(r, c));
    out << '\n';
  }
}

void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points) {
  out << "method,sequence,accuracy,stability\n";
  for (const auto& p : points)
    out << p.method << ',' << p.sequence << ',' << format_real(100.0 * p.accuracy) << ',' << format_real(p.stability)
        << '\n';
}

}  // namespace stabeval
