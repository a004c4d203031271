#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stabeval/core.hpp"
#include "stabeval/report.hpp"

namespace stabeval {

enum class FormatKind { kMotGt, kMotDet, kKittiTracking, kNativeJson };

/// A row that parsed but did not become a box, with the reason.
struct SkippedRow {
  std::size_t line = 0;
  std::string reason;
};

// MOT-Challenge text formats. Frames are 1-based on disk, 0-based in memory.
// Corner boxes (left, top, width, height) become center boxes.

/// `frame,id,left,top,width,height,conf,class,visibility` (MOT16) or
/// `frame,id,left,top,width,height,conf,x,y,z` (MOT15, no class column).
/// Rows with conf 0 or a non-pedestrian class become ignore regions.
Sequence parse_mot_gt(std::istream& in, const std::string& name = {}, std::vector<SkippedRow>* skipped = nullptr);

/// `frame,id,left,top,width,height,score,...`; id -1 means no track id.
std::vector<Detection> parse_mot_det(std::istream& in);

void write_mot_det(std::ostream& out, const std::vector<Detection>& dets);

/// KITTI tracking labels: `frame track_id type truncated occluded alpha l t r b ...`.
/// Rows of keep_class become trajectory boxes (class id 1), DontCare rows become
/// ignore regions, every other row is skipped.
Sequence parse_kitti_tracking(std::istream& in, const std::string& keep_class, const std::string& name = {},
                              std::vector<SkippedRow>* skipped = nullptr);

/// KITTI tracking results: the label layout with the score as field 18.
std::vector<Detection> parse_kitti_detections(std::istream& in, const std::string& keep_class);

/// Native interchange document. Either part may be absent.
struct NativeDocument {
  std::optional<Sequence> sequence;
  std::optional<std::vector<Detection>> detections;
};

NativeDocument read_native(std::istream& in);
void write_native(std::ostream& out, const NativeDocument& doc);

/// Report as JSON: sorted keys, 9 significant digits, every curve sampled on
/// the recall grid. Byte-identical for equal reports.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

void write_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport read_report(const std::filesystem::path& path);

/// Curve table with header `iou_threshold,recall,value,metric`. Metric names are
/// precision, E_F, E_C, E_R; with several classes they carry a `:class` suffix.
void write_curves_csv(std::ostream& out, const EvaluationReport& report);

/// Formats a value with 9 significant digits.
std::string format_real(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stabeval
