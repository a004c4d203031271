#include "stabeval/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace stabeval {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) fields.push_back(line.substr(b, i - b));
  }
  return fields;
}

double to_real(std::string_view s, std::size_t line, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(std::string("bad ") + field + " '" + std::string(s) + "'", line);
  return v;
}

long long to_int(std::string_view s, std::size_t line, const char* field) {
  // Some exporters write integer columns as "3.0".
  const double v = to_real(s, line, field);
  if (v != std::floor(v)) throw ParseError(std::string("non-integer ") + field + " '" + std::string(s) + "'", line);
  return static_cast<long long>(v);
}

bool blank_or_comment(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

Box checked_ltwh(double left, double top, double w, double h, std::size_t line) {
  if (!(w > 0.0) || !(h > 0.0)) throw ParseError("rejected row: non-positive box size", line);
  return Box::from_ltwh(left, top, w, h);
}

// Pedestrian class id in MOT16 ground truth.
constexpr long long kMotPedestrian = 1;

}  // namespace

Sequence parse_mot_gt(std::istream& in, const std::string& name, std::vector<SkippedRow>* skipped) {
  Sequence seq;
  seq.name = name;
  std::map<std::int64_t, Trajectory> tracks;
  std::string line;
  std::size_t n = 0;
  int max_frame = -1;
  while (std::getline(in, line)) {
    ++n;
    if (blank_or_comment(line)) {
      if (skipped && !trim(line).empty()) skipped->push_back({n, "comment"});
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() < 7) throw ParseError("expected at least 7 comma-separated fields, got " + std::to_string(f.size()), n);
    const long long frame1 = to_int(f[0], n, "frame");
    if (frame1 < 1) throw ParseError("frame numbers are 1-based", n);
    const int frame = static_cast<int>(frame1 - 1);
    const long long id = to_int(f[1], n, "id");
    const Box box = checked_ltwh(to_real(f[2], n, "left"), to_real(f[3], n, "top"), to_real(f[4], n, "width"),
                                 to_real(f[5], n, "height"), n);
    const double conf = to_real(f[6], n, "conf");
    // MOT16 carries a class column; MOT15 (x,y,z world coordinates) does not.
    const long long cls = f.size() == 9 ? to_int(f[7], n, "class") : kMotPedestrian;
    max_frame = std::max(max_frame, frame);

    if (conf == 0.0 || cls != kMotPedestrian) {
      seq.ignore_regions.push_back({frame, box});
      continue;
    }
    auto& t = tracks[id];
    t.id = id;
    t.class_id = 1;
    if (!t.boxes.emplace(frame, box).second)
      throw ParseError("trajectory " + std::to_string(id) + " repeats frame " + std::to_string(frame1), n);
  }
  seq.frame_count = max_frame + 1;
  for (auto& [id, t] : tracks) seq.trajectories.push_back(std::move(t));
  return seq;
}

std::vector<Detection> parse_mot_det(std::istream& in) {
  std::vector<Detection> dets;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (blank_or_comment(line)) continue;
    const auto f = split_csv(line);
    if (f.size() < 7) throw ParseError("expected at least 7 comma-separated fields, got " + std::to_string(f.size()), n);
    const long long frame1 = to_int(f[0], n, "frame");
    if (frame1 < 1) throw ParseError("frame numbers are 1-based", n);
    Detection d;
    d.frame = static_cast<int>(frame1 - 1);
    const long long id = to_int(f[1], n, "id");
    if (id != -1) d.track_id = id;
    d.box = checked_ltwh(to_real(f[2], n, "left"), to_real(f[3], n, "top"), to_real(f[4], n, "width"),
                         to_real(f[5], n, "height"), n);
    d.score = to_real(f[6], n, "score");
    d.class_id = 1;
    dets.push_back(d);
  }
  return dets;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_mot_det(std::ostream& out, const std::vector<Detection>& dets) {
  for (const auto& d : dets) {
    out << d.frame + 1 << ',' << (d.track_id ? *d.track_id : -1) << ',' << format_real(d.box.left()) << ','
        << format_real(d.box.top()) << ',' << format_real(d.box.w) << ',' << format_real(d.box.h) << ','
        << format_real(d.score) << ",-1,-1,-1\n";
  }
}

namespace {

struct KittiRow {
  int frame;
  long long track;
  std::string_view type;
  Box box;
};

KittiRow parse_kitti_row(const std::vector<std::string_view>& f, std::size_t n) {
  if (f.size() < 10) throw ParseError("expected at least 10 whitespace-separated fields, got " + std::to_string(f.size()), n);
  KittiRow row;
  const long long frame = to_int(f[0], n, "frame");
  if (frame < 0) throw ParseError("negative frame", n);
  row.frame = static_cast<int>(frame);
  row.track = to_int(f[1], n, "track_id");
  row.type = f[2];
  const double l = to_real(f[6], n, "left"), t = to_real(f[7], n, "top");
  const double r = to_real(f[8], n, "right"), b = to_real(f[9], n, "bottom");
  if (!(r > l) || !(b > t)) throw ParseError("rejected row: right <= left or bottom <= top", n);
  row.box = Box::from_corners(l, t, r, b);
  return row;
}

}  // namespace

Sequence parse_kitti_tracking(std::istream& in, const std::string& keep_class, const std::string& name,
                              std::vector<SkippedRow>* skipped) {
  Sequence seq;
  seq.name = name;
  std::map<std::int64_t, Trajectory> tracks;
  std::string line;
  std::size_t n = 0;
  int max_frame = -1;
  while (std::getline(in, line)) {
    ++n;
    if (blank_or_comment(line)) continue;
    const auto row = parse_kitti_row(split_ws(line), n);
    max_frame = std::max(max_frame, row.frame);
    if (row.type == "DontCare") {
      seq.ignore_regions.push_back({row.frame, row.box});
    } else if (row.type == keep_class) {
      auto& t = tracks[row.track];
      t.id = row.track;
      t.class_id = 1;
      if (!t.boxes.emplace(row.frame, row.box).second)
        throw ParseError("track " + std::to_string(row.track) + " repeats frame " + std::to_string(row.frame), n);
    } else if (skipped) {
      skipped->push_back({n, "class " + std::string(row.type) + " is not " + keep_class});
    }
  }
  seq.frame_count = max_frame + 1;
  for (auto& [id, t] : tracks) seq.trajectories.push_back(std::move(t));
  return seq;
}

std::vector<Detection> parse_kitti_detections(std::istream& in, const std::string& keep_class) {
  std::vector<Detection> dets;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (blank_or_comment(line)) continue;
    const auto f = split_ws(line);
    const auto row = parse_kitti_row(f, n);
    if (row.type != keep_class) continue;
    if (f.size() < 18) throw ParseError("detection row lacks the score field (18th)", n);
    Detection d;
    d.frame = row.frame;
    d.box = row.box;
    d.score = to_real(f[17], n, "score");
    d.class_id = 1;
    if (row.track >= 0) d.track_id = row.track;
    dets.push_back(d);
  }
  return dets;
}

// ---------------------------------------------------------------- native JSON

namespace {

// Rounds through the 9-significant-digit text form so that dumps are stable.
double sig9(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

json box_json(const Box& b) { return json::array({sig9(b.cx), sig9(b.cy), sig9(b.w), sig9(b.h)}); }

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("box must be [cx, cy, w, h]");
  const Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw ParseError("invalid box (w and h must be positive)");
  return b;
}

json sequence_json(const Sequence& s) {
  json trajectories = json::array();
  for (const auto& t : s.trajectories) {
    json boxes = json::array();
    for (const auto& [frame, b] : t.boxes) {
      json row = box_json(b);
      row.insert(row.begin(), frame);
      boxes.push_back(std::move(row));
    }
    trajectories.push_back({{"id", t.id}, {"class_id", t.class_id}, {"boxes", std::move(boxes)}});
  }
  json ignore = json::array();
  for (const auto& r : s.ignore_regions) {
    json row = box_json(r.box);
    row.insert(row.begin(), r.frame);
    ignore.push_back(std::move(row));
  }
  return {{"name", s.name},
          {"frame_count", s.frame_count},
          {"trajectories", std::move(trajectories)},
          {"ignore_regions", std::move(ignore)}};
}

// [frame, cx, cy, w, h]
std::pair<int, Box> frame_box_from(const json& row) {
  if (!row.is_array() || row.size() != 5) throw ParseError("expected [frame, cx, cy, w, h]");
  return {row[0].get<int>(), box_from(json::array({row[1], row[2], row[3], row[4]}))};
}

Sequence sequence_from(const json& j) {
  Sequence s;
  s.name = j.value("name", std::string{});
  s.frame_count = j.at("frame_count").get<int>();
  for (const auto& t : j.at("trajectories")) {
    Trajectory traj;
    traj.id = t.at("id").get<std::int64_t>();
    traj.class_id = t.value("class_id", 1);
    for (const auto& row : t.at("boxes")) {
      const auto [frame, box] = frame_box_from(row);
      if (!traj.boxes.emplace(frame, box).second)
        throw ParseError("trajectory " + std::to_string(traj.id) + " repeats frame " + std::to_string(frame));
    }
    s.trajectories.push_back(std::move(traj));
  }
  if (j.contains("ignore_regions"))
    for (const auto& row : j.at("ignore_regions")) {
      const auto [frame, box] = frame_box_from(row);
      s.ignore_regions.push_back({frame, box});
    }
  return s;
}

json detection_json(const Detection& d) {
  json j = {{"frame", d.frame}, {"box", box_json(d.box)}, {"score", sig9(d.score)}, {"class_id", d.class_id}};
  j["track_id"] = d.track_id ? json(*d.track_id) : json(nullptr);
  return j;
}

Detection detection_from(const json& j) {
  Detection d;
  d.frame = j.at("frame").get<int>();
  d.box = box_from(j.at("box"));
  d.score = j.at("score").get<double>();
  d.class_id = j.value("class_id", 1);
  if (j.contains("track_id") && !j.at("track_id").is_null()) d.track_id = j.at("track_id").get<std::int64_t>();
  return d;
}

}  // namespace

NativeDocument read_native(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  NativeDocument doc;
  try {
    if (j.contains("sequence")) doc.sequence = sequence_from(j.at("sequence"));
    if (j.contains("detections")) {
      std::vector<Detection> dets;
      for (const auto& d : j.at("detections")) dets.push_back(detection_from(d));
      doc.detections = std::move(dets);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("native document: ") + e.what());
  }
  return doc;
}

void write_native(std::ostream& out, const NativeDocument& doc) {
  json j = {{"format", "stabeval-native"}, {"version", 1}};
  if (doc.sequence) j["sequence"] = sequence_json(*doc.sequence);
  if (doc.detections) {
    json dets = json::array();
    for (const auto& d : *doc.detections) dets.push_back(detection_json(d));
    j["detections"] = std::move(dets);
  }
  out << j.dump(1) << '\n';
}

// ---------------------------------------------------------------- reports

namespace {

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (const double x : v) a.push_back(sig9(x));
  return a;
}

const std::pair<const char*, std::vector<double> ThresholdMetrics::*> kCurveMetrics[] = {
    {"precision", &ThresholdMetrics::precision_curve},
    {"E_F", &ThresholdMetrics::fragment_curve},
    {"E_C", &ThresholdMetrics::center_curve},
    {"E_R", &ThresholdMetrics::scale_ratio_curve},
};

}  // namespace

std::string report_to_json(const EvaluationReport& r) {
  json classes = json::array();
  json curves = json::array();
  for (const auto& c : r.classes) {
    json per = json::array();
    for (const auto& m : c.per_threshold) {
      per.push_back({{"iou_threshold", sig9(m.iou_threshold)},
                     {"average_precision", sig9(m.average_precision)},
                     {"E_F", sig9(m.fragment)},
                     {"E_C", sig9(m.center)},
                     {"E_R", sig9(m.scale_ratio)},
                     {"operating_points", m.operating_points}});
      for (const auto& [name, member] : kCurveMetrics)
        curves.push_back({{"class_id", c.class_id},
                          {"iou_threshold", sig9(m.iou_threshold)},
                          {"metric", name},
                          {"values", reals(m.*member)}});
    }
    classes.push_back({{"class_id", c.class_id},
                       {"gt_boxes", c.gt_boxes},
                       {"trajectories", c.trajectories},
                       {"detections", c.detections},
                       {"accuracy_auc", sig9(c.accuracy_auc)},
                       {"E_F", sig9(c.E_F)},
                       {"E_C", sig9(c.E_C)},
                       {"E_R", sig9(c.E_R)},
                       {"stability", sig9(c.phi)},
                       {"per_threshold", std::move(per)}});
  }
  json config = json::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  const json doc = {{"tool", "stabeval"},
                    {"version", r.tool_version},
                    {"method", r.method},
                    {"sequence", r.sequence},
                    {"config", std::move(config)},
                    {"grid", reals(r.grid().thresholds())},
                    {"recall_grid", reals(recall_grid())},
                    {"accuracy_auc", sig9(r.accuracy_auc)},
                    {"E_F", sig9(r.E_F)},
                    {"E_C", sig9(r.E_C)},
                    {"E_R", sig9(r.E_R)},
                    {"stability", sig9(r.stability)},
                    {"classes", std::move(classes)},
                    {"curves", std::move(curves)}};
  return doc.dump(1) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  EvaluationReport r;
  try {
    const json doc = json::parse(text);
    r.tool_version = doc.at("version").get<std::string>();
    r.method = doc.at("method").get<std::string>();
    r.sequence = doc.at("sequence").get<std::string>();
    for (const auto& [k, v] : doc.at("config").items()) r.config[k] = v.get<std::string>();
    const IoUGrid grid(doc.at("grid").get<std::vector<double>>());

    std::map<std::pair<int, double>, ThresholdMetrics*> by_key;
    for (const auto& cj : doc.at("classes")) {
      StabilityReport c;
      c.class_id = cj.at("class_id").get<int>();
      c.gt_boxes = cj.at("gt_boxes").get<std::size_t>();
      c.trajectories = cj.at("trajectories").get<std::size_t>();
      c.detections = cj.at("detections").get<std::size_t>();
      c.grid = grid;
      c.accuracy_auc = cj.at("accuracy_auc").get<double>();
      c.E_F = cj.at("E_F").get<double>();
      c.E_C = cj.at("E_C").get<double>();
      c.E_R = cj.at("E_R").get<double>();
      c.phi = cj.at("stability").get<double>();
      for (const auto& mj : cj.at("per_threshold")) {
        ThresholdMetrics m;
        m.iou_threshold = mj.at("iou_threshold").get<double>();
        m.average_precision = mj.at("average_precision").get<double>();
        m.fragment = mj.at("E_F").get<double>();
        m.center = mj.at("E_C").get<double>();
        m.scale_ratio = mj.at("E_R").get<double>();
        m.operating_points = mj.at("operating_points").get<std::size_t>();
        c.per_threshold.push_back(std::move(m));
      }
      r.classes.push_back(std::move(c));
    }
    for (auto& c : r.classes)
      for (auto& m : c.per_threshold) by_key[{c.class_id, m.iou_threshold}] = &m;
    for (const auto& cv : doc.at("curves")) {
      const auto it = by_key.find({cv.at("class_id").get<int>(), cv.at("iou_threshold").get<double>()});
      if (it == by_key.end()) throw ParseError("curve without a matching class/threshold");
      const auto metric = cv.at("metric").get<std::string>();
      const auto m = std::find_if(std::begin(kCurveMetrics), std::end(kCurveMetrics),
                                  [&](const auto& e) { return metric == e.first; });
      if (m == std::end(kCurveMetrics)) throw ParseError("unknown curve metric '" + metric + "'");
      it->second->*(m->second) = cv.at("values").get<std::vector<double>>();
    }
    r.accuracy_auc = doc.at("accuracy_auc").get<double>();
    r.E_F = doc.at("E_F").get<double>();
    r.E_C = doc.at("E_C").get<double>();
    r.E_R = doc.at("E_R").get<double>();
    r.stability = doc.at("stability").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
  write_text_file(path, report_to_json(report));
}

EvaluationReport read_report(const std::filesystem::path& path) {
  try {
    return report_from_json(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_curves_csv(std::ostream& out, const EvaluationReport& report) {
  const auto& rg = recall_grid();
  const bool multi = report.classes.size() > 1;
  out << "iou_threshold,recall,value,metric\n";
  for (const auto& c : report.classes)
    for (const auto& m : c.per_threshold)
      for (const auto& [name, member] : kCurveMetrics) {
        const std::string label = multi ? std::string(name) + ":" + std::to_string(c.class_id) : name;
        const auto& values = m.*member;
        for (std::size_t i = 0; i < values.size() && i < rg.size(); ++i)
          out << format_real(m.iou_threshold) << ',' << format_real(rg[i]) << ',' << format_real(values[i]) << ','
              << label << '\n';
      }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace stabeval
