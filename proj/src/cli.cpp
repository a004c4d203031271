#include "stabeval/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "stabeval/analysis.hpp"
#include "stabeval/io.hpp"
#include "stabeval/postproc.hpp"
#include "stabeval/report.hpp"
#include "stabeval/synthgen.hpp"

namespace stabeval {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

// Prefixes parse errors with the file they came from.
template <class F>
auto parsing(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string sequence_name(const fs::path& gt) {
  // MOT layout: <sequence>/gt/gt.txt
  if (gt.stem() == "gt" && gt.has_parent_path() && gt.parent_path().has_parent_path())
    return gt.parent_path().parent_path().filename().string();
  return gt.stem().string();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Inputs {
  Sequence sequence;
  std::vector<Detection> detections;
};

Inputs load_inputs(const fs::path& gt, const fs::path& det, const std::string& format, const std::string& cls) {
  Inputs in;
  if (format == "mot") {
    auto g = open_input(gt);
    in.sequence = parsing(gt, [&] { return parse_mot_gt(g, sequence_name(gt)); });
    auto d = open_input(det);
    in.detections = parsing(det, [&] { return parse_mot_det(d); });
  } else if (format == "kitti") {
    const std::string keep = cls.empty() ? "Car" : cls;
    auto g = open_input(gt);
    in.sequence = parsing(gt, [&] { return parse_kitti_tracking(g, keep, sequence_name(gt)); });
    auto d = open_input(det);
    in.detections = parsing(det, [&] { return parse_kitti_detections(d, keep); });
  } else {
    auto g = open_input(gt);
    auto gdoc = parsing(gt, [&] { return read_native(g); });
    if (!gdoc.sequence) throw ParseError(gt.string() + ": native document has no sequence");
    in.sequence = std::move(*gdoc.sequence);
    auto d = open_input(det);
    auto ddoc = parsing(det, [&] { return read_native(d); });
    if (!ddoc.detections) throw ParseError(det.string() + ": native document has no detections");
    in.detections = std::move(*ddoc.detections);
  }
  return in;
}

std::vector<Detection> load_detections(const fs::path& det, const std::string& format, const std::string& cls) {
  auto d = open_input(det);
  if (format == "mot") return parsing(det, [&] { return parse_mot_det(d); });
  if (format == "kitti") return parsing(det, [&] { return parse_kitti_detections(d, cls.empty() ? "Car" : cls); });
  auto doc = parsing(det, [&] { return read_native(d); });
  if (!doc.detections) throw ParseError(det.string() + ": native document has no detections");
  return std::move(*doc.detections);
}

// ------------------------------------------------------------------ evaluate

struct EvaluateArgs {
  std::string gt, det, format = "mot", cls, grid = "0.05:0.95:0.05", out, label, policy = "gate";
  int seq_length = 0;
  unsigned workers = 0;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  Inputs in = load_inputs(a.gt, a.det, a.format, a.cls);
  if (a.seq_length > 0) {
    if (a.seq_length < in.sequence.frame_count)
      throw PreconditionError("--seq-length " + std::to_string(a.seq_length) + " is shorter than the ground truth (" +
                              std::to_string(in.sequence.frame_count) + " frames)");
    in.sequence.frame_count = a.seq_length;
  }

  EvaluationOptions opt;
  opt.grid = IoUGrid::parse(a.grid);
  opt.workers = a.workers > 0 ? a.workers : std::max(1u, std::thread::hardware_concurrency());
  opt.policy = a.policy == "dissolve" ? SubThresholdPolicy::kDissolveAfterSolve : SubThresholdPolicy::kGateBeforeSolve;
  if (a.format == "json" && !a.cls.empty()) {
    try {
      opt.class_id = std::stoi(a.cls);
    } catch (const std::exception&) {
      throw UsageError("--class must be an integer class id for --format json");
    }
  }

  EvaluationReport report = evaluate(in.detections, in.sequence, opt);
  report.method = a.label.empty() ? fs::path(a.det).stem().string() : a.label;
  report.config = {{"gt", a.gt},
                   {"det", a.det},
                   {"format", a.format},
                   {"class", a.cls.empty() ? (a.format == "kitti" ? "Car" : "all") : a.cls},
                   {"iou_grid", a.grid},
                   {"matching_policy", a.policy},
                   {"ignore_iou", format_real(opt.ignore_iou)},
                   {"recall_grid", "0:1:0.01"},
                   {"frame_count", std::to_string(in.sequence.frame_count)}};

  write_report(report, a.out + ".report.json");
  std::ostringstream csv;
  write_curves_csv(csv, report);
  write_text_file(a.out + ".curves.csv", csv.str());

  out << "sequence " << report.sequence << '\n'
      << "method " << report.method << '\n'
      << "accuracy " << fixed(100.0 * report.accuracy_auc, 4) << '\n'
      << "stability " << fixed(report.stability, 6) << '\n'
      << "E_F " << fixed(report.E_F, 6) << '\n'
      << "E_C " << fixed(report.E_C, 6) << '\n'
      << "E_R " << fixed(report.E_R, 6) << '\n';
}

// --------------------------------------------------------------- postprocess

struct PostprocessArgs {
  std::string det, format = "mot", method, motion, tracker, image_size, out, cls;
  double nms_iou = 0.5, decay = 0.5, min_score = 0.8, fuse_iou = 0.5;
  int window = 1, seq_length = 0;
};

std::pair<double, double> parse_image_size(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    const double w = std::stod(s.substr(0, x)), h = std::stod(s.substr(x + 1));
    if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument(s);
    return {w, h};
  } catch (const std::exception&) {
    throw UsageError("--image-size must look like 1920x1080");
  }
}

void cmd_postprocess(const PostprocessArgs& a, std::ostream& out) {
  if (a.method == "track-fuse" && a.tracker.empty()) throw UsageError("method track-fuse needs --tracker");
  const auto dets = load_detections(a.det, a.format, a.cls);

  std::vector<Detection> result;
  if (a.method == "nms" || a.method == "wnms") {
    result = suppress_per_frame(dets, a.nms_iou, a.method == "wnms");
  } else if (a.method == "mgp") {
    MgpOptions opt;
    opt.window = a.window;
    opt.decay = a.decay;
    if (a.seq_length > 0) {
      opt.frame_count = a.seq_length;
    } else {
      for (const auto& d : dets) opt.frame_count = std::max(opt.frame_count, d.frame + 1);
    }
    if (!a.image_size.empty()) opt.image_size = parse_image_size(a.image_size);
    if (a.motion.empty()) {
      result = mgp(dets, opt);
    } else {
      auto m = open_input(a.motion);
      const auto rows = parsing(a.motion, [&] { return parse_displacements(m); });
      result = mgp(dets, opt, DetectionMotion(dets, rows));
    }
  } else {
    auto t = open_input(a.tracker);
    const auto boxes = parsing(a.tracker, [&] { return parse_tracker_boxes(t); });
    result = track_fuse(dets, boxes, a.min_score, a.fuse_iou);
  }

  std::ostringstream text;
  write_mot_det(text, result);
  write_text_file(a.out, text.str());
  out << "detections_in " << dets.size() << '\n' << "detections_out " << result.size() << '\n';
}

// --------------------------------------------------------------------- synth

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  PerturbConfig config = parsing(a.config, [&] { return PerturbConfig::from_json(read_text_file(a.config)); });
  if (a.seed) config.seed = *a.seed;
  const SyntheticSet set = generate(config);

  std::ostringstream gt, det, log;
  write_native(gt, NativeDocument{set.sequence, std::nullopt});
  write_native(det, NativeDocument{std::nullopt, set.detections});
  write_perturbation_log(log, set.log);
  write_text_file(a.out + ".gt.json", gt.str());
  write_text_file(a.out + ".det.json", det.str());
  write_text_file(a.out + ".log.csv", log.str());
  write_text_file(a.out + ".config.json", config.to_json() + "\n");
  out << "trajectories " << set.sequence.trajectories.size() << '\n'
      << "gt_boxes " << set.sequence.box_count() << '\n'
      << "detections " << set.detections.size() << '\n';
}

// ------------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string reports, mode, out;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.reports)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 12 && name.ends_with(".report.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EvaluationReport> reports;
  for (const auto& f : files) reports.push_back(read_report(f));

  std::ostringstream csv;
  if (a.mode == "correlate") {
    std::vector<MetricSample> samples;
    for (const auto& r : reports) samples.push_back(sample_from(r));
    if (!reports.empty()) scatter_points(reports);  // rejects mixed grids
    write_correlation_csv(csv, correlation_matrix(samples));
  } else {
    write_scatter_csv(csv, scatter_points(reports));
  }
  write_text_file(a.out, csv.str());
  out << "reports " << reports.size() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accuracy and stability evaluation for video object detection", "stabeval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score detections against ground truth");
  evaluate_cmd->add_option("--gt", ev.gt, "Ground-truth file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--det", ev.det, "Detection file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--format", ev.format, "Input format")->check(CLI::IsMember({"mot", "kitti", "json"}));
  evaluate_cmd->add_option("--class", ev.cls, "KITTI class name or native class id (default: Car / all)");
  evaluate_cmd->add_option("--iou-grid", ev.grid, "IoU thresholds as lo:hi:step");
  evaluate_cmd->add_option("--seq-length", ev.seq_length, "Number of frames (default: last GT frame + 1)")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--label", ev.label, "Method name stored in the report (default: detection file stem)");
  evaluate_cmd->add_option("--policy", ev.policy, "Sub-threshold IoU handling")
      ->check(CLI::IsMember({"gate", "dissolve"}));
  evaluate_cmd->add_option("--workers", ev.workers, "Worker threads (default: hardware concurrency)");
  evaluate_cmd->add_option("--out", ev.out, "Output prefix for .report.json and .curves.csv")->required();

  PostprocessArgs pp;
  auto* post_cmd = app.add_subcommand("postprocess", "Apply NMS, weighted NMS, MGP or tracker fusion");
  post_cmd->add_option("--det", pp.det, "Detection file")->required()->check(CLI::ExistingFile);
  post_cmd->add_option("--format", pp.format, "Input format")->check(CLI::IsMember({"mot", "kitti", "json"}));
  post_cmd->add_option("--class", pp.cls, "KITTI class name (default Car)");
  post_cmd->add_option("--method", pp.method, "nms | wnms | mgp | track-fuse")
      ->required()
      ->check(CLI::IsMember({"nms", "wnms", "mgp", "track-fuse"}));
  post_cmd->add_option("--nms-iou", pp.nms_iou, "Suppression IoU threshold")->check(CLI::Range(0.0, 1.0));
  post_cmd->add_option("--window", pp.window, "MGP propagation window")->check(CLI::NonNegativeNumber);
  post_cmd->add_option("--decay", pp.decay, "MGP score decay per step")->check(CLI::Range(0.0, 1.0));
  post_cmd->add_option("--motion", pp.motion, "MGP displacement CSV frame,det_index,dx,dy")
      ->check(CLI::ExistingFile);
  post_cmd->add_option("--seq-length", pp.seq_length, "Frames in the sequence (MGP bound)")
      ->check(CLI::PositiveNumber);
  post_cmd->add_option("--image-size", pp.image_size, "Clip MGP copies to WxH");
  post_cmd->add_option("--tracker", pp.tracker, "Tracker boxes CSV frame,source_index,left,top,width,height")
      ->check(CLI::ExistingFile);
  post_cmd->add_option("--min-score", pp.min_score, "Fusion: minimum source detection score");
  post_cmd->add_option("--fuse-iou", pp.fuse_iou, "Fusion: minimum IoU with the tracker box")
      ->check(CLI::Range(0.0, 1.0));
  post_cmd->add_option("--out", pp.out, "Output detections (MOT det format)")->required();

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic ground truth and perturbed detections");
  synth_cmd->add_option("--config", sy.config, "Generator config JSON")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", sy.out, "Output prefix")->required();
  synth_cmd->add_option("--seed", sy.seed, "Override the config seed");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Correlate metrics or export accuracy/stability scatter");
  analyze_cmd->add_option("--reports", an.reports, "Directory of *.report.json files")
      ->required()
      ->check(CLI::ExistingDirectory);
  analyze_cmd->add_option("--mode", an.mode, "correlate | scatter")
      ->required()
      ->check(CLI::IsMember({"correlate", "scatter"}));
  analyze_cmd->add_option("--out", an.out, "Output CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate_cmd->parsed()) cmd_evaluate(ev, out);
    if (post_cmd->parsed()) cmd_postprocess(pp, out);
    if (synth_cmd->parsed()) cmd_synth(sy, out);
    if (analyze_cmd->parsed()) cmd_analyze(an, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitOk;
}

}  // namespace stabeval
