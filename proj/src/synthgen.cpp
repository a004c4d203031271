#include "stabeval/synthgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "stabeval/io.hpp"

namespace stabeval {

using nlohmann::json;

void PerturbConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw PreconditionError("config field '" + field + "': " + why);
  };
  if (n_trajectories < 0) fail("n_trajectories", "must be >= 0");
  if (trajectory_length < 1) fail("trajectory_length", "must be >= 1");
  if (frame_count != 0 && frame_count < trajectory_length) fail("frame_count", "must be 0 or >= trajectory_length");
  if (!(frame_width > 0.0)) fail("frame_width", "must be positive");
  if (!(frame_height > 0.0)) fail("frame_height", "must be positive");
  if (!(box_width > 0.0)) fail("box_width", "must be positive");
  if (!(box_height > 0.0)) fail("box_height", "must be positive");
  if (box_width > frame_width) fail("box_width", "box is wider than the frame");
  if (box_height > frame_height) fail("box_height", "box is taller than the frame");
  if (lanes && n_trajectories > 0 && box_height > frame_height / n_trajectories)
    fail("box_height", "box is taller than a lane (frame_height / n_trajectories); disable lanes or shrink it");
  if (!(max_speed >= 0.0)) fail("max_speed", "must be >= 0");
  if (!(center_jitter_sigma >= 0.0)) fail("center_jitter_sigma", "must be >= 0");
  // 3-sigma truncation must keep the scale and aspect factors positive.
  if (!(scale_jitter_sigma >= 0.0 && scale_jitter_sigma < 1.0 / 3.0))
    fail("scale_jitter_sigma", "must lie in [0, 1/3)");
  if (!(ratio_jitter_sigma >= 0.0 && ratio_jitter_sigma < 1.0 / 3.0))
    fail("ratio_jitter_sigma", "must lie in [0, 1/3)");
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) fail("drop_probability", "must lie in [0, 1]");
  if (!std::isfinite(bias_x)) fail("bias_x", "must be finite");
  if (!std::isfinite(bias_y)) fail("bias_y", "must be finite");
  if (!std::isfinite(score_mean)) fail("score_mean", "must be finite");
  if (!(score_spread >= 0.0)) fail("score_spread", "must be >= 0");
}

namespace {

#define STABEVAL_CONFIG_FIELDS(X)                                                                             \
  X(n_trajectories) X(trajectory_length) X(frame_count) X(frame_width) X(frame_height) X(box_width)          \
  X(box_height) X(max_speed) X(lanes) X(center_jitter_sigma) X(scale_jitter_sigma) X(ratio_jitter_sigma)    \
  X(drop_probability) X(bias_x) X(bias_y) X(score_mean) X(score_spread) X(track_ids) X(seed)

}  // namespace

PerturbConfig PerturbConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  PerturbConfig c;
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
#define X(name)                                  \
  if (key == #name) {                            \
    c.name = value.get<decltype(c.name)>();      \
    known = true;                                \
  }
      STABEVAL_CONFIG_FIELDS(X)
#undef X
    } catch (const json::exception&) {
      throw PreconditionError("config field '" + key + "': wrong type");
    }
    if (!known) throw PreconditionError("config field '" + key + "': unknown field");
  }
  c.validate();
  return c;
}

std::string PerturbConfig::to_json() const {
  json j;
#define X(name) j[#name] = name;
  STABEVAL_CONFIG_FIELDS(X)
#undef X
  return j.dump(1);
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // 53 random bits -> [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(std::floor(uniform() * static_cast<double>(hi - lo + 1)));
  }
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// N(0, sigma) clipped to +-3 sigma.
double jitter(Rng& rng, double sigma, bool& truncated) {
  const double z = rng.normal();
  if (std::abs(z) > 3.0) {
    truncated = true;
    return std::copysign(3.0, z) * sigma;
  }
  return z * sigma;
}

// Start position and velocity on one axis keeping the box inside [lo, hi].
std::pair<double, double> place(Rng& rng, double lo, double hi, double size, double max_speed, int length) {
  const double room = (hi - lo) - size;
  const double steps = static_cast<double>(std::max(length - 1, 1));
  double v = rng.uniform(-max_speed, max_speed);
  v = std::clamp(v, -room / steps, room / steps);
  const double travel = v * static_cast<double>(length - 1);
  const double c_lo = lo + size / 2.0 - std::min(0.0, travel);
  const double c_hi = hi - size / 2.0 - std::max(0.0, travel);
  return {rng.uniform(c_lo, std::max(c_lo, c_hi)), v};
}

}  // namespace

SyntheticSet generate(const PerturbConfig& c) {
  c.validate();
  Rng rng(c.seed);
  SyntheticSet out;
  out.sequence.name = "synth-" + std::to_string(c.seed);
  out.sequence.frame_count = c.effective_frame_count();

  const double lane = c.lanes && c.n_trajectories > 0 ? c.frame_height / c.n_trajectories : c.frame_height;
  for (int k = 0; k < c.n_trajectories; ++k) {
    Trajectory t;
    t.id = k + 1;
    t.class_id = 1;
    const int start = rng.uniform_int(0, c.effective_frame_count() - c.trajectory_length);
    const auto [cx0, vx] = place(rng, 0.0, c.frame_width, c.box_width, c.max_speed, c.trajectory_length);
    const double y_lo = c.lanes ? lane * k : 0.0;
    const auto [cy0, vy] = place(rng, y_lo, y_lo + lane, c.box_height, c.max_speed, c.trajectory_length);
    for (int i = 0; i < c.trajectory_length; ++i)
      t.boxes.emplace(start + i, Box{cx0 + vx * i, cy0 + vy * i, c.box_width, c.box_height});

    for (const auto& [frame, gt] : t.boxes) {
      PerturbationRecord rec;
      rec.trajectory_id = t.id;
      rec.frame = frame;
      rec.dropped = rng.uniform() < c.drop_probability;
      // Noise is drawn for dropped frames too so the drop knob does not
      // reshuffle the jitter of the frames that survive.
      bool truncated = false;
      const double nx = jitter(rng, c.center_jitter_sigma, truncated);
      const double ny = jitter(rng, c.center_jitter_sigma, truncated);
      const double ns = jitter(rng, c.scale_jitter_sigma, truncated);
      const double nr = jitter(rng, c.ratio_jitter_sigma, truncated);
      const double score = rng.uniform(c.score_mean - c.score_spread, c.score_mean + c.score_spread);
      rec.truncated = truncated;
      rec.e_x = c.bias_x + nx;
      rec.e_y = c.bias_y + ny;
      rec.e_s = 1.0 + ns;
      rec.e_r = 1.0 + nr;
      rec.score = std::clamp(score, 1e-6, 1.0);
      if (!rec.dropped) {
        Detection d;
        d.frame = frame;
        d.class_id = 1;
        d.score = rec.score;
        const double root_r = std::sqrt(rec.e_r);
        d.box = Box{gt.cx + rec.e_x * gt.w, gt.cy + rec.e_y * gt.h, rec.e_s * root_r * gt.w, rec.e_s * gt.h / root_r};
        if (c.track_ids) d.track_id = t.id;
        out.detections.push_back(d);
      }
      out.log.push_back(rec);
    }
    out.sequence.trajectories.push_back(std::move(t));
  }
  return out;
}

void write_perturbation_log(std::ostream& out, const std::vector<PerturbationRecord>& log) {
  out << "trajectory_id,frame,dropped,e_x,e_y,e_s,e_r,score,truncated\n";
  for (const auto& r : log)
    out << r.trajectory_id << ',' << r.frame << ',' << (r.dropped ? 1 : 0) << ',' << format_real(r.e_x) << ','
        << format_real(r.e_y) << ',' << format_real(r.e_s) << ',' << format_real(r.e_r) << ','
        << format_real(r.score) << ',' << (r.truncated ? 1 : 0) << '\n';
}

}  // namespace stabeval
