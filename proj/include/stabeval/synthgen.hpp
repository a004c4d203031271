#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stabeval/core.hpp"

namespace stabeval {

/// Knobs of the synthetic generator. Jitter sigmas are fractions of the GT box
/// size (center) or of 1 (scale and aspect factors); bias is a constant center
/// offset in fractions of the GT box size.
struct PerturbConfig {
  int n_trajectories = 10;
  int trajectory_length = 100;
  int frame_count = 0;  // 0: same as trajectory_length
  double frame_width = 1920.0;
  double frame_height = 1080.0;
  double box_width = 40.0;
  double box_height = 80.0;
  double max_speed = 2.0;  // pixels per frame on each axis
  bool lanes = true;       // one horizontal band per trajectory, so tracks never overlap
  double center_jitter_sigma = 0.0;
  double scale_jitter_sigma = 0.0;
  double ratio_jitter_sigma = 0.0;
  double drop_probability = 0.0;
  double bias_x = 0.0;
  double bias_y = 0.0;
  double score_mean = 0.9;
  double score_spread = 0.0;
  bool track_ids = false;  // stamp detections with their trajectory id
  std::uint64_t seed = 1;

  /// Throws PreconditionError naming the offending field.
  void validate() const;
  int effective_frame_count() const { return frame_count > 0 ? frame_count : trajectory_length; }

  /// Unknown keys are rejected by name; missing keys keep their defaults.
  static PerturbConfig from_json(const std::string& text);
  std::string to_json() const;
};

/// What was injected into one GT frame.
struct PerturbationRecord {
  std::int64_t trajectory_id = 0;
  int frame = 0;
  bool dropped = false;
  double e_x = 0.0;  // realized normalized center offsets (bias + jitter)
  double e_y = 0.0;
  double e_s = 1.0;  // realized sqrt-area and aspect factors
  double e_r = 1.0;
  double score = 0.0;
  bool truncated = false;  // some jitter draw was clipped at 3 sigma
};

struct SyntheticSet {
  Sequence sequence;
  std::vector<Detection> detections;
  std::vector<PerturbationRecord> log;
};

/// Constant-velocity ground truth plus perturbed detections. Deterministic in
/// the config (including the seed): mt19937_64 with hand-rolled uniform and
/// Box-Muller draws, so output does not depend on the standard library.
SyntheticSet generate(const PerturbConfig& config);

/// `trajectory_id,frame,dropped,e_x,e_y,e_s,e_r,score,truncated` with 0-based frames.
void write_perturbation_log(std::ostream& out, const std::vector<PerturbationRecord>& log);

}  // namespace stabeval
