#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stabeval/accuracy.hpp"

using namespace stabeval;

namespace {

Detection det(int frame, Box b, double score, std::optional<std::int64_t> track = std::nullopt) {
  Detection d;
  d.frame = frame;
  d.box = b;
  d.score = score;
  d.track_id = track;
  return d;
}

// Two GT boxes on two frames; detections TP 0.9, FP 0.8, TP 0.7.
std::pair<Sequence, std::vector<Detection>> three_detection_case() {
  Sequence s;
  s.name = "hand";
  s.frame_count = 2;
  s.trajectories = {Trajectory{1, 1, {{0, Box{10, 10, 10, 10}}}}, Trajectory{2, 1, {{1, Box{40, 10, 10, 10}}}}};
  std::vector<Detection> d{det(0, Box{10, 10, 10, 10}, 0.9), det(0, Box{80, 80, 10, 10}, 0.8),
                           det(1, Box{40, 10, 10, 10}, 0.7)};
  return {s, d};
}

Sequence static_track(int frames, Box b = Box{50, 50, 10, 10}, std::int64_t id = 1) {
  Sequence s;
  s.frame_count = frames;
  Trajectory t{id, 1, {}};
  for (int f = 0; f < frames; ++f) t.boxes[f] = b;
  s.trajectories.push_back(t);
  return s;
}

}  // namespace

TEST(PrCurve, ThreeDetectionHandCase) {
  auto [seq, dets] = three_detection_case();
  const auto c = pr_curve(dets, seq, 1, 0.5);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_DOUBLE_EQ(c.points[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(c.points[1].recall, 0.5);
  EXPECT_DOUBLE_EQ(c.points[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(c.points[2].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[2].precision, 2.0 / 3.0);
  EXPECT_NEAR(average_precision(c), 0.5 + 0.5 * 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(average_precision(c), 0.8333333, 1e-6);
}

TEST(PrCurve, PerfectDetections) {
  const auto seq = static_track(5);
  std::vector<Detection> dets;
  for (int f = 0; f < 5; ++f) dets.push_back(det(f, Box{50, 50, 10, 10}, 0.9));
  const auto c = pr_curve(dets, seq, 1, 0.5);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].recall, 1.0);
  EXPECT_EQ(c.points[0].precision, 1.0);
  EXPECT_EQ(average_precision(c), 1.0);
}

TEST(PrCurve, NoDetectionsAndNoGroundTruth) {
  const auto seq = static_track(3);
  const auto c = pr_curve({}, seq, 1, 0.5);
  EXPECT_TRUE(c.points.empty());
  EXPECT_EQ(average_precision(c), 0.0);
  Sequence empty;
  empty.frame_count = 3;
  try {
    pr_curve({}, empty, 1, 0.5);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("undefined recall"), std::string::npos);
  }
}

TEST(AveragePrecision, SinglePoint) {
  PRCurve c;
  c.points.push_back({0.5, 1.0, 0.9});
  EXPECT_DOUBLE_EQ(average_precision(c), 0.5);
  EXPECT_EQ(precision_envelope(c, 0.25), 1.0);
  EXPECT_EQ(precision_envelope(c, 0.75), 0.0);
}

TEST(AccuracyAuc, PerfectAndEmpty) {
  const auto seq = static_track(4);
  std::vector<Detection> dets;
  for (int f = 0; f < 4; ++f) dets.push_back(det(f, Box{50, 50, 10, 10}, 0.9));
  EXPECT_DOUBLE_EQ(accuracy_auc(dets, seq, 1, IoUGrid::default_grid()), 1.0);
  EXPECT_DOUBLE_EQ(accuracy_auc({}, seq, 1, IoUGrid::default_grid()), 0.0);
}

TEST(AccuracyAuc, StepAtIouPointSix) {
  // 10x10 boxes shifted by 2.5: intersection 75, union 125, IoU 0.6 exactly.
  const auto seq = static_track(4);
  std::vector<Detection> dets;
  for (int f = 0; f < 4; ++f) dets.push_back(det(f, Box{52.5, 50, 10, 10}, 0.9));
  ASSERT_EQ(iou(dets[0].box, seq.trajectories[0].boxes.at(0)), 0.6);
  const auto grid = IoUGrid::parse("0.05:1:0.05");
  ASSERT_EQ(grid.size(), 20u);
  std::vector<double> ys;
  for (const double t : grid.thresholds()) ys.push_back(t <= 0.6 ? 1.0 : 0.0);
  // AP 1 on 0.05..0.6 (12 points), 0 on 0.65..1; trapezoid over span 0.95.
  const double expected = (11 * 0.05 + 0.5 * 0.05) / 0.95;
  EXPECT_NEAR(normalized_trapezoid(grid.thresholds(), ys), expected, 1e-12);
  EXPECT_NEAR(accuracy_auc(dets, seq, 1, grid), expected, 1e-12);
}

TEST(Mauc, Means) {
  EXPECT_DOUBLE_EQ(mauc({{"car", 0.8}}), 0.8);
  EXPECT_DOUBLE_EQ(mauc({{"a", 0.6}, {"b", 0.8}}), 0.7);
  EXPECT_DOUBLE_EQ(mauc({{"a", 0}, {"b", 0}, {"c", 0}}), 0.0);
  EXPECT_THROW(mauc({}), PreconditionError);
}

TEST(Tracklet, IouExamples) {
  const auto seq = static_track(10);
  const Trajectory& t = seq.trajectories[0];
  EXPECT_EQ(tracklet_iou(t.boxes, t), 1.0);
  std::map<int, Box> half;
  for (int f = 0; f < 5; ++f) half[f] = t.boxes.at(f);
  EXPECT_DOUBLE_EQ(tracklet_iou(half, t), 0.5);
}

TEST(Tracklet, MapExamples) {
  const auto seq = static_track(10);
  std::vector<Detection> dets;
  for (int f = 0; f < 10; ++f) dets.push_back(det(f, Box{50, 50, 10, 10}, 0.9, 5));
  EXPECT_DOUBLE_EQ(tracklet_map(dets, seq, 1), 1.0);
  EXPECT_DOUBLE_EQ(tracklet_map({}, seq, 1), 0.0);
  dets.push_back(det(3, Box{50, 50, 10, 10}, 0.9));
  try {
    tracklet_map(dets, seq, 1);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("tracklet metric requires track ids"), std::string::npos);
  }
}

TEST(Tracklet, SecondTrackletOnSameTruthIsFalsePositive) {
  const auto seq = static_track(10);
  std::vector<Detection> dets;
  for (int f = 0; f < 10; ++f) dets.push_back(det(f, Box{50, 50, 10, 10}, 0.9, 1));
  for (int f = 0; f < 10; ++f) dets.push_back(det(f, Box{50, 50, 10, 10}, 0.5, 2));
  // TP then FP: precision envelope 1 up to recall 1.
  EXPECT_DOUBLE_EQ(tracklet_map(dets, seq, 1), 1.0);
  for (auto& d : dets) d.score = d.track_id == 1 ? 0.5 : 0.9;
  EXPECT_DOUBLE_EQ(tracklet_map(dets, seq, 1), 1.0);
}

TEST(AveragePrecision, MatchesBruteForceOnRandomScenes) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto [seq, dets] = oracle::random_scene(rng, 5, 3);
    if (dets.size() > 20) dets.resize(20);
    for (const double thr : {0.3, 0.5, 0.7}) {
      const double ap = average_precision(pr_curve(dets, seq, 1, thr));
      ASSERT_NEAR(ap, oracle::brute_force_ap(dets, seq, 1, thr), 1e-12) << "trial " << trial << " thr " << thr;
    }
  }
}

TEST(AveragePrecision, InvariantUnderMonotoneScoreTransform) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto [seq, dets] = oracle::random_scene(rng);
    auto moved = dets;
    for (auto& d : moved) d.score = std::exp(3 * d.score) - 7;
    EXPECT_NEAR(average_precision(pr_curve(dets, seq, 1, 0.5)), average_precision(pr_curve(moved, seq, 1, 0.5)),
                1e-12);
  }
}

TEST(AveragePrecision, NonIncreasingInThreshold) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto [seq, dets] = oracle::random_scene(rng);
    const auto sweep = ap_sweep(dets, seq, 1, IoUGrid::default_grid());
    for (std::size_t i = 1; i < sweep.values.size(); ++i) ASSERT_LE(sweep.values[i], sweep.values[i - 1] + 1e-12);
  }
}

TEST(AveragePrecision, LowScoreFalsePositiveNeverHelps) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto [seq, dets] = oracle::random_scene(rng);
    const double before = average_precision(pr_curve(dets, seq, 1, 0.5));
    dets.push_back(det(0, Box{-500, -500, 5, 5}, -1.0));
    EXPECT_LE(average_precision(pr_curve(dets, seq, 1, 0.5)), before + 1e-12);
  }
}

TEST(IoUGridTest, ParseAndValidate) {
  const auto g = IoUGrid::default_grid();
  ASSERT_EQ(g.size(), 19u);
  EXPECT_EQ(g.thresholds()[11], 0.6);
  EXPECT_EQ(g.thresholds().back(), 0.95);
  EXPECT_EQ(IoUGrid::parse("0.05:0.95:0.05"), g);
  EXPECT_EQ(IoUGrid::parse("0.5:0.5:0.1").size(), 1u);
  EXPECT_THROW(IoUGrid::parse("0.5:0.4:0.1"), std::exception);
  EXPECT_THROW(IoUGrid::parse("0:1:0.1"), std::exception);
  EXPECT_THROW(IoUGrid::parse("abc"), std::exception);
  EXPECT_THROW(IoUGrid(std::vector<double>{0.5, 0.5}), std::exception);
}

TEST(Trapezoid, FlatCurveIsItsHeight) {
  const std::vector<double> xs{0.1, 0.2, 0.5}, ys{0.3, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(normalized_trapezoid(xs, ys), 0.3);
  const std::vector<double> x1{0.5}, y1{0.7};
  EXPECT_EQ(normalized_trapezoid(x1, y1), 0.7);
}
