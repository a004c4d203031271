#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "stabeval/cli.hpp"
#include "stabeval/io.hpp"

using namespace stabeval;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stabeval_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string config(const std::string& name, const std::string& json) const {
    write_text_file(path(name), json);
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"evaluate", "--gt", path("missing.txt"), "--det", path("missing.txt"), "--out", path("x")}).code,
            kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(Cli, SynthThenEvaluatePerfectPair) {
  const auto cfg = config("c.json", R"({"n_trajectories": 4, "trajectory_length": 30})");
  const auto s = run({"synth", "--config", cfg, "--out", path("p")});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_NE(s.out.find("detections 120"), std::string::npos);
  for (const char* ext : {".gt.json", ".det.json", ".log.csv", ".config.json"}) EXPECT_TRUE(fs::exists(path("p") + ext));

  const auto e = run({"evaluate", "--format", "json", "--gt", path("p.gt.json"), "--det", path("p.det.json"), "--out",
                      path("r"), "--workers", "1"});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("accuracy 100.0000"), std::string::npos) << e.out;
  EXPECT_NE(e.out.find("stability 0.000000"), std::string::npos) << e.out;
  EXPECT_TRUE(fs::exists(path("r.report.json")));
  EXPECT_TRUE(fs::exists(path("r.curves.csv")));
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const auto cfg = config("c.json",
                          R"({"n_trajectories": 5, "trajectory_length": 40, "center_jitter_sigma": 0.03,
                              "drop_probability": 0.1, "score_spread": 0.08})");
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", path("a"), "--seed", "9"}).code, kExitOk);
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", path("b"), "--seed", "9"}).code, kExitOk);
  for (const char* ext : {".gt.json", ".det.json", ".log.csv", ".config.json"})
    EXPECT_EQ(read_text_file(path("a") + ext), read_text_file(path("b") + ext)) << ext;

  const std::vector<std::string> ev{"evaluate", "--format", "json", "--gt", path("a.gt.json"), "--det",
                                    path("a.det.json"), "--out"};
  auto ev1 = ev, ev2 = ev;
  ev1.push_back(path("r1"));
  ev2.push_back(path("r2"));
  ev2.insert(ev2.end(), {"--workers", "3"});
  ASSERT_EQ(run(ev1).code, kExitOk);
  ASSERT_EQ(run(ev2).code, kExitOk);
  EXPECT_EQ(read_text_file(path("r1.report.json")), read_text_file(path("r2.report.json")));
  EXPECT_EQ(read_text_file(path("r1.curves.csv")), read_text_file(path("r2.curves.csv")));
}

TEST_F(Cli, SynthRejectsBadConfig) {
  const auto bad = config("bad.json", R"({"n_trajectories": 3, "jitter": 1})");
  const auto r = run({"synth", "--config", bad, "--out", path("x")});
  EXPECT_EQ(r.code, kExitPrecondition);
  EXPECT_NE(r.err.find("jitter"), std::string::npos);
  const auto broken = config("broken.json", "{");
  EXPECT_EQ(run({"synth", "--config", broken, "--out", path("x")}).code, kExitParse);
}

TEST_F(Cli, DropAllGivesEmptyDetections) {
  const auto cfg = config("c.json", R"({"n_trajectories": 2, "trajectory_length": 10, "drop_probability": 1.0})");
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", path("d")}).code, kExitOk);
  std::istringstream det(read_text_file(path("d.det.json")));
  const auto doc = read_native(det);
  ASSERT_TRUE(doc.detections);
  EXPECT_TRUE(doc.detections->empty());
  const auto e = run({"evaluate", "--format", "json", "--gt", path("d.gt.json"), "--det", path("d.det.json"), "--out",
                      path("r")});
  EXPECT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("accuracy 0.0000"), std::string::npos);
}

TEST_F(Cli, MotEvaluateErrors) {
  write_text_file(path("gt.txt"), "1,1,100,200,50,100,1,1,1\n2,1,100,200,50,100,1,1,1\n");
  write_text_file(path("det.txt"), "1,-1,100,200,50,100,0.9\n5,-1,100,200,50,100,0.9\n");
  const auto r = run({"evaluate", "--gt", path("gt.txt"), "--det", path("det.txt"), "--out", path("r")});
  EXPECT_EQ(r.code, kExitPrecondition);
  EXPECT_NE(r.err.find("outside"), std::string::npos);
  // An explicit length covering frame 5 fixes it.
  EXPECT_EQ(run({"evaluate", "--gt", path("gt.txt"), "--det", path("det.txt"), "--out", path("r"), "--seq-length",
                 "5"})
                .code,
            kExitOk);
  EXPECT_EQ(run({"evaluate", "--gt", path("gt.txt"), "--det", path("det.txt"), "--out", path("r"), "--seq-length",
                 "1"})
                .code,
            kExitPrecondition);

  write_text_file(path("bad.txt"), "1,1,100,200,50,100,1,1,1\n1,1,oops,200,50,100,1,1,1\n");
  const auto p = run({"evaluate", "--gt", path("bad.txt"), "--det", path("det.txt"), "--out", path("r")});
  EXPECT_EQ(p.code, kExitParse);
  EXPECT_NE(p.err.find("bad.txt"), std::string::npos);
  EXPECT_NE(p.err.find("line 2"), std::string::npos);

  write_text_file(path("empty.txt"), "");
  const auto u = run({"evaluate", "--gt", path("empty.txt"), "--det", path("det.txt"), "--out", path("r")});
  EXPECT_EQ(u.code, kExitPrecondition);
}

TEST_F(Cli, Postprocess) {
  write_text_file(path("det.txt"), "1,-1,100,200,50,100,0.9\n1,-1,100,200,50,100,0.8\n3,-1,10,20,30,40,0.5\n");
  auto r = run({"postprocess", "--det", path("det.txt"), "--method", "nms", "--out", path("n.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_text_file(path("n.txt")), "1,-1,100,200,50,100,0.9,-1,-1,-1\n3,-1,10,20,30,40,0.5,-1,-1,-1\n");

  r = run({"postprocess", "--det", path("det.txt"), "--method", "mgp", "--window", "1", "--decay", "0.5", "--seq-length",
           "10", "--out", path("m.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream m(read_text_file(path("m.txt")));
  // Frame-1 detections only propagate forward; the frame-3 one goes both ways.
  EXPECT_EQ(parse_mot_det(m).size(), 3u + 2u + 2u);

  EXPECT_EQ(run({"postprocess", "--det", path("det.txt"), "--method", "track-fuse", "--out", path("t.txt")}).code,
            kExitUsage);
  EXPECT_EQ(run({"postprocess", "--det", path("det.txt"), "--method", "bogus", "--out", path("t.txt")}).code,
            kExitUsage);
  EXPECT_EQ(run({"postprocess", "--det", path("det.txt"), "--method", "mgp", "--decay", "2", "--out", path("t.txt")})
                .code,
            kExitUsage);

  write_text_file(path("trk.txt"), "3,2,12,20,30,40\n");
  r = run({"postprocess", "--det", path("det.txt"), "--method", "track-fuse", "--tracker", path("trk.txt"),
           "--min-score", "0.4", "--out", path("f.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream f(read_text_file(path("f.txt")));
  const auto fused = parse_mot_det(f);
  ASSERT_EQ(fused.size(), 3u);
  EXPECT_EQ(fused[2].box.left(), 11);
}

TEST_F(Cli, AnalyzeCorrelateAndScatter) {
  fs::create_directories(path("reports"));
  const char* configs[] = {
      R"({"n_trajectories": 3, "trajectory_length": 20, "center_jitter_sigma": 0.01, "seed": 1})",
      R"({"n_trajectories": 3, "trajectory_length": 20, "center_jitter_sigma": 0.04, "drop_probability": 0.1, "seed": 2})",
      R"({"n_trajectories": 3, "trajectory_length": 20, "scale_jitter_sigma": 0.05, "drop_probability": 0.3, "seed": 3})",
      R"({"n_trajectories": 3, "trajectory_length": 20, "center_jitter_sigma": 0.02, "scale_jitter_sigma": 0.02, "drop_probability": 0.2, "seed": 4})",
  };
  for (int i = 0; i < 4; ++i) {
    const std::string id = std::to_string(i);
    ASSERT_EQ(run({"synth", "--config", config("c" + id + ".json", configs[i]), "--out", path("s" + id)}).code, kExitOk);
    const auto e = run({"evaluate", "--format", "json", "--gt", path("s" + id + ".gt.json"), "--det",
                        path("s" + id + ".det.json"), "--label", "method" + std::to_string(i % 2), "--out",
                        path("reports/r" + id)});
    ASSERT_EQ(e.code, kExitOk) << e.err;
  }
  auto r = run({"analyze", "--reports", path("reports"), "--mode", "correlate", "--out", path("corr.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream corr(read_text_file(path("corr.csv")));
  std::string line;
  int rows = 0;
  while (std::getline(corr, line)) ++rows;
  EXPECT_EQ(rows, 5);

  r = run({"analyze", "--reports", path("reports"), "--mode", "scatter", "--out", path("sc.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream sc(read_text_file(path("sc.csv")));
  rows = 0;
  while (std::getline(sc, line)) ++rows;
  EXPECT_EQ(rows, 5);

  fs::remove(path("reports/r2.report.json"));
  fs::remove(path("reports/r3.report.json"));
  r = run({"analyze", "--reports", path("reports"), "--mode", "correlate", "--out", path("corr.csv")});
  EXPECT_EQ(r.code, kExitPrecondition);
  EXPECT_NE(r.err.find("need at least 3 samples"), std::string::npos);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = STABEVAL_CLI_PATH;
  const auto quiet = " >" + path("o.txt") + " 2>" + path("e.txt");
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(status(std::system((bin + " --version" + quiet).c_str())), 0);
  EXPECT_EQ(status(std::system((bin + " nothing" + quiet).c_str())), kExitUsage);
  const auto bad = config("bad.json", R"({"drop_probability": 5})");
  EXPECT_EQ(status(std::system((bin + " synth --config " + bad + " --out " + path("x") + quiet).c_str())),
            kExitPrecondition);
}
