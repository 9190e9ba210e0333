#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "audit.hpp"
#include "run.hpp"
#include "dilp/tasks.hpp"

namespace dilp::app {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dilp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"gen", "--rule", "R9", "--out", path("x.csv")}).code, kExitUsage);
  EXPECT_EQ(cli({"gen", "--task", "uncle", "--out", path("x.facts")}).code, kExitUsage);
  EXPECT_EQ(cli({"gen", "--rule", "R1", "--task", "son", "--out", path("x.csv")}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--rule", "R1", "--epochs", "0", "--out", path("o")}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--rule", "R1", "--learning-rate", "fast", "--out", path("o")}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--out", path("o")}).code, kExitUsage);
}

TEST_F(Cli, UnexpectedArgumentsInOrder) {
  const Result r = cli({"train", "--rule", "R1", "--bogus", "1", "--out", path("o")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("unexpected arguments: --bogus 1"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(cli({"--help"}).code, kExitOk); }

TEST_F(Cli, GenCsvWithSidecar) {
  const Result r = cli({"gen", "--rule", "R2", "--n", "40", "--noise", "0.1", "--seed", "3", "--out", path("r2.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(load_csv(path("r2.csv")).size(), 40u);
  const auto side = Json::parse(slurp(path("r2.csv.manifest.json")));
  EXPECT_TRUE(side.contains("flipped"));
  cli({"gen", "--rule", "R2", "--n", "40", "--noise", "0.1", "--seed", "3", "--out", path("again.csv")});
  EXPECT_EQ(slurp(path("r2.csv")), slurp(path("again.csv")));
}

TEST_F(Cli, GenTaskFacts) {
  ASSERT_EQ(cli({"gen", "--task", "predecessor", "--format", "facts", "--out", path("p.facts")}).code, kExitOk);
  EXPECT_EQ(read_facts(path("p.facts")), builtin_task("predecessor").facts);
}

TEST_F(Cli, TrainExtractAndReplay) {
  const Result r = cli({"train", "--rule", "R1", "--rows", "100", "--data-seed", "1", "--seed", "1", "--out", path("run")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"manifest.json", "rules.txt", "history.csv", "weights.json", "timing.json"})
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  const auto manifest = Json::parse(slurp(path("run/manifest.json")));
  EXPECT_EQ(manifest["search"]["selected_n"], 1);
  EXPECT_TRUE(manifest["recovered"].get<bool>());
  EXPECT_NE(slurp(path("run/rules.txt")).find("h :- b1 and not(b9)."), std::string::npos);

  const Result x = cli({"extract", "--weights", path("run/weights.json"), "--out", path("rules.txt")});
  ASSERT_EQ(x.code, kExitOk) << x.err;
  EXPECT_NE(slurp(path("rules.txt")).find("h :- b1 and not(b9)."), std::string::npos);

  ASSERT_EQ(cli({"train", "--config", path("run/manifest.json"), "--out", path("replay")}).code, kExitOk);
  EXPECT_EQ(slurp(path("run/manifest.json")), slurp(path("replay/manifest.json")));
  EXPECT_EQ(slurp(path("run/history.csv")), slurp(path("replay/history.csv")));
  EXPECT_EQ(slurp(path("run/weights.json")), slurp(path("replay/weights.json")));
}

TEST_F(Cli, TrainFromCsv) {
  ASSERT_EQ(cli({"gen", "--rule", "R1", "--n", "100", "--seed", "1", "--out", path("r1.csv")}).code, kExitOk);
  const Result r = cli({"train", "--data", path("r1.csv"), "--n-max", "2", "--out", path("run")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto manifest = Json::parse(slurp(path("run/manifest.json")));
  EXPECT_EQ(manifest["data"]["m"], 9);
}

TEST_F(Cli, ConfigRejectsUnknownKey) {
  {
    std::ofstream f(path("c.json"));
    f << R"({"rule": "R1", "learning_rat": 0.1})";
  }
  EXPECT_EQ(cli({"train", "--config", path("c.json"), "--out", path("o")}).code, kExitUsage);
}

TEST_F(Cli, BenchWritesFiles) {
  const Result r = cli({"bench", "--samples", "200", "--resolution", "11", "--out", path("bench")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto summary = Json::parse(slurp(path("bench/bench.json")));
  EXPECT_GE(summary["dominance_fraction"].get<double>(), 0.9);
  EXPECT_TRUE(fs::exists(dir_ / "bench" / "dominance.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "bench" / "curves.csv"));
}

TEST_F(Cli, GradcheckPasses) {
  const Result r = cli({"gradcheck", "--points", "10"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("objective"), std::string::npos);
}

TEST(Audit, RandomObjectivesWithinTolerance) {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) EXPECT_LT(check_objective(random_objective(rng)), 1e-4);
}

}  // namespace
}  // namespace dilp::app
