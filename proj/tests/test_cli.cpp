#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = NASHNET_CLI;
const fs::path kScenarios = NASHNET_SCENARIO_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nashnet_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result invoke(const std::string& args, const std::string& env = "") const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + kCli + "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

std::string scenario(const std::string& name) { return (kScenarios / (name + ".yaml")).string(); }

std::string with_replaced(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::runtime_error("pattern not found: " + from);
  return text.replace(pos, from.size(), to);
}

} // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(invoke("").code, 1);
  EXPECT_EQ(invoke("frobnicate").code, 1);
  EXPECT_EQ(invoke("run").code, 1);
  EXPECT_EQ(invoke("run " + scenario("example1") + " --stride 0").code, 1);
  EXPECT_EQ(invoke("reproduce 4 --out " + dir_.string()).code, 1);
  EXPECT_EQ(invoke("--help").code, 0);
}

TEST_F(Cli, MissingFileIsParseError) {
  const auto r = invoke("run " + (dir_ / "nope.yaml").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("parse error"), std::string::npos) << r.err;
}

TEST_F(Cli, BadYamlIsParseError) {
  const auto p = write("bad.yaml", "name: [unclosed\n");
  EXPECT_EQ(invoke("run " + p.string()).code, 2);
  EXPECT_EQ(invoke("graph-check " + p.string()).code, 2);
}

TEST_F(Cli, WeightRuleViolationExitsThreeWithoutOutput) {
  const std::string text = with_replaced(slurp(scenario("example1")), "[0.6, 0.4, 0]", "[0.5, 0.4, 0]");
  const auto p = write("short_row.yaml", text);
  const fs::path trace = dir_ / "trace.csv";
  const auto r = invoke("run " + p.string() + " --out " + trace.string() + " --iters 10");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("A3(ii)"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(trace));
  EXPECT_EQ(invoke("graph-check " + p.string()).code, 3);
}

TEST_F(Cli, GridBudgetExitsFive) {
  const auto r = invoke("oracle " + scenario("example1") + " --grid 1001", "NASHNET_BUDGET=1000");
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("at most"), std::string::npos) << r.err;
}

TEST_F(Cli, RunWithZeroIterations) {
  const fs::path trace = dir_ / "t.csv", metrics = dir_ / "m.csv";
  const auto r = invoke("run " + scenario("example1") + " --iters 0 --out " + trace.string() + " --metrics " +
                        metrics.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string t = slurp(trace);
  EXPECT_EQ(t.rfind("k,agent,subnet,s0,stepsize\n", 0), 0u);
  // header plus one row per agent: three in subnet 1, two in subnet 2
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 1 + 3 + 2);
  const std::string m = slurp(metrics);
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 2);
}

TEST_F(Cli, RunIsDeterministic) {
  const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv";
  ASSERT_EQ(invoke("run " + scenario("example2") + " --iters 300 --out " + a.string()).code, 0);
  ASSERT_EQ(invoke("run " + scenario("example2") + " --iters 300 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(Cli, GraphCheckReportsAssumptions) {
  const auto r = invoke("graph-check " + scenario("example2"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("A3(ii): true"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("subnet 1 UJSC(T=2): true"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("jointly bipartite"), std::string::npos);
  EXPECT_NE(r.out.find("limit phi1(s = 1 mod 2) = (0.533632, 0.152466, 0.313901)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("balanced=false"), std::string::npos);
  const auto balanced = invoke("graph-check " + scenario("example1"));
  EXPECT_EQ(balanced.out.find("balanced=false"), std::string::npos) << balanced.out;
}

TEST_F(Cli, OracleFindsCatalogSaddle) {
  const fs::path csv = dir_ / "saddle.csv";
  const auto r = invoke("oracle " + scenario("example1") + " --grid 401 --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("x*=(0.610253)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("y*=(0.884407)"), std::string::npos) << r.out;
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("x0,y0,value,minimax_gap,grid_resolution,violation\n0.61025", 0), 0u) << text;
}

TEST_F(Cli, OracleWeightsMoveTheSaddle) {
  const auto r = invoke("oracle " + scenario("example1") + " --grid 401 --weights 0.5336,0.1525,0.3139");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("x*=(0.398"), std::string::npos) << r.out;
  EXPECT_EQ(invoke("oracle " + scenario("example1") + " --weights 1,-1,1").code, 1);
}

TEST_F(Cli, ReproduceWritesArtifacts) {
  const auto r = invoke("reproduce 1 --trust-bundled --iters 200 --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"trace.csv", "metrics.csv", "plot.csv", "scenario.yaml"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  EXPECT_EQ(invoke("run " + (dir_ / "scenario.yaml").string() + " --iters 5").code, 0);
}

TEST_F(Cli, SweepRunsInParallelAndSummarises) {
  const auto bad = write("broken.yaml", "name: [unclosed\n");
  const auto r = invoke("sweep " + scenario("example1") + " " + scenario("shared_saddle") + " " + bad.string() +
                        " --iters 50 --jobs 3 --out " + (dir_ / "sweep").string());
  EXPECT_EQ(r.code, 2);
  const std::string summary = slurp(dir_ / "sweep" / "summary.csv");
  EXPECT_EQ(summary.rfind("scenario,status,nash_error,h1,h2\nexample1,ok,", 0), 0u) << summary;
  EXPECT_NE(summary.find("shared_saddle,ok,"), std::string::npos);
  EXPECT_NE(summary.find("broken,failed(2)"), std::string::npos);
}
