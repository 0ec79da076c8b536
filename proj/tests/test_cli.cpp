#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "poolsim/csv.hpp"

namespace fs = std::filesystem;
using poolsim::parse_csv;
using poolsim::parse_double;
using poolsim::read_file;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("poolsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& args) {
    const std::string cmd = std::string(POOLSIM_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out() { return read_file(dir_ / "stdout.txt"); }
  std::string err() { return read_file(dir_ / "stderr.txt"); }

  fs::path dir_;
};

const char* kMinimal = R"({"mechanism":"pps","platform":{"k":2},
  "miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],
  "demand":{"family":"constant","M":10},"rounds":25,"replicas":1000,"seed":4})";

const char* kTwoMinerLowDemand = R"({"mechanism":"pps","platform":{"k":10},
  "miners":[{"capacity":1,"cost":{"family":"linear","r":1}},{"capacity":1,"cost":{"family":"linear","r":1}}],
  "demand":{"family":"constant","M":2},"rounds":50,"replicas":2000,"seed":1})";

}  // namespace

TEST_F(Cli, SimulateWritesLedgerAndSummary) {
  const auto cfg = write("c.json", kMinimal);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "a").string()), 0);
  const auto rows = parse_csv(read_file(dir_ / "a" / "ledger.csv"));
  EXPECT_EQ(rows.size(), 26u);
  const std::string summary = read_file(dir_ / "a" / "summary.csv");
  EXPECT_NE(summary.find("mean_budget_ratio,"), std::string::npos);
  EXPECT_NE(summary.find("mean_payoff_0,"), std::string::npos);
  EXPECT_NE(summary.find("subsidy_frequency_0,"), std::string::npos);
  EXPECT_TRUE(err().empty());
}

TEST_F(Cli, SimulateIsDeterministic) {
  const auto cfg = write("c.json", kMinimal);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "b").string() + " --workers 3"), 0);
  EXPECT_EQ(read_file(dir_ / "a" / "ledger.csv"), read_file(dir_ / "b" / "ledger.csv"));
  EXPECT_EQ(read_file(dir_ / "a" / "summary.csv"), read_file(dir_ / "b" / "summary.csv"));
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "c").string() + " --seed 5"), 0);
  EXPECT_NE(read_file(dir_ / "a" / "ledger.csv"), read_file(dir_ / "c" / "ledger.csv"));
}

TEST_F(Cli, SupplyDominantDemandWarnsButSucceeds) {
  const auto cfg = write("c.json", kTwoMinerLowDemand);
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --out " + dir_.string()), 0);
  EXPECT_NE(err().find("warning"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitTwoAndNameField) {
  const auto bad = write("bad.json", R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],
                                        "demand":{"family":"constant","M":10},"colour":3})");
  EXPECT_EQ(run("simulate --config " + bad.string() + " --out " + dir_.string()), 2);
  EXPECT_NE(err().find("/colour"), std::string::npos);
  const auto malformed = write("m.json", "{");
  EXPECT_EQ(run("verify --config " + malformed.string() + " --out " + dir_.string()), 2);
}

TEST_F(Cli, IoErrorsExitOne) {
  EXPECT_EQ(run("simulate --config " + (dir_ / "missing.json").string() + " --out " + dir_.string()), 1);
  const auto cfg = write("c.json", kMinimal);
  const auto blocker = write("file", "x");
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --out " + (blocker / "sub").string()), 1);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("simulate"), 2);
  const auto cfg = write("c.json", kMinimal);
  EXPECT_EQ(run("verify --config " + cfg.string() + " --out " + dir_.string() + " --theorems T9"), 2);
}

TEST_F(Cli, BestResponseCurveAndArgmax) {
  const auto cfg = write("c.json", kTwoMinerLowDemand);
  ASSERT_EQ(run("best-response --config " + cfg.string() + " --out " + dir_.string() + " --miner 1"), 0);
  const auto rows = parse_csv(read_file(dir_ / "br_curve.csv"));
  ASSERT_EQ(rows.size(), 65u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "payoff_mean", "ci"}));
  const std::string line = out();
  ASSERT_EQ(line.rfind("argmax ", 0), 0u);
  const double argmax = parse_double(line.substr(7, line.find(' ', 7) - 7));
  EXPECT_GT(argmax, 0.35);
  EXPECT_LT(argmax, 0.5);
  EXPECT_EQ(run("best-response --config " + cfg.string() + " --out " + dir_.string() + " --miner 2"), 2);
  EXPECT_EQ(run("best-response --config " + cfg.string() + " --out " + dir_.string() + " --miner -1"), 2);
  EXPECT_EQ(run("best-response --config " + cfg.string() + " --out " + dir_.string() +
                " --miner 0 --objective nonsense"),
            2);
}

TEST_F(Cli, SweepAxesValidated) {
  const auto cfg = write("c.json", kMinimal);
  const std::string base = "sweep --config " + cfg.string() + " --out " + dir_.string();
  EXPECT_EQ(run(base), 2);
  EXPECT_EQ(run(base + " --axis /platform/nope=1:2:3"), 2);
  EXPECT_EQ(run(base + " --axis /mechanism=1:2:3"), 2);
  EXPECT_EQ(run(base + " --axis /platform/k=1:2:2 --axis /platform/b=1:2:2 --axis /seed=1:2:2"), 2);
}

TEST_F(Cli, SweepLinearCostAcrossThresholdFlipsVerdict) {
  // bk = 2; r from 1 to 3 in steps of 0.1.
  const auto cfg = write("c.json", R"({"mechanism":"pps","platform":{"k":2},
    "miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],
    "demand":{"family":"constant","M":100},"rounds":20,"replicas":2000,"seed":2})");
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + dir_.string() +
                " --axis /miners/0/cost/r=1:3:21"),
            0);
  const auto rows = parse_csv(read_file(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0][0], "/miners/0/cost/r");
  EXPECT_EQ(rows[0][1], "ocdic_pass_0");
  for (std::size_t j = 1; j < rows.size(); ++j) {
    const double r = parse_double(rows[j][0]);
    if (r < 2 - 0.1 + 1e-9) {
      EXPECT_EQ(rows[j][1], "1") << "r = " << r;
    }
    if (r > 2 + 0.1 - 1e-9) {
      EXPECT_EQ(rows[j][1], "0") << "r = " << r;
    }
  }
}

TEST_F(Cli, SweepLambdaLowersSubsidyFrequency) {
  const auto cfg = write("c.json", R"({"mechanism":"ppss","platform":{"k":100},
    "miners":[{"capacity":1,"cost":{"family":"linear","r":150}}],
    "demand":{"family":"constant","M":300},"rounds":3000,"replicas":1000,"seed":3})");
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + dir_.string() +
                " --axis /platform/lambda=0.85:1.05:5 --replicas 1000"),
            2);  // lambda = 1 and above are invalid
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + dir_.string() +
                " --axis /platform/lambda=0.9:0.99:4"),
            0);
  const auto rows = parse_csv(read_file(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  const std::size_t col = rows[0].size() - 1;
  EXPECT_EQ(rows[0][col], "subsidy_frequency_0");
  for (std::size_t j = 2; j < rows.size(); ++j)
    EXPECT_LT(parse_double(rows[j][col]), parse_double(rows[j - 1][col]));
}

TEST_F(Cli, Fig1OutputsCsvAndSvg) {
  ASSERT_EQ(run("fig1 --out " + dir_.string()), 0);
  const auto rows = parse_csv(read_file(dir_ / "fig1.csv"));
  ASSERT_EQ(rows.size(), 302u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"A", "K"}));
  EXPECT_NEAR(parse_double(rows[1][1]), 0.64543, 1e-5);
  EXPECT_NEAR(parse_double(rows[301][1]), 0.99271, 1e-5);
  const std::string svg = read_file(dir_ / "fig1.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST_F(Cli, VerifyReportsVerdicts) {
  const auto cfg = write("c.json", R"({"mechanism":"ppss","platform":{"k":100},
    "miners":[{"capacity":1,"cost":{"family":"linear","r":150}}],
    "demand":{"family":"constant","M":300},"rounds":2000,"replicas":2000,"seed":5})");
  ASSERT_EQ(run("verify --config " + cfg.string() + " --out " + dir_.string() + " --theorems T1,T4,T6"), 0);
  const auto rows = parse_csv(read_file(dir_ / "theorem_report.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"theorem", "claim", "config_digest", "verdict", "metric",
                                               "bound", "ci"}));
  EXPECT_EQ(rows[1][0], "T1");
  EXPECT_EQ(rows[1][3], "PASS");
  EXPECT_EQ(rows[2][0], "T4");
  EXPECT_EQ(rows[2][3], "PASS");
  EXPECT_EQ(rows[3][0], "T6");
  EXPECT_EQ(rows[3][3], "KNOWN_DISCREPANCY");
  EXPECT_GT(parse_double(rows[3][4]), parse_double(rows[3][5]));
}
