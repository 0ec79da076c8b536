#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "poolsim/config.hpp"
#include "poolsim/csv.hpp"
#include "poolsim/experiments.hpp"

using namespace poolsim;

namespace {

const char* kFullConfig = R"({
  "mechanism": "ppss",
  "platform": {"p": 1.5, "b": 1.25, "k": 100, "lambda": 0.7, "N": 3, "eps_k": 0.002,
               "subsidy_clamp_nonneg": false},
  "miners": [
    {"capacity": 1, "cost": {"family": "linear", "r": 150}},
    {"capacity": 2.5, "cost": {"family": "power", "c": 3, "q": 2.2},
     "policy": {"kind": "myopic_br", "grid_points": 80, "replicas": 1200}},
    {"capacity": 0.75, "cost": {"family": "linear", "r": 0.1},
     "policy": {"kind": "delta_adaptive", "step": 0.25, "floor": 0.1}},
    {"capacity": 3, "cost": {"family": "linear", "r": 1}, "policy": {"kind": "static", "a": 1.5}}
  ],
  "demand": {"family": "lognormal", "mu": 6, "sigma": 0.3},
  "rounds": 50, "replicas": 2000, "seed": 18446744073709551615, "grid_points": 65,
  "audit": {"theta": 0.1, "gamma": 2}
})";

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, ParsesEveryField) {
  const ExperimentConfig c = parse_config(kFullConfig);
  EXPECT_EQ(c.mechanism, Mechanism::ppss);
  EXPECT_EQ(c.platform.N, 3);
  EXPECT_FALSE(c.platform.subsidy_clamp_nonneg);
  ASSERT_EQ(c.miners.size(), 4u);
  EXPECT_EQ(std::get<StaticPolicy>(c.miners[0].policy).a, 1.0);
  EXPECT_EQ(std::get<MyopicBrPolicy>(c.miners[1].policy).grid_points, 80u);
  EXPECT_EQ(std::get<DeltaAdaptivePolicy>(c.miners[2].policy).step, 0.25);
  EXPECT_EQ(std::get<StaticPolicy>(c.miners[3].policy).a, 1.5);
  EXPECT_EQ(std::get<PowerCost>(c.miners[1].cost).q, 2.2);
  EXPECT_EQ(std::get<LogNormalDemand>(c.demand).sigma, 0.3);
  EXPECT_EQ(c.seed, std::numeric_limits<std::uint64_t>::max());
  EXPECT_EQ(c.audit.gamma, 2);
}

TEST(Config, RoundTripIsIdentical) {
  const ExperimentConfig c = parse_config(kFullConfig);
  const std::string once = serialize_config(c);
  const ExperimentConfig again = parse_config(once);
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_config(again), once);
  EXPECT_EQ(config_digest(again), config_digest(c));
  for (const char* demand : {R"({"family":"constant","M":7})", R"({"family":"uniform","lo":1,"hi":2})",
                             R"({"family":"gamma","shape":3,"rate":0.5})"}) {
    const std::string text = std::string(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],"demand":)") +
                             demand + "}";
    const ExperimentConfig d = parse_config(text);
    EXPECT_EQ(parse_config(serialize_config(d)), d);
  }
}

TEST(Config, DigestTracksContent) {
  ExperimentConfig c = parse_config(kFullConfig);
  const std::string before = config_digest(c);
  EXPECT_EQ(before.size(), 16u);
  c.platform.lambda = 0.71;
  EXPECT_NE(config_digest(c), before);
}

TEST(Config, UnknownFieldsRejectedWithPath) {
  const std::string miner = R"({"capacity":1,"cost":{"family":"linear","r":1}})";
  const std::string demand = R"({"family":"constant","M":7})";
  EXPECT_EQ(error_field(R"({"miners":[)" + miner + R"(],"demand":)" + demand + R"(,"colour":1})"),
            "/colour");
  EXPECT_EQ(error_field(R"({"miners":[)" + miner + R"(],"demand":)" + demand +
                        R"(,"platform":{"kk":1}})"),
            "/platform/kk");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1,"q":2}}],"demand":)" +
                        demand + "}"),
            "/miners/0/cost/q");
  EXPECT_EQ(error_field(R"({"miners":[)" + miner + R"(],"demand":{"family":"constant","M":7,"x":1}})"),
            "/demand/x");
}

TEST(Config, InvalidValuesNameTheField) {
  const std::string demand = R"({"family":"constant","M":7})";
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":-1,"cost":{"family":"linear","r":1}}],"demand":)" +
                        demand + "}"),
            "/miners/0/capacity");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}},
                                      {"capacity":1,"cost":{"family":"power","c":1,"q":0.5}}],"demand":)" +
                        demand + "}"),
            "/miners/1/cost/q");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],"demand":)" + demand +
                        R"(,"platform":{"lambda":1.5}})"),
            "/platform/lambda");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],"demand":{"family":"uniform","lo":5,"hi":2}})"),
            "/demand/hi");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1}}],"demand":)" + demand +
                        R"(,"rounds":-3})"),
            "/rounds");
  EXPECT_EQ(error_field(R"({"miners":[{"capacity":1,"cost":{"family":"linear","r":1},
                                       "policy":{"kind":"static","a":2}}],"demand":)" +
                        demand + "}"),
            "/miners/0/policy/a");
  EXPECT_EQ(error_field(R"({"miners":[],"demand":)" + demand + "}"), "/miners");
  EXPECT_EQ(error_field(R"({"demand":)" + demand + "}"), "/miners");
  EXPECT_EQ(error_field("{not json"), "/");
  EXPECT_EQ(error_field(R"({"mechanism":"pplns","miners":[],"demand":{}})"), "/mechanism");
}

TEST(Csv, DoublesRoundTripExactly) {
  RngStream rng(51, 0, 0, 0);
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const double back = parse_double(format_double(v));
    ASSERT_EQ(std::memcmp(&back, &v, sizeof v), 0) << format_double(v);
  }
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
}

TEST(Csv, LedgerRoundTrip) {
  ExperimentConfig cfg = parse_config(kFullConfig);
  cfg.miners[1].policy = StaticPolicy{2};
  cfg.rounds = 200;
  const SimulationLedger ledger = run_simulation(cfg, 3, 2);
  const std::string text = ledger_to_csv(ledger);
  const auto rows = parse_csv(text);
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0].front(), "round");
  EXPECT_EQ(rows[0][2], "a_0");
  EXPECT_EQ(rows[0][5], "subsidy_flag_0");
  EXPECT_EQ(rows[0].back(), "budget_ratio");
  const SimulationLedger back = ledger_from_csv(text);
  ASSERT_EQ(back.rounds.size(), ledger.rounds.size());
  for (std::size_t j = 0; j < ledger.rounds.size(); ++j) {
    const auto& a = ledger.rounds[j];
    const auto& b = back.rounds[j];
    ASSERT_EQ(a.round, b.round);
    ASSERT_EQ(a.demand_M, b.demand_M);
    ASSERT_EQ(a.allocations, b.allocations);
    ASSERT_EQ(a.difficulties, b.difficulties);
    ASSERT_EQ(a.rewards, b.rewards);
    ASSERT_EQ(a.subsidy_flags, b.subsidy_flags);
    ASSERT_EQ(a.delta, b.delta);
    ASSERT_EQ(a.budget_ratio, b.budget_ratio);
  }
  EXPECT_EQ(ledger_to_csv(back), text);
  EXPECT_THROW(ledger_from_csv("round,M,x\n"), std::invalid_argument);
}

TEST(Csv, ReportAndSweepSchemas) {
  std::vector<ReportRow> rows{{"T1", "claim", "abcd", Verdict::known_discrepancy, 0.1, 0.2, 0.3}};
  const auto parsed = parse_csv(report_to_csv(rows));
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0], (std::vector<std::string>{"theorem", "claim", "config_digest", "verdict",
                                                 "metric", "bound", "ci"}));
  EXPECT_EQ(parsed[1][3], "KNOWN_DISCREPANCY");
  EXPECT_EQ(parse_double(parsed[1][4]), 0.1);

  const SweepAxis axis = parse_axis("/platform/lambda=0.1:0.9:5");
  EXPECT_EQ(axis.pointer, "/platform/lambda");
  EXPECT_EQ(axis.points, 5u);
  EXPECT_DOUBLE_EQ(axis.value(4), 0.9);
  EXPECT_THROW(parse_axis("platform=1:2:3"), ConfigError);
  EXPECT_THROW(parse_axis("/platform/k=1:2"), ConfigError);
}

TEST(Csv, Fig1DataMatchesEndpointsAndIncreases) {
  const Fig1Data d = fig1_data();
  ASSERT_EQ(d.A.size(), 301u);
  EXPECT_EQ(d.A.front(), 20);
  EXPECT_EQ(d.A.back(), 50);
  EXPECT_NEAR(d.K.front(), 1 - 3.2 * std::exp(1 - 3.2), 1e-15);
  EXPECT_NEAR(d.K.front(), 0.64543, 1e-5);
  EXPECT_NEAR(d.K.back(), 1 - 8 * std::exp(-7.0), 1e-15);
  for (std::size_t j = 1; j < d.K.size(); ++j) ASSERT_GT(d.K[j], d.K[j - 1]);
}

TEST(Svg, ContainsPolylineWithOnePointPerSample) {
  const LinePlot plot{"t", "x", "y", {0, 1, 2}, {0, 1, 4}};
  const std::string svg = render_svg(plot);
  EXPECT_NE(svg.find("viewBox=\"0 0 800 500\""), std::string::npos);
  const auto start = svg.find("points=\"");
  ASSERT_NE(start, std::string::npos);
  const auto end = svg.find('"', start + 8);
  const std::string pts = svg.substr(start + 8, end - start - 8);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 3);
}
