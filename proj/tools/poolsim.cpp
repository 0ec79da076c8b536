#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poolsim/experiments.hpp"

namespace {

void add_common(CLI::App* cmd, poolsim::CommandOptions& opts, std::uint64_t& seed,
                std::size_t& replicas, unsigned& workers) {
  cmd->add_option("--config", opts.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", seed, "override the config seed");
  cmd->add_option("--replicas", replicas, "override the config replica count");
  cmd->add_option("--workers", workers, "worker threads (default: $POOLSIM_WORKERS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd-sourced computing pool reward simulator"};
  app.require_subcommand(1);

  poolsim::CommandOptions opts;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  unsigned workers = 0;

  auto* simulate = app.add_subcommand("simulate", "run the repeated game and write ledger.csv");
  add_common(simulate, opts, seed, replicas, workers);

  auto* verify = app.add_subcommand("verify", "audit the theorems and write theorem_report.csv");
  add_common(verify, opts, seed, replicas, workers);
  std::string theorems;
  verify->add_option("--theorems", theorems, "comma-separated subset of T1..T7 (default all)");

  auto* br = app.add_subcommand("best-response", "best-response curve of one miner");
  add_common(br, opts, seed, replicas, workers);
  long long miner = 0;
  std::string objective;
  br->add_option("--miner", miner, "miner index (0-based)")->required();
  br->add_option("--objective", objective, "expected_payoff or floor_payoff");

  auto* sweep = app.add_subcommand("sweep", "grid over one or two numeric config fields");
  add_common(sweep, opts, seed, replicas, workers);
  std::vector<std::string> axes;
  sweep->add_option("--axis", axes, "/json/pointer=lo:hi:n (repeatable)");

  auto* fig1 = app.add_subcommand("fig1", "subsidy shape versus capacity");
  std::filesystem::path fig1_out = ".";
  fig1->add_option("--out", fig1_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? poolsim::exit_code::ok : poolsim::exit_code::usage;
  }

  for (auto* cmd : {simulate, verify, br, sweep}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed")) opts.seed = seed;
    if (cmd->count("--replicas")) opts.replicas = replicas;
    if (cmd->count("--workers")) opts.workers = workers;
  }

  if (simulate->parsed()) return poolsim::cmd_simulate(opts);
  if (verify->parsed()) return poolsim::cmd_verify(opts, theorems);
  if (br->parsed()) return poolsim::cmd_best_response(opts, miner, objective);
  if (sweep->parsed()) return poolsim::cmd_sweep(opts, axes);
  return poolsim::cmd_fig1(fig1_out);
}
