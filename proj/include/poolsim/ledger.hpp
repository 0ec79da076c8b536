#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/model.hpp"

namespace poolsim {

struct RoundRecord {
  std::uint32_t round = 0;
  double demand_M = 0.0;
  StrategyProfile allocations;
  std::vector<double> difficulties;
  std::vector<double> rewards;
  std::vector<int> subsidy_flags;
  double delta = 1.0;
  double budget_ratio = 0.0;
  double intake = 0.0;   // p * min(|D|, M)
  double outflow = 0.0;  // sum of rewards
};

/// Ordered round records plus running platform totals.
struct SimulationLedger {
  std::vector<RoundRecord> rounds;
  double cumulative_intake = 0.0;
  double cumulative_outflow = 0.0;

  std::size_t miners() const { return rounds.empty() ? 0 : rounds.front().allocations.size(); }

  void append(RoundRecord record) {
    cumulative_intake += record.intake;
    cumulative_outflow += record.outflow;
    rounds.push_back(std::move(record));
  }
};

}  // namespace poolsim
