#pragma once

// The repeated game: miners pick allocations from what they have observed,
// the round resolves under the chosen mechanism, windows and the ledger advance.
//
// Information model: after a round closes each miner sees the announced
// demand, its own difficulty and reward, and the scale factor delta. Nobody
// observes another miner's allocation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "poolsim/best_response.hpp"
#include "poolsim/budget.hpp"
#include "poolsim/error.hpp"
#include "poolsim/ledger.hpp"
#include "poolsim/mc.hpp"
#include "poolsim/mechanisms.hpp"
#include "poolsim/model.hpp"
#include "poolsim/payoff.hpp"
#include "poolsim/rng.hpp"

namespace poolsim {

struct StaticPolicy {
  double a = 0.0;
  bool operator==(const StaticPolicy&) const = default;
};

/// Best-responds each round to the last announced demand and an estimate of
/// everyone else's aggregate power inferred from delta.
struct MyopicBrPolicy {
  std::size_t grid_points = kMinGridPoints;
  std::size_t replicas = 1000;
  bool operator==(const MyopicBrPolicy&) const = default;
};

/// Backs off after a demand shortfall (delta < 1), creeps back toward
/// capacity otherwise.
struct DeltaAdaptivePolicy {
  double step = 0.5;
  double floor = 0.0;
  bool operator==(const DeltaAdaptivePolicy&) const = default;
};

using MinerPolicy = std::variant<StaticPolicy, MyopicBrPolicy, DeltaAdaptivePolicy>;

struct MinerSetup {
  double capacity = 1.0;
  CostFunction cost = LinearCost{};
  MinerPolicy policy = StaticPolicy{1.0};
  bool operator==(const MinerSetup&) const = default;
};

struct ExperimentConfig {
  PlatformParams platform;
  std::vector<MinerSetup> miners;
  DemandModel demand = ConstantDemand{1.0};
  std::size_t rounds = 10000;
  std::size_t replicas = 10000;
  std::uint64_t seed = 0;
  Mechanism mechanism = Mechanism::pps;
  BudgetBounds audit;
  std::size_t grid_points = kMinGridPoints;

  bool operator==(const ExperimentConfig&) const = default;

  std::vector<MinerProfile> profiles() const {
    std::vector<MinerProfile> out;
    out.reserve(miners.size());
    for (std::size_t i = 0; i < miners.size(); ++i) out.push_back({i, miners[i].capacity, miners[i].cost});
    return out;
  }
};

/// Throws ConfigError with a JSON-pointer style field path.
inline void validate(const ExperimentConfig& cfg) {
  try {
    validate(cfg.platform);
  } catch (const ConfigError& e) {
    throw e.nested("/platform/");
  }
  if (cfg.miners.empty()) throw ConfigError("/miners", "at least one miner required");
  for (std::size_t i = 0; i < cfg.miners.size(); ++i) {
    const std::string base = "/miners/" + std::to_string(i);
    const auto& m = cfg.miners[i];
    try {
      validate(MinerProfile{i, m.capacity, m.cost});
    } catch (const ConfigError& e) {
      const bool top = e.field() == "capacity" || e.field() == "cost";
      throw e.nested(base + (top ? "/" : "/cost/"));
    }
    if (const auto* s = std::get_if<StaticPolicy>(&m.policy)) {
      if (!(s->a >= 0.0 && s->a <= m.capacity))
        throw ConfigError(base + "/policy/a", "must lie in [0, capacity]");
    } else if (const auto* br = std::get_if<MyopicBrPolicy>(&m.policy)) {
      if (br->grid_points < 2) throw ConfigError(base + "/policy/grid_points", "must be >= 2");
      if (br->replicas < 1) throw ConfigError(base + "/policy/replicas", "must be >= 1");
    } else {
      const auto& d = std::get<DeltaAdaptivePolicy>(m.policy);
      if (!(d.step > 0.0 && d.step <= 1.0)) throw ConfigError(base + "/policy/step", "must lie in (0, 1]");
      if (!(d.floor >= 0.0 && d.floor <= m.capacity))
        throw ConfigError(base + "/policy/floor", "must lie in [0, capacity]");
    }
  }
  try {
    validate(cfg.demand);
  } catch (const ConfigError& e) {
    throw e.nested("/demand/");
  }
  if (cfg.rounds < 1 || cfg.rounds > std::numeric_limits<std::uint32_t>::max() - 1)
    throw ConfigError("/rounds", "must lie in [1, 2^32 - 2]");
  if (cfg.replicas < 1 || cfg.replicas > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("/replicas", "must lie in [1, 2^32 - 1]");
  if (cfg.grid_points < kMinGridPoints) throw ConfigError("/grid_points", "must be >= 64");
  if (!(cfg.audit.theta <= cfg.audit.gamma)) throw ConfigError("/audit/gamma", "must be >= theta");
}

// ---------------------------------------------------------------------------
// Policies

struct Observation {
  std::uint32_t round = 0;
  double demand_M = 0.0;
  double allocation = 0.0;
  double difficulty = 0.0;
  double reward = 0.0;
  double delta = 1.0;
};

/// Next allocation of a delta-adaptive miner. Without history it plays full
/// capacity.
inline double delta_adaptive_policy(std::span<const Observation> history,
                                    const DeltaAdaptivePolicy& policy, double capacity) {
  if (history.empty()) return capacity;
  const double floor = std::clamp(policy.floor, 0.0, capacity);
  const Observation& last = history.back();
  double next;
  if (last.delta < 1.0)
    next = floor + (last.allocation - floor) * (1.0 - policy.step);
  else
    next = last.allocation + policy.step * (capacity - last.allocation);
  return std::clamp(next, 0.0, capacity);
}

// ---------------------------------------------------------------------------
// Simulation state

struct SimulationState {
  ExperimentConfig config;
  std::vector<MinerProfile> profiles;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<RollingWindow> windows;
  std::vector<std::vector<Observation>> observations;
  std::vector<double> others_estimate;  // myopic miners' belief about sum a_-i
  SimulationLedger ledger;
};

inline SimulationState init_simulation(const ExperimentConfig& config, std::uint64_t seed,
                                       unsigned workers = default_workers()) {
  validate(config);
  SimulationState s;
  s.config = config;
  s.profiles = config.profiles();
  s.seed = seed;
  s.workers = std::max(1u, workers);
  s.windows = make_windows(config.miners.size(), config.platform);
  s.observations.resize(config.miners.size());
  s.others_estimate.assign(config.miners.size(), 0.0);
  return s;
}

inline double myopic_allocation(SimulationState& s, std::size_t i, std::uint32_t round,
                                const MyopicBrPolicy& policy) {
  const auto& history = s.observations[i];
  PayoffQuery q;
  q.mechanism = s.config.mechanism;
  q.params = s.config.platform;
  q.miner = s.profiles[i];
  q.demand = s.config.demand;
  if (!history.empty()) {
    const Observation& last = history.back();
    q.realized_M = last.demand_M;
    if (last.delta < 1.0) {
      const double total = last.demand_M / last.delta;
      s.others_estimate[i] = std::max(0.0, (total - last.difficulty) / s.config.platform.k);
    }
  }
  q.others_power = s.others_estimate[i];
  q.window = s.windows[i];
  q.replicas = policy.replicas;
  q.seed = derive_seed(s.seed, round, i);
  q.workers = s.workers;
  return best_response(q, policy.grid_points, Objective::expected_payoff).argmax;
}

inline double decide_allocation(SimulationState& s, std::size_t i, std::uint32_t round) {
  const MinerSetup& m = s.config.miners[i];
  double a = std::visit(
      [&](const auto& policy) -> double {
        using T = std::decay_t<decltype(policy)>;
        if constexpr (std::is_same_v<T, StaticPolicy>) {
          return policy.a;
        } else if constexpr (std::is_same_v<T, MyopicBrPolicy>) {
          return myopic_allocation(s, i, round, policy);
        } else {
          return delta_adaptive_policy(s.observations[i], policy, m.capacity);
        }
      },
      m.policy);
  return std::clamp(a, 0.0, m.capacity);
}

/// Resolves exactly one round and appends it to the ledger.
inline const RoundRecord& step_round(SimulationState& s) {
  const auto round = static_cast<std::uint32_t>(s.ledger.rounds.size() + 1);
  const auto& cfg = s.config;
  RngStream demand_rng(s.seed, round, slots::demand, 0);
  const double demand_M = sample_demand(cfg.demand, demand_rng);

  StrategyProfile a(cfg.miners.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = decide_allocation(s, i, round);

  const RoundTranscript t = sample_transcript(cfg.platform, a, demand_M, round, s.seed);
  RewardOutcome outcome = apply_mechanism(cfg.mechanism, t, cfg.platform, s.profiles, s.windows);

  RoundRecord rec;
  rec.round = round;
  rec.demand_M = demand_M;
  rec.allocations = a;
  rec.difficulties = t.difficulties;
  rec.rewards = outcome.rewards;
  rec.subsidy_flags = outcome.subsidy_flags;
  rec.delta = outcome.scale_delta;
  rec.budget_ratio = outcome.budget_ratio;
  rec.intake = cfg.platform.p * std::min(t.total_D, demand_M);
  for (double r : rec.rewards) rec.outflow += r;

  for (std::size_t i = 0; i < a.size(); ++i) {
    s.windows[i].push(t.difficulties[i]);
    s.observations[i].push_back(
        {round, demand_M, a[i], t.difficulties[i], outcome.rewards[i], outcome.scale_delta});
  }
  s.ledger.append(std::move(rec));
  return s.ledger.rounds.back();
}

/// Runs config.rounds rounds. Bit-reproducible for a given (config, seed) and
/// independent of `workers`.
inline SimulationLedger run_simulation(const ExperimentConfig& config, std::uint64_t seed,
                                       unsigned workers = default_workers()) {
  SimulationState s = init_simulation(config, seed, workers);
  s.ledger.rounds.reserve(config.rounds);
  for (std::size_t j = 0; j < config.rounds; ++j) step_round(s);
  return std::move(s.ledger);
}

/// Per-miner payoff of each round: reward minus opportunity cost.
inline std::vector<double> round_payoffs(const RoundRecord& r, std::span<const MinerProfile> miners) {
  std::vector<double> out(r.rewards.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = r.rewards[i] - cost_eval(miners[i].cost, r.allocations[i]);
  return out;
}

}  // namespace poolsim
