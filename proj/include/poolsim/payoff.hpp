#pragma once

// Expected-payoff estimation for a single miner.
//
// A replica draws the round's demand, the miner's own difficulty and the
// aggregate difficulty of everyone else (one Gamma(k * sum a_-i, 1) draw, which
// has the same law as the sum of the individual draws). Under PPSS the miner's
// window is either supplied (per-round analysis) or warmed up by simulating N
// rounds at the evaluated allocation.
//
// Substreams depend on (seed, replica) only, never on the allocation being
// evaluated, so curves over allocations use common random numbers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "poolsim/error.hpp"
#include "poolsim/mc.hpp"
#include "poolsim/mechanisms.hpp"
#include "poolsim/model.hpp"
#include "poolsim/rng.hpp"

namespace poolsim {

struct PayoffEstimate {
  double mean = 0.0;           // estimated expected payoff E[R] - C(a)
  double ci_half_width = 0.0;  // 95% normal interval
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double reward_mean = 0.0;    // the E[R] part alone
};

/// Everything a replica needs apart from the evaluated allocation.
struct PayoffQuery {
  Mechanism mechanism = Mechanism::pps;
  PlatformParams params;
  MinerProfile miner;
  double others_power = 0.0;                // sum of the other miners' allocations
  DemandModel demand = ConstantDemand{1.0};
  std::optional<double> realized_M;         // overrides `demand` when set
  std::optional<RollingWindow> window;      // PPSS history; warm-up when empty
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
};

/// Round slot used for the evaluated round; warm-up rounds use 0..N-1.
inline std::uint32_t evaluation_round(const PlatformParams& params) {
  return static_cast<std::uint32_t>(params.N);
}

/// Reward of one replica at allocation `a`.
inline double replica_reward(const PayoffQuery& q, double a, std::uint32_t replica) {
  const std::uint32_t round = evaluation_round(q.params);
  double demand_M;
  if (q.realized_M) {
    demand_M = *q.realized_M;
  } else {
    RngStream demand_rng(q.seed, round, slots::demand, replica);
    demand_M = sample_demand(q.demand, demand_rng);
  }
  RngStream own_rng(q.seed, round, 0, replica);
  const double own = gamma_sample(q.params.k * a, own_rng);
  RngStream others_rng(q.seed, round, slots::others, replica);
  const double others = gamma_sample(q.params.k * q.others_power, others_rng);
  const double total = own + others;

  if (q.mechanism == Mechanism::pps) return pps_miner_reward(own, total, demand_M, q.params);

  int flag = 0;
  if (q.window) {
    flag = subsidy_indicator(*q.window, q.miner, q.params, own);
  } else {
    RollingWindow warm(static_cast<std::size_t>(q.params.N));
    for (std::uint32_t r = 0; r < round; ++r) {
      RngStream pre_rng(q.seed, r, 0, replica);
      warm.push(gamma_sample(q.params.k * a, pre_rng));
    }
    flag = subsidy_indicator(warm, q.miner, q.params, own);
  }
  return ppss_miner_reward(own, total, demand_M, flag, q.miner, q.params);
}

inline PayoffEstimate estimate_payoff(const PayoffQuery& q, double a) {
  if (!(a >= 0.0 && a <= q.miner.capacity))
    throw DomainError("estimate_payoff: allocation outside [0, capacity]");
  if (q.replicas == 0) throw DomainError("estimate_payoff: replicas must be >= 1");
  const auto rewards = parallel_map(
      q.replicas, [&](std::size_t r) { return replica_reward(q, a, static_cast<std::uint32_t>(r)); },
      q.workers);
  const MeanCi stats = summarize(rewards);
  PayoffEstimate est;
  est.reward_mean = stats.mean;
  est.mean = stats.mean - cost_eval(q.miner.cost, a);
  est.ci_half_width = stats.ci_half_width;
  est.replicas = q.replicas;
  est.seed = q.seed;
  return est;
}

/// Query for miner `i` with everyone else held at `strategy`.
inline PayoffQuery make_query(Mechanism mechanism, std::size_t i, const StrategyProfile& strategy,
                              const PlatformParams& params, std::span<const MinerProfile> miners,
                              std::size_t replicas, std::uint64_t seed) {
  if (i >= miners.size() || strategy.size() != miners.size())
    throw DomainError("payoff query: miner index or strategy size mismatch");
  PayoffQuery q;
  q.mechanism = mechanism;
  q.params = params;
  q.miner = miners[i];
  for (std::size_t m = 0; m < strategy.size(); ++m)
    if (m != i) q.others_power += strategy[m];
  q.replicas = replicas;
  q.seed = seed;
  return q;
}

inline constexpr std::size_t kMinReplicas = 1000;

/// Monte Carlo estimate of miner i's expected payoff at `strategy`. PPSS uses
/// the warm-window protocol.
inline PayoffEstimate expected_payoff_mc(Mechanism mechanism, std::size_t i,
                                         const StrategyProfile& strategy,
                                         const PlatformParams& params,
                                         std::span<const MinerProfile> miners,
                                         const DemandModel& demand, std::size_t replicas,
                                         std::uint64_t seed, unsigned workers = default_workers()) {
  if (replicas < kMinReplicas) throw DomainError("expected_payoff_mc: replicas must be >= 1000");
  PayoffQuery q = make_query(mechanism, i, strategy, params, miners, replicas, seed);
  q.demand = demand;
  q.workers = workers;
  return estimate_payoff(q, strategy[i]);
}

/// Immediate expected payoff for the current round, given announced demand and
/// the miner's current window.
inline PayoffEstimate immediate_payoff_mc(Mechanism mechanism, std::size_t i,
                                          const StrategyProfile& strategy,
                                          const PlatformParams& params,
                                          std::span<const MinerProfile> miners, double realized_M,
                                          const RollingWindow& window, std::size_t replicas,
                                          std::uint64_t seed, unsigned workers = default_workers()) {
  PayoffQuery q = make_query(mechanism, i, strategy, params, miners, replicas, seed);
  q.realized_M = realized_M;
  q.window = window;
  q.workers = workers;
  return estimate_payoff(q, strategy[i]);
}

/// E[R_i] with the min taken inside the expectation:
///   (a_i / sum_a) * b * min(k * sum_a, mu_F).
/// Exact only when demand is constant and never binds.
inline double pps_expected_reward_closed(double a_i, double sum_a, const PlatformParams& params,
                                         double mu_F) {
  if (!(sum_a > 0.0)) return 0.0;
  return params.k * a_i / (params.k * sum_a) * params.b * std::min(params.k * sum_a, mu_F);
}

}  // namespace poolsim
