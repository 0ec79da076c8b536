#pragma once

// Pay-per-share (PPS) and pay-per-share-with-subsidy (PPSS) reward rules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "poolsim/error.hpp"
#include "poolsim/model.hpp"

namespace poolsim {

enum class Mechanism { pps, ppss };

inline std::string_view to_string(Mechanism m) { return m == Mechanism::pps ? "pps" : "ppss"; }

struct RewardOutcome {
  std::vector<double> rewards;
  double scale_delta = 1.0;   // min(|D|, M) / |D|, 1 when |D| = 0
  double budget_ratio = 0.0;  // sum(R) / (M p)
  std::vector<int> subsidy_flags;
};

/// Completed-round difficulty history of one miner, newest last, at most
/// `capacity` entries.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity = 1) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  void push(double difficulty) {
    entries_.push_back(difficulty);
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<double>& entries() const { return entries_; }

  /// Sum of the newest `count` entries (fewer if the window is shorter).
  double recent_sum(std::size_t count) const {
    count = std::min(count, entries_.size());
    return std::accumulate(entries_.end() - static_cast<std::ptrdiff_t>(count), entries_.end(), 0.0);
  }

 private:
  std::size_t capacity_;
  std::deque<double> entries_;
};

inline std::vector<RollingWindow> make_windows(std::size_t miners, const PlatformParams& params) {
  return std::vector<RollingWindow>(miners, RollingWindow(static_cast<std::size_t>(params.N)));
}

inline double budget_ratio(std::span<const double> rewards, double demand_M, double p) {
  const double total = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  return total / (demand_M * p);
}

inline double scale_delta(double total_D, double demand_M) {
  return total_D > 0.0 ? std::min(total_D, demand_M) / total_D : 1.0;
}

/// PPS reward of one miner.
inline double pps_miner_reward(double D, double total_D, double demand_M,
                               const PlatformParams& params) {
  if (!(total_D > 0.0)) return 0.0;
  return D / total_D * params.b * std::min(total_D, demand_M);
}

inline RewardOutcome pps_reward(const RoundTranscript& t, const PlatformParams& params) {
  RewardOutcome out;
  out.rewards.assign(t.difficulties.size(), 0.0);
  out.subsidy_flags.assign(t.difficulties.size(), 0);
  out.scale_delta = scale_delta(t.total_D, t.demand_M);
  for (std::size_t i = 0; i < t.difficulties.size(); ++i)
    out.rewards[i] = pps_miner_reward(t.difficulties[i], t.total_D, t.demand_M, params);
  out.budget_ratio = budget_ratio(out.rewards, t.demand_M, params.p);
  return out;
}

/// B_i: 1 iff the newest N-1 window entries plus the current round's
/// difficulty reach lambda * A_i * k per summed round. With fewer than N terms
/// available the threshold is prorated to the number of terms.
inline int subsidy_indicator(const RollingWindow& window, const MinerProfile& miner,
                             const PlatformParams& params, double current_D) {
  const std::size_t prior = std::min(window.size(), static_cast<std::size_t>(params.N - 1));
  const double total = window.recent_sum(prior) + current_D;
  const double terms = static_cast<double>(prior + 1);
  return total >= params.lambda * miner.capacity * params.k * terms ? 1 : 0;
}

/// K(D) = 1 - x e^(1-x) with x = lambda A k / D. Zero at D = lambda A k, tends
/// to one as D -> 0+ and as D -> infinity.
inline double subsidy_shape(double D, const MinerProfile& miner, const PlatformParams& params) {
  if (!(D > 0.0)) throw DomainError("subsidy_shape: difficulty must be > 0");
  const double x = params.lambda * miner.capacity * params.k / D;
  return 1.0 - x * std::exp(1.0 - x);
}

/// Per-unit subsidy (c~/k - b) / max(K, eps_k).
inline double subsidy_factor(double D, const MinerProfile& miner, const PlatformParams& params) {
  const double numerator = c_tilde(miner) / params.k - params.b;
  if (params.subsidy_clamp_nonneg && numerator < 0.0) return 0.0;
  const double shape = subsidy_shape(D, miner, params);
  return numerator / std::max(shape, params.eps_k);
}

/// One miner's PPSS reward given its difficulty, the round total, demand and
/// its subsidy indicator. Zero when the miner or the round produced nothing.
inline double ppss_miner_reward(double D, double total_D, double demand_M, int subsidy_flag,
                                const MinerProfile& miner, const PlatformParams& params) {
  if (!(D > 0.0) || !(total_D > 0.0)) return 0.0;
  double rate = params.b;
  if (subsidy_flag) rate += subsidy_factor(D, miner, params);
  return D / total_D * rate * std::min(total_D, demand_M);
}

/// `windows` hold each miner's history before this round; they are not
/// advanced here.
inline RewardOutcome ppss_reward(const RoundTranscript& t, const PlatformParams& params,
                                 std::span<const MinerProfile> miners,
                                 std::span<const RollingWindow> windows) {
  const std::size_t n = t.difficulties.size();
  if (miners.size() != n || windows.size() != n)
    throw DomainError("ppss_reward: profiles/windows do not match transcript size");
  RewardOutcome out;
  out.rewards.assign(n, 0.0);
  out.subsidy_flags.assign(n, 0);
  out.scale_delta = scale_delta(t.total_D, t.demand_M);
  for (std::size_t i = 0; i < n; ++i)
    out.subsidy_flags[i] = subsidy_indicator(windows[i], miners[i], params, t.difficulties[i]);
  for (std::size_t i = 0; i < n; ++i)
    out.rewards[i] = ppss_miner_reward(t.difficulties[i], t.total_D, t.demand_M,
                                       out.subsidy_flags[i], miners[i], params);
  out.budget_ratio = budget_ratio(out.rewards, t.demand_M, params.p);
  return out;
}

inline RewardOutcome apply_mechanism(Mechanism mechanism, const RoundTranscript& t,
                                     const PlatformParams& params,
                                     std::span<const MinerProfile> miners,
                                     std::span<const RollingWindow> windows) {
  return mechanism == Mechanism::pps ? pps_reward(t, params)
                                     : ppss_reward(t, params, miners, windows);
}

}  // namespace poolsim
