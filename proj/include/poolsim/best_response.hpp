#pragma once

// Best responses and the incentive-compatibility checks built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "poolsim/bounds.hpp"
#include "poolsim/error.hpp"
#include "poolsim/mechanisms.hpp"
#include "poolsim/model.hpp"
#include "poolsim/payoff.hpp"

namespace poolsim {

/// What a best response maximizes. PPS is judged on its expected payoff; PPSS
/// on the payoff floor a c~ - C(a) that lower-bounds it.
enum class Objective { expected_payoff, floor_payoff };

inline Objective default_objective(Mechanism m) {
  return m == Mechanism::pps ? Objective::expected_payoff : Objective::floor_payoff;
}

inline std::string_view to_string(Objective o) {
  return o == Objective::expected_payoff ? "expected_payoff" : "floor_payoff";
}

enum class BrMethod { closed_form, grid_mc };

inline std::string_view to_string(BrMethod m) {
  return m == BrMethod::closed_form ? "closed_form" : "grid_mc";
}

struct CurvePoint {
  double a = 0.0;
  double mean = 0.0;
  double ci = 0.0;
};

struct BestResponseResult {
  double argmax = 0.0;
  double value = 0.0;
  double grid_resolution = 0.0;
  BrMethod method = BrMethod::grid_mc;
  std::vector<CurvePoint> curve;  // the uniform grid, in order
};

inline constexpr std::size_t kMinGridPoints = 64;
inline constexpr int kGoldenIterations = 24;

/// Maximizes `eval(a) -> CurvePoint` over a uniform grid on [0, capacity],
/// then runs golden-section search on the interval bracketing the best grid
/// point. Ties go to the larger allocation.
template <typename Eval>
BestResponseResult maximize_on_grid(Eval&& eval, double capacity, std::size_t grid_points,
                                    BrMethod method) {
  if (grid_points < 2) throw DomainError("best_response: need at least two grid points");
  BestResponseResult out;
  out.method = method;
  out.grid_resolution = capacity / static_cast<double>(grid_points - 1);
  out.curve.reserve(grid_points);
  std::size_t best = 0;
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double a = j + 1 == grid_points ? capacity : out.grid_resolution * static_cast<double>(j);
    out.curve.push_back(eval(a));
    if (out.curve[j].mean >= out.curve[best].mean) best = j;
  }
  out.argmax = out.curve[best].a;
  out.value = out.curve[best].mean;

  double lo = out.curve[best == 0 ? 0 : best - 1].a;
  double hi = out.curve[std::min(best + 1, grid_points - 1)].a;
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = eval(x1).mean;
  double f2 = eval(x2).mean;
  for (int it = 0; it < kGoldenIterations; ++it) {
    if (f2 >= f1) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = eval(x2).mean;
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = eval(x1).mean;
    }
  }
  const double refined = f2 >= f1 ? x2 : x1;
  const double refined_value = std::max(f1, f2);
  if (refined_value > out.value || (refined_value == out.value && refined > out.argmax)) {
    out.argmax = refined;
    out.value = refined_value;
  }
  return out;
}

/// Best response of the miner described by `query` (others and demand fixed
/// inside the query).
inline BestResponseResult best_response(const PayoffQuery& query, std::size_t grid_points,
                                        Objective objective) {
  if (objective == Objective::floor_payoff) {
    const double ct = c_tilde(query.miner);
    return maximize_on_grid(
        [&](double a) { return CurvePoint{a, floor_payoff(a, ct, query.miner.cost), 0.0}; },
        query.miner.capacity, grid_points, BrMethod::closed_form);
  }
  return maximize_on_grid(
      [&](double a) {
        const PayoffEstimate est = estimate_payoff(query, a);
        return CurvePoint{a, est.mean, est.ci_half_width};
      },
      query.miner.capacity, grid_points, BrMethod::grid_mc);
}

/// Best response of miner i with the other entries of `others_fixed` held
/// fixed (entry i is ignored). Common random numbers across the grid.
inline BestResponseResult best_response(Mechanism mechanism, std::size_t i,
                                        const StrategyProfile& others_fixed,
                                        const PlatformParams& params,
                                        std::span<const MinerProfile> miners,
                                        const DemandModel& demand, std::size_t grid_points,
                                        std::size_t replicas, std::uint64_t seed,
                                        Objective objective,
                                        unsigned workers = default_workers()) {
  if (grid_points < kMinGridPoints) throw DomainError("best_response: grid_points must be >= 64");
  PayoffQuery q = make_query(mechanism, i, others_fixed, params, miners, replicas, seed);
  q.demand = demand;
  q.workers = workers;
  return best_response(q, grid_points, objective);
}

inline BestResponseResult best_response(Mechanism mechanism, std::size_t i,
                                        const StrategyProfile& others_fixed,
                                        const PlatformParams& params,
                                        std::span<const MinerProfile> miners,
                                        const DemandModel& demand, std::size_t grid_points,
                                        std::size_t replicas, std::uint64_t seed) {
  return best_response(mechanism, i, others_fixed, params, miners, demand, grid_points, replicas,
                       seed, default_objective(mechanism));
}

// ---------------------------------------------------------------------------
// Incentive-compatibility checks

struct MinerVerdict {
  std::size_t miner = 0;
  double capacity = 0.0;
  double argmax = 0.0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  BestResponseResult detail;
};

struct IcOptions {
  std::size_t grid_points = kMinGridPoints;
  double tol_a = -1.0;  // negative: two grid cells of [0, A_i]
  std::size_t replicas = 10000;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
};

inline double ic_tolerance(const IcOptions& opt, double capacity) {
  if (opt.tol_a >= 0.0) return opt.tol_a;
  return 2.0 * capacity / static_cast<double>(opt.grid_points - 1);
}

inline MinerVerdict make_verdict(std::size_t i, double capacity, double tol,
                                 BestResponseResult br) {
  MinerVerdict v;
  v.miner = i;
  v.capacity = capacity;
  v.argmax = br.argmax;
  v.value = br.value;
  v.tolerance = tol;
  v.pass = std::abs(br.argmax - capacity) <= tol;
  v.detail = std::move(br);
  return v;
}

/// OCD-IC: with everyone else at full capacity, does each miner's best
/// response equal its capacity?
inline std::vector<MinerVerdict> ocdic_check(Mechanism mechanism, const PlatformParams& params,
                                             std::span<const MinerProfile> miners,
                                             const DemandModel& demand, const IcOptions& opt,
                                             Objective objective) {
  if (opt.grid_points < kMinGridPoints) throw DomainError("ocdic_check: grid_points must be >= 64");
  const StrategyProfile full = full_capacity({miners.begin(), miners.end()});
  std::vector<MinerVerdict> out;
  for (std::size_t i = 0; i < miners.size(); ++i) {
    PayoffQuery q = make_query(mechanism, i, full, params, miners, opt.replicas, opt.seed);
    q.demand = demand;
    q.workers = opt.workers;
    out.push_back(make_verdict(i, miners[i].capacity, ic_tolerance(opt, miners[i].capacity),
                               best_response(q, opt.grid_points, objective)));
  }
  return out;
}

inline std::vector<MinerVerdict> ocdic_check(Mechanism mechanism, const PlatformParams& params,
                                             std::span<const MinerProfile> miners,
                                             const DemandModel& demand, const IcOptions& opt) {
  return ocdic_check(mechanism, params, miners, demand, opt, default_objective(mechanism));
}

/// DOCD-IC for one round: best response of the immediate expected payoff given
/// announced demand `realized_M` and the current windows; others play
/// `others` (full capacity when empty).
inline std::vector<MinerVerdict> docdic_check(Mechanism mechanism, const PlatformParams& params,
                                              std::span<const MinerProfile> miners,
                                              double realized_M,
                                              std::span<const RollingWindow> windows,
                                              const IcOptions& opt,
                                              const StrategyProfile& others = {}) {
  if (!(realized_M > 0.0)) throw DomainError("docdic_check: realized demand must be > 0");
  if (opt.grid_points < kMinGridPoints) throw DomainError("docdic_check: grid_points must be >= 64");
  if (windows.size() != miners.size()) throw DomainError("docdic_check: one window per miner");
  const StrategyProfile strategy =
      others.empty() ? full_capacity({miners.begin(), miners.end()}) : others;
  std::vector<MinerVerdict> out;
  for (std::size_t i = 0; i < miners.size(); ++i) {
    PayoffQuery q = make_query(mechanism, i, strategy, params, miners, opt.replicas, opt.seed);
    q.realized_M = realized_M;
    q.window = windows[i];
    q.workers = opt.workers;
    out.push_back(make_verdict(i, miners[i].capacity, ic_tolerance(opt, miners[i].capacity),
                               best_response(q, opt.grid_points, Objective::expected_payoff)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Best-response dynamics

struct BrDynamicsResult {
  std::vector<StrategyProfile> trajectory;  // starts with the initial profile
  bool converged = false;
  StrategyProfile fixed_point;              // empty unless converged
  std::size_t iterations = 0;
};

/// Synchronous best-response iteration: every miner best-responds to the
/// previous profile, until successive profiles differ by < tol in max norm.
inline BrDynamicsResult br_dynamics(Mechanism mechanism, const PlatformParams& params,
                                    std::span<const MinerProfile> miners,
                                    const DemandModel& demand, const StrategyProfile& start,
                                    std::size_t max_iters, double tol, const IcOptions& opt,
                                    Objective objective = Objective::expected_payoff) {
  if (max_iters < 1) throw DomainError("br_dynamics: max_iters must be >= 1");
  if (!within_capacity(start, {miners.begin(), miners.end()}))
    throw DomainError("br_dynamics: start profile outside capacity bounds");
  BrDynamicsResult out;
  out.trajectory.push_back(start);
  StrategyProfile current = start;
  for (std::size_t it = 0; it < max_iters; ++it) {
    StrategyProfile next(current.size());
    for (std::size_t i = 0; i < miners.size(); ++i) {
      next[i] = best_response(mechanism, i, current, params, miners, demand, opt.grid_points,
                              opt.replicas, opt.seed, objective, opt.workers)
                    .argmax;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      change = std::max(change, std::abs(next[i] - current[i]));
    out.trajectory.push_back(next);
    out.iterations = it + 1;
    current = std::move(next);
    if (change < tol) {
      out.converged = true;
      out.fixed_point = current;
      break;
    }
  }
  return out;
}

}  // namespace poolsim
