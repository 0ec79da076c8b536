#pragma once

// Domain types and the Gamma computing model.
//
// Units: "power" is computing capacity, "difficulty" is completed work, and a
// miner running at power a for one round completes D ~ Gamma(k*a, 1)
// difficulty, so E[D] = k*a.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "poolsim/error.hpp"
#include "poolsim/rng.hpp"

namespace poolsim {

struct PlatformParams {
  double p = 1.0;       // price per difficulty unit
  double b = 1.0;       // base reward per difficulty unit
  double k = 1.0;       // difficulty per power unit
  double lambda = 0.8;  // subsidy threshold fraction
  int N = 5;            // subsidy window length (rounds)
  double eps_k = 1e-3;  // floor on the subsidy shape divisor
  bool subsidy_clamp_nonneg = true;

  bool operator==(const PlatformParams&) const = default;
};

/// Throws ConfigError naming the first violated field.
inline void validate(const PlatformParams& params) {
  if (!(params.p > 0.0) || !std::isfinite(params.p)) throw ConfigError("p", "must be > 0");
  if (!(params.b > 0.0) || !std::isfinite(params.b)) throw ConfigError("b", "must be > 0");
  if (!(params.k > 0.0) || !std::isfinite(params.k)) throw ConfigError("k", "must be > 0");
  if (!(params.lambda > 0.0 && params.lambda < 1.0))
    throw ConfigError("lambda", "must lie in (0, 1)");
  if (params.N < 1) throw ConfigError("N", "must be >= 1");
  if (!(params.eps_k > 0.0 && params.eps_k < 1.0))
    throw ConfigError("eps_k", "must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Opportunity cost

struct LinearCost {
  double r = 1.0;  // money per power unit
  bool operator==(const LinearCost&) const = default;
};

/// C(a) = c * a^q, q >= 1.
struct PowerCost {
  double c = 1.0;
  double q = 2.0;
  bool operator==(const PowerCost&) const = default;
};

using CostFunction = std::variant<LinearCost, PowerCost>;

inline void validate(const CostFunction& cost) {
  if (const auto* lin = std::get_if<LinearCost>(&cost)) {
    if (!(lin->r > 0.0) || !std::isfinite(lin->r)) throw ConfigError("r", "must be > 0");
  } else {
    const auto& pw = std::get<PowerCost>(cost);
    if (!(pw.c > 0.0) || !std::isfinite(pw.c)) throw ConfigError("c", "must be > 0");
    if (!(pw.q >= 1.0) || !std::isfinite(pw.q)) throw ConfigError("q", "must be >= 1");
  }
}

inline double cost_eval(const CostFunction& cost, double a) {
  if (!(a >= 0.0)) throw DomainError("cost_eval: allocation must be >= 0");
  return std::visit(
      [a](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearCost>) {
          return f.r * a;
        } else {
          return a == 0.0 ? 0.0 : f.c * std::pow(a, f.q);
        }
      },
      cost);
}

/// C'(a); nondecreasing in a for both families.
inline double cost_marginal(const CostFunction& cost, double a) {
  if (!(a >= 0.0)) throw DomainError("cost_marginal: allocation must be >= 0");
  return std::visit(
      [a](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearCost>) {
          return f.r;
        } else {
          if (f.q == 1.0) return f.c;
          return a == 0.0 ? 0.0 : f.c * f.q * std::pow(a, f.q - 1.0);
        }
      },
      cost);
}

// ---------------------------------------------------------------------------
// Miners

struct MinerProfile {
  std::size_t id = 0;
  double capacity = 1.0;  // A_i, power units
  CostFunction cost = LinearCost{};

  bool operator==(const MinerProfile&) const = default;
};

/// Marginal cost at full capacity, C_i'(A_i). By convexity this is the largest
/// marginal cost anywhere on [0, A_i].
inline double c_tilde(const MinerProfile& miner) {
  return cost_marginal(miner.cost, miner.capacity);
}

inline void validate(const MinerProfile& miner) {
  if (!(miner.capacity > 0.0) || !std::isfinite(miner.capacity))
    throw ConfigError("capacity", "must be > 0");
  validate(miner.cost);
  const double ct = c_tilde(miner);
  if (!(ct > 0.0) || !std::isfinite(ct))
    throw ConfigError("cost", "marginal cost at capacity must be finite and > 0");
}

/// a_1..a_n, one entry per miner.
using StrategyProfile = std::vector<double>;

inline bool within_capacity(const StrategyProfile& a, const std::vector<MinerProfile>& miners) {
  if (a.size() != miners.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] >= 0.0 && a[i] <= miners[i].capacity)) return false;
  return true;
}

inline StrategyProfile full_capacity(const std::vector<MinerProfile>& miners) {
  StrategyProfile a;
  a.reserve(miners.size());
  for (const auto& m : miners) a.push_back(m.capacity);
  return a;
}

inline double total_capacity(const std::vector<MinerProfile>& miners) {
  double s = 0.0;
  for (const auto& m : miners) s += m.capacity;
  return s;
}

// ---------------------------------------------------------------------------
// Gamma sampling

/// Exact Gamma(shape, 1) draw (Marsaglia-Tsang). Shape 0 is the point mass at
/// zero; shapes below one use the U^(1/shape) boost of a Gamma(shape + 1) draw.
inline double gamma_sample(double shape, RngStream& rng) {
  if (!(shape >= 0.0)) throw DomainError("gamma_sample: shape must be >= 0");
  if (shape == 0.0) return 0.0;
  if (shape < 1.0) {
    const double g = gamma_sample(shape + 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double z = rng.normal();
    const double t = 1.0 + c * z;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

// ---------------------------------------------------------------------------
// Demand

struct ConstantDemand {
  double M = 1.0;
  bool operator==(const ConstantDemand&) const = default;
};
struct UniformDemand {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const UniformDemand&) const = default;
};
struct GammaDemand {
  double shape = 1.0;
  double rate = 1.0;
  bool operator==(const GammaDemand&) const = default;
};
struct LogNormalDemand {
  double mu = 0.0;
  double sigma = 1.0;
  bool operator==(const LogNormalDemand&) const = default;
};

using DemandModel = std::variant<ConstantDemand, UniformDemand, GammaDemand, LogNormalDemand>;

inline void validate(const DemandModel& demand) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantDemand>) {
          if (!(f.M > 0.0) || !std::isfinite(f.M)) throw ConfigError("M", "must be > 0");
        } else if constexpr (std::is_same_v<T, UniformDemand>) {
          if (!(f.lo >= 0.0)) throw ConfigError("lo", "must be >= 0");
          if (!(f.hi > f.lo) || !std::isfinite(f.hi)) throw ConfigError("hi", "must exceed lo");
        } else if constexpr (std::is_same_v<T, GammaDemand>) {
          if (!(f.shape > 0.0)) throw ConfigError("shape", "must be > 0");
          if (!(f.rate > 0.0)) throw ConfigError("rate", "must be > 0");
        } else {
          if (!std::isfinite(f.mu)) throw ConfigError("mu", "must be finite");
          if (!(f.sigma >= 0.0) || !std::isfinite(f.sigma))
            throw ConfigError("sigma", "must be >= 0");
        }
      },
      demand);
}

/// Analytic mean mu_F of the demand family.
inline double demand_mean(const DemandModel& demand) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantDemand>) {
          return f.M;
        } else if constexpr (std::is_same_v<T, UniformDemand>) {
          return 0.5 * (f.lo + f.hi);
        } else if constexpr (std::is_same_v<T, GammaDemand>) {
          return f.shape / f.rate;
        } else {
          return std::exp(f.mu + 0.5 * f.sigma * f.sigma);
        }
      },
      demand);
}

inline double sample_demand(const DemandModel& demand, RngStream& rng) {
  return std::visit(
      [&rng](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantDemand>) {
          return f.M;
        } else if constexpr (std::is_same_v<T, UniformDemand>) {
          return f.lo + (f.hi - f.lo) * rng.uniform();
        } else if constexpr (std::is_same_v<T, GammaDemand>) {
          double m = 0.0;
          while (m <= 0.0) m = gamma_sample(f.shape, rng) / f.rate;
          return m;
        } else {
          return std::exp(f.mu + f.sigma * rng.normal());
        }
      },
      demand);
}

/// Warning text when mu_F < k * sum(A); the incentive results for both
/// mechanisms assume demand dominates supply.
inline std::optional<std::string> demand_dominance_warning(const PlatformParams& params,
                                                           const std::vector<MinerProfile>& miners,
                                                           const DemandModel& demand) {
  const double mu = demand_mean(demand);
  const double supply = params.k * total_capacity(miners);
  if (mu < supply) {
    return "warning: mean demand " + std::to_string(mu) + " is below full supply k*sum(A) = " +
           std::to_string(supply) + "; demand-dominance assumption does not hold";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Transcripts

struct RoundTranscript {
  std::uint32_t round = 0;
  double demand_M = 0.0;
  StrategyProfile allocations;
  std::vector<double> difficulties;
  double total_D = 0.0;  // |D|, the sum of difficulties
};

/// Draws D_i ~ Gamma(k * a_i, 1) independently; miner i reads substream
/// (seed, round, i, replica).
inline RoundTranscript sample_transcript(const PlatformParams& params, const StrategyProfile& a,
                                         double demand_M, std::uint32_t round, std::uint64_t seed,
                                         std::uint32_t replica = 0) {
  RoundTranscript t;
  t.round = round;
  t.demand_M = demand_M;
  t.allocations = a;
  t.difficulties.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0)) throw DomainError("sample_transcript: allocation must be >= 0");
    RngStream rng(seed, round, static_cast<std::uint32_t>(i), replica);
    t.difficulties[i] = gamma_sample(params.k * a[i], rng);
    t.total_D += t.difficulties[i];
  }
  return t;
}

/// Builds a transcript from known difficulties (used by tests and replays).
inline RoundTranscript make_transcript(double demand_M, std::vector<double> difficulties,
                                       StrategyProfile allocations = {}, std::uint32_t round = 0) {
  RoundTranscript t;
  t.round = round;
  t.demand_M = demand_M;
  t.difficulties = std::move(difficulties);
  t.allocations = std::move(allocations);
  for (double d : t.difficulties) t.total_D += d;
  return t;
}

}  // namespace poolsim
