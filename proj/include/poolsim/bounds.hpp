#pragma once

// Tail bounds and lower-bound objects behind the PPSS incentive argument.

#include <algorithm>
#include <cmath>

#include "poolsim/error.hpp"
#include "poolsim/mechanisms.hpp"
#include "poolsim/model.hpp"

namespace poolsim {

struct TailBound {
  double standard = 1.0;  // (t/s)^s e^(s - t)
  double simplified = 1.0;  // u e^(1 - u), u = t/s; the per-unit-shape base
};

/// Chernoff upper bounds on P(X <= t) for X ~ Gamma(s, 1), t < s.
///
/// `standard` is the optimized Chernoff bound. `simplified` drops the shape
/// exponent; it dominates `standard` whenever s >= 1 because its base is <= 1.
inline TailBound chernoff_tail_upper(double shape, double threshold) {
  if (!(shape > 0.0) || !(threshold > 0.0)) throw DomainError("chernoff_tail_upper: need s, t > 0");
  if (!(threshold < shape)) throw DomainError("chernoff_tail_upper: bound is vacuous for t >= s");
  const double u = threshold / shape;
  TailBound out;
  out.standard = std::exp(shape * std::log(u) + shape - threshold);
  out.simplified = u * std::exp(1.0 - u);
  return out;
}

/// max(0, 1 - u e^(1-u)) with u = lambda A / a: the claimed lower bound on the
/// probability that the subsidy indicator fires at allocation a. It is a valid
/// bound only for a > lambda A, where the tail bound above applies.
inline double subsidy_prob_lower(double a, double capacity, double lambda) {
  if (!(a > 0.0)) throw DomainError("subsidy_prob_lower: allocation must be > 0");
  const double u = lambda * capacity / a;
  return std::max(0.0, 1.0 - u * std::exp(1.0 - u));
}

/// a c~ - C(a): the payoff floor the PPSS incentive argument maximizes.
inline double floor_payoff(double a, double c_tilde_value, const CostFunction& cost) {
  return a * c_tilde_value - cost_eval(cost, a);
}

/// Subsidy mass g(D) = (c~/k - b) D / max(K(D), eps_k).
inline double g_function(double D, double c_tilde_value, const PlatformParams& params,
                         const MinerProfile& miner) {
  const double shape = subsidy_shape(D, miner, params);
  return (c_tilde_value / params.k - params.b) * D / std::max(shape, params.eps_k);
}

}  // namespace poolsim
