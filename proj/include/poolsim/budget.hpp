#pragma once

// Budget-balance audits over a simulation ledger.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "poolsim/error.hpp"
#include "poolsim/ledger.hpp"
#include "poolsim/mc.hpp"
#include "poolsim/model.hpp"

namespace poolsim {

struct BudgetBounds {
  double theta = 0.0;
  double gamma = 1.0;
  bool operator==(const BudgetBounds&) const = default;
};

/// Relative slack when comparing ratios with the bounds. Reward shares are
/// summed in floating point, so a saturated PPS round can land a couple of ulp
/// above b/p.
inline constexpr double kRatioTolerance = 1e-12;

inline bool within_bounds(double ratio, const BudgetBounds& bounds) {
  const double lo = bounds.theta - kRatioTolerance * std::abs(bounds.theta);
  const double hi = bounds.gamma + kRatioTolerance * std::abs(bounds.gamma);
  return ratio >= lo && ratio <= hi;
}

struct BudgetAudit {
  std::size_t rounds = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double mean_ci = 0.0;
  std::size_t per_round_violations = 0;
  bool per_round_pass = false;  // every realization inside [theta, gamma]
  bool long_term_pass = false;  // the mean inside [theta, gamma]
};

inline BudgetAudit bb_audit(const SimulationLedger& ledger, const BudgetBounds& bounds) {
  if (ledger.rounds.empty()) throw DomainError("bb_audit: empty ledger");
  if (!(bounds.theta <= bounds.gamma)) throw DomainError("bb_audit: theta must not exceed gamma");
  BudgetAudit out;
  out.rounds = ledger.rounds.size();
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  std::vector<double> ratios;
  ratios.reserve(out.rounds);
  for (const auto& r : ledger.rounds) {
    ratios.push_back(r.budget_ratio);
    out.min_ratio = std::min(out.min_ratio, r.budget_ratio);
    out.max_ratio = std::max(out.max_ratio, r.budget_ratio);
    if (!within_bounds(r.budget_ratio, bounds)) ++out.per_round_violations;
  }
  const MeanCi stats = summarize(ratios);
  out.mean_ratio = stats.mean;
  out.mean_ci = stats.ci_half_width;
  out.per_round_pass = out.per_round_violations == 0;
  out.long_term_pass = within_bounds(out.mean_ratio, bounds);
  return out;
}

}  // namespace poolsim
