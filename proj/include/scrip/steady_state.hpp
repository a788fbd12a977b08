#pragma once

#include <ostream>
#include <vector>

#include "scrip/model.hpp"

namespace scrip {

struct SteadyState {
  double lambda = 0.0;
  WealthDistribution dist;
  double zeta = 0.0;
  double welfare_per_round = 0.0;
  // upsilon_t = beta_t (f_t - d(t, k_t)) h n: expected able-and-willing agents of type t.
  std::vector<double> volunteer_mass;
};

/// Mean wealth of the steady state at a given lambda (strictly increasing in lambda).
double mean_wealth(const ValidatedSpec& spec, const ThresholdProfile& k, double lambda);

/// Root of mean_wealth(lambda) = m by bisection in log-space.
/// Throws InfeasibleMoney when m is not strictly inside (0, sum_t f_t k_t).
double solve_lambda(const ValidatedSpec& spec, const ThresholdProfile& k);

/// d(t,i) = f_t (lambda w_t)^i / sum_j (lambda w_t)^j, truncated at k_t.
WealthDistribution wealth_distribution(const ValidatedSpec& spec, const ThresholdProfile& k,
                                       double lambda);

std::vector<double> volunteer_mass(const ValidatedSpec& spec, const ThresholdProfile& k,
                                   const WealthDistribution& dist);

/// Expected per-round gain in social welfare. Throws DegenerateVolunteers
/// when no one can volunteer.
double expected_welfare(const ValidatedSpec& spec, const ThresholdProfile& k,
                        const WealthDistribution& dist);

/// Same as expected_welfare, restricted to standard agents (requests made by
/// standard agents, costs borne by standard satisfiers).
double standard_welfare(const ValidatedSpec& spec, const ThresholdProfile& k,
                        const WealthDistribution& dist);

/// Full steady state; welfare is 0 (not an error) when nobody volunteers.
SteadyState steady_state(const ValidatedSpec& spec, const ThresholdProfile& k);

/// CSV with header `type_index,wealth,fraction`.
void write_distribution_csv(std::ostream& out, const WealthDistribution& dist);

}  // namespace scrip
