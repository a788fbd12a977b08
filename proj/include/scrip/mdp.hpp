#pragma once

#include <vector>

#include "scrip/model.hpp"

namespace scrip {

/// The single-agent random walk on wealth seen by one agent when everyone
/// else plays a fixed threshold profile at the mean-field steady state.
struct WalkParams {
  double p_up = 0.0;    // per-round probability of earning a dollar when willing
  double p_down = 0.0;  // per-round probability of being the requester
  double decay = 0.0;   // 1 - per-round discount factor, kept separately for precision

  double discount() const { return 1.0 - decay; }
  double ratio() const { return p_up / p_down; }
};

/// Per-round decay (1 - delta_t) / (h n): delta is the discount per expected request.
double round_decay(const AgentType& type, const ValidatedSpec& spec);

/// p_u and p_d for type t at the steady state `dist` of profile k.
/// Throws DegenerateVolunteers when no one volunteers but some requester can pay.
WalkParams transition_probs(const ValidatedSpec& spec, const ThresholdProfile& k,
                            const WealthDistribution& dist, std::size_t t);

/// E[discount^J] where J is the first time the reflected walk on {0..kappa},
/// started at kappa, hits 0. Solved as a tridiagonal system.
double discounted_absorption(int kappa, const WalkParams& w);

/// Largest kappa <= k_max with alpha <= gamma * discounted_absorption(kappa).
/// Throws UnboundedThreshold when the condition still holds at k_max.
int best_reply_threshold(const AgentType& type, const WalkParams& w, int k_max);

struct OraclePolicy {
  std::vector<bool> volunteer;  // per wealth level 0..state_cap
  long iterations = 0;

  /// First wealth level at which the policy stops volunteering; -1 when the
  /// policy is not of threshold form.
  int threshold() const;
};

/// Value iteration on the single-agent MDP, stopped when the span seminorm of
/// successive differences falls below `tol`. Test oracle only.
OraclePolicy value_iteration_oracle(const AgentType& type, const WalkParams& w, int state_cap,
                                    double tol = 1e-12, long max_iterations = 50'000'000);

}  // namespace scrip
