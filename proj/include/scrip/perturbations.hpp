#pragma once

#include <cstdint>
#include <vector>

#include "scrip/equilibrium.hpp"
#include "scrip/mdp.hpp"
#include "scrip/model.hpp"

namespace scrip {

/// Altruists satisfy a fraction a of requests for free: both walk
/// probabilities shrink by (1 - a), their ratio does not change.
WalkParams altruist_adjusted_walk(const WalkParams& w, double a);

/// a*gamma + (1-a)(1-zeta(a))(gamma-alpha) for a single standard type
/// playing threshold k. Throws CrashedEconomy when k is 0.
double altruist_welfare(const ValidatedSpec& spec, const ThresholdProfile& k, double a);

/// Smallest a >= 1 with (rho_t/h) gamma_t (1 - beta_a)^a < alpha_t for every type,
/// the point past which never volunteering dominates.
std::int64_t min_altruists(const std::vector<AgentType>& standard, double beta_altruist, std::int64_t h);

/// Splits every type into a standard part (1 - f_h) f_t and a hoarder part f_h f_t,
/// growing h to the smallest multiple that keeps populations integral.
/// delta is kept: the per-round discount already scales with h n.
ValidatedSpec hoarder_spec(const ValidatedSpec& spec, Rational f_h, std::int64_t h_cap = 1'000'000);

/// Splits every type so that a fraction p of its agents carries s sybils
/// (selection weight (1 + s) chi).
ValidatedSpec sybil_spec(const ValidatedSpec& spec, int s, Rational p, std::int64_t h_cap = 1'000'000);

/// Long-run fraction of requests satisfied for an agent with walk ratio R and threshold k.
double satisfaction_rate(double R, int k);

struct EquivalentMoney {
  double m_continuous = 0.0;
  Rational m;            // rationalized m'
  std::int64_t n = 1;    // n' = b n for m' = a/b
  double p_up_target = 0.0;
  double p_up_gap = 0.0; // |p_u(m') - target| at the rationalized m'
  ValidatedSpec game;    // single-type game; h' = b h stands in for n' = b n (same h n)
};

/// For a game whose types t (index 0) and s (index 1) differ only in chi, finds
/// the single-type game of t with threshold k_s whose p_u equals type s's p_u.
EquivalentMoney equivalent_money_supply(const ValidatedSpec& spec, const ThresholdProfile& k,
                                        std::int64_t max_den = 1'000'000);

}  // namespace scrip
