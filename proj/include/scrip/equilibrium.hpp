#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scrip/mdp.hpp"
#include "scrip/model.hpp"
#include "scrip/steady_state.hpp"

namespace scrip {

struct EquilibriumOptions {
  int k_max = 1024;
  long iteration_cap = 10000;
  // Fraction of requests satisfied for free by altruists; scales p_u and p_d by (1 - a).
  double altruist_fraction = 0.0;
};

// On a crash lambda is 0, zeta 1, dist empty, and welfare only counts free service.
struct EquilibriumReport {
  ThresholdProfile profile;
  double lambda = 0.0;
  WealthDistribution dist;
  double zeta = 1.0;
  double welfare = 0.0;
  bool crashed = false;
  std::vector<ThresholdProfile> trace;
};

/// Walk parameters seen by type t under profile k, after the altruist scaling.
WalkParams walk_for(const ValidatedSpec& spec, const ThresholdProfile& k, const SteadyState& ss,
                    std::size_t t, const EquilibriumOptions& opts);

/// One Jacobi step of best-reply dynamics. Nonstandard types keep their
/// fixed strategies; standard types reply 0 when money is infeasible.
ThresholdProfile best_reply_profile(const ValidatedSpec& spec, const ThresholdProfile& k,
                                    const EquilibriumOptions& opts = {});

/// Iterates best replies from the top profile down to the greatest equilibrium.
EquilibriumReport greatest_equilibrium(const ValidatedSpec& spec, const EquilibriumOptions& opts = {});

/// True when every threshold-playing (standard or fixed) type plays 0.
bool is_trivial(const ValidatedSpec& spec, const ThresholdProfile& k);

struct CrashBracket {
  Rational last_nontrivial;
  Rational first_trivial;
};

/// Bisection over the grid m_lo + j*step for the crash point.
/// step defaults to 1/h. Throws BadBracket unless m_lo is nontrivial and m_hi trivial.
CrashBracket critical_money(const ValidatedSpec& spec, Rational m_lo, Rational m_hi,
                            std::optional<Rational> step = std::nullopt,
                            const EquilibriumOptions& opts = {});

/// lo, lo+step, ..., up to and including hi when it lies on the grid.
std::vector<Rational> money_grid(Rational lo, Rational step, Rational hi);

struct SweepRow {
  Rational m;
  EquilibriumReport report;
  std::string error;  // nonempty when the point failed numerically
};

/// One greatest equilibrium per grid point, evaluated in parallel (jobs <= 0: all cores).
std::vector<SweepRow> welfare_sweep(const ValidatedSpec& spec, const std::vector<Rational>& grid,
                                    const EquilibriumOptions& opts = {}, int jobs = 0);

/// Serial reference for welfare_sweep.
std::vector<SweepRow> welfare_sweep_serial(const ValidatedSpec& spec, const std::vector<Rational>& grid,
                                           const EquilibriumOptions& opts = {});

/// CSV header `m,k_0,...,k_T,lambda,zeta,welfare,crashed`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::size_t types);

}  // namespace scrip
