#pragma once

#include <cstdint>
#include <vector>

#include "scrip/mdp.hpp"
#include "scrip/model.hpp"

namespace scrip {

/// d(i): fraction of agents holding i dollars, i = 0..K.
using ObservedDistribution = std::vector<double>;

/// (lambda, f) with f_i the fraction of agents playing threshold i.
struct Explanation {
  double lambda = 1.0;
  std::vector<double> f;
  double residual = 0.0;  // max_i |d(i) - reconstructed d(i)|

  /// Thresholds with f_i > 0.
  std::vector<int> support() const;
};

/// d(j) = sum_{i >= j} f_i lambda^j / sum_{l <= i} lambda^l.
ObservedDistribution forward_distribution(double lambda, const std::vector<double>& f);

/// Top-down construction of f from d at a fixed lambda. Entries below
/// -neg_tol throw NegativeFractionError; smaller negatives are clamped to 0.
Explanation explanation_from_lambda(const ObservedDistribution& d, double lambda, double neg_tol = 1e-12);

/// Smallest lambda = 2^j (j >= 0) that yields a valid explanation. Not minimal
/// beyond that grid.
double sufficient_lambda(const ObservedDistribution& d);

struct MinimalOptions {
  double slope_tol = 1e-6;     // relative deviation of a log-ratio from the common slope
  double residual_tol = 1e-6;  // accepted max reconstruction error
  bool smooth = false;         // median-of-3 on log-ratios before breakpoint detection
  int max_subset_points = 16;  // exhaustive search cap
};

/// Explanation of least support, built from the common log-slope of d.
/// Throws NoExplanation when no candidate fits.
Explanation minimal_explanation(const ObservedDistribution& d, const MinimalOptions& opts = {});

/// Per-type lambda estimates median_i(d(t,i)/d(t,i-1)) / omega_t. Throws
/// InconsistentLambda when they spread by more than tol relative to their mean.
std::vector<double> per_type_lambda(const WealthDistribution& dist, const std::vector<double>& omegas,
                                    double tol);

/// Interval (lo, hi] of costs alpha under which threshold k is a best reply.
struct CostInterval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};
CostInterval cost_bounds(int k, double gamma, const WalkParams& w);

struct SynthesisOptions {
  double gamma = 1.0;
  double delta = 0.95;
  std::int64_t n = 100;
  std::int64_t max_den = 10000;
};

struct SynthesizedGame {
  GameSpec spec;
  ThresholdProfile profile;
};

/// A game with one omega = 1 type per supported threshold whose equilibrium
/// distribution is d; each alpha sits mid-interval of its cost bounds.
SynthesizedGame synthesize_game(const ObservedDistribution& d, const Explanation& e,
                                const SynthesisOptions& opts = {});

}  // namespace scrip
