#include "scrip/equilibrium.hpp"

#include <cmath>
#include <iomanip>

#include <omp.h>

namespace scrip {

WalkParams walk_for(const ValidatedSpec& spec, const ThresholdProfile& k, const SteadyState& ss,
                    std::size_t t, const EquilibriumOptions& opts) {
  WalkParams w = transition_probs(spec, k, ss.dist, t);
  const double keep = 1.0 - opts.altruist_fraction;
  w.p_up *= keep;
  w.p_down *= keep;
  return w;
}

bool is_trivial(const ValidatedSpec& spec, const ThresholdProfile& k) {
  for (std::size_t t = 0; t < spec.size(); ++t)
    if (!spec.type(t).behavior.always_volunteers() && k[t] != 0) return false;
  return true;
}

ThresholdProfile best_reply_profile(const ValidatedSpec& spec, const ThresholdProfile& k,
                                    const EquilibriumOptions& opts) {
  if (opts.altruist_fraction < 0.0 || opts.altruist_fraction >= 1.0)
    throw Error(ErrorCode::BadParameter, "altruist fraction must lie in [0,1)");
  ThresholdProfile out = initial_profile(spec, 0);
  SteadyState ss;
  try {
    ss = steady_state(spec, k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleMoney) throw;
    return out;
  }
  for (std::size_t t = 0; t < spec.size(); ++t) {
    if (!spec.type(t).behavior.is_standard()) continue;
    const WalkParams w = walk_for(spec, k, ss, t, opts);
    try {
      out[t] = best_reply_threshold(spec.type(t), w, opts.k_max);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnboundedThreshold) throw;
      out[t] = opts.k_max;
    }
  }
  return out;
}

namespace {

double free_service_gain(const ValidatedSpec& spec) {
  double g = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t) g += spec.type(t).rho * spec.fraction(t) * spec.type(t).gamma;
  return g;
}

void mark_crashed(const ValidatedSpec& spec, const EquilibriumOptions& opts, EquilibriumReport& r) {
  r.crashed = true;
  r.lambda = 0.0;
  r.zeta = 1.0;
  r.dist = {};
  r.welfare = opts.altruist_fraction * free_service_gain(spec);
}

}  // namespace

EquilibriumReport greatest_equilibrium(const ValidatedSpec& spec, const EquilibriumOptions& opts) {
  EquilibriumReport r;
  ThresholdProfile k = initial_profile(spec, opts.k_max);
  r.trace.push_back(k);
  long it = 0;
  for (;; ++it) {
    if (it >= opts.iteration_cap)
      throw Error(ErrorCode::IterationCap, "best-reply dynamics exceeded " +
                                               std::to_string(opts.iteration_cap) + " iterations");
    ThresholdProfile next = best_reply_profile(spec, k, opts);
    if (next == k) break;
    k = std::move(next);
    r.trace.push_back(k);
  }
  r.profile = k;
  if (is_trivial(spec, k)) {
    mark_crashed(spec, opts, r);
    return r;
  }
  SteadyState ss;
  try {
    ss = steady_state(spec, k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleMoney) throw;
    mark_crashed(spec, opts, r);
    return r;
  }
  r.lambda = ss.lambda;
  r.zeta = ss.zeta;
  r.dist = std::move(ss.dist);
  const double a = opts.altruist_fraction;
  r.welfare = a * free_service_gain(spec) + (1.0 - a) * ss.welfare_per_round;
  return r;
}

std::vector<Rational> money_grid(Rational lo, Rational step, Rational hi) {
  if (!(Rational(0) < step)) throw Error(ErrorCode::BadParameter, "grid step must be positive");
  std::vector<Rational> grid;
  for (Rational m = lo; m <= hi; m = m + step) grid.push_back(m);
  return grid;
}

CrashBracket critical_money(const ValidatedSpec& spec, Rational m_lo, Rational m_hi,
                            std::optional<Rational> step, const EquilibriumOptions& opts) {
  const Rational dm = step.value_or(Rational(1, spec.h()));
  if (!(m_lo < m_hi)) throw Error(ErrorCode::BadBracket, "empty money bracket");
  std::vector<Rational> grid = money_grid(m_lo, dm, m_hi);
  if (!(grid.back() == m_hi)) grid.push_back(m_hi);

  auto crashed_at = [&](const Rational& m) {
    return greatest_equilibrium(spec.with_money(m), opts).crashed;
  };
  if (crashed_at(grid.front()))
    throw Error(ErrorCode::BadBracket, "economy already crashed at m = " + m_lo.str());
  if (!crashed_at(grid.back()))
    throw Error(ErrorCode::BadBracket, "economy not crashed at m = " + m_hi.str());

  std::size_t lo = 0, hi = grid.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (crashed_at(grid[mid])) hi = mid;
    else lo = mid;
  }
  return {grid[lo], grid[hi]};
}

namespace {

SweepRow sweep_point(const ValidatedSpec& spec, const Rational& m, const EquilibriumOptions& opts) {
  SweepRow row;
  row.m = m;
  try {
    row.report = greatest_equilibrium(spec.with_money(m), opts);
  } catch (const Error& e) {
    if (classify(e.code()) != ErrorClass::Numeric) throw;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> welfare_sweep_serial(const ValidatedSpec& spec, const std::vector<Rational>& grid,
                                           const EquilibriumOptions& opts) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const Rational& m : grid) rows.push_back(sweep_point(spec, m, opts));
  return rows;
}

std::vector<SweepRow> welfare_sweep(const ValidatedSpec& spec, const std::vector<Rational>& grid,
                                    const EquilibriumOptions& opts, int jobs) {
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const long count = static_cast<long>(grid.size());
  std::vector<SweepRow> rows(grid.size());
  // Config errors must not escape an OpenMP region; collect the first and rethrow.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < count; ++i) {
    try {
      rows[i] = sweep_point(spec, grid[i], opts);
    } catch (...) {
#pragma omp critical(sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::size_t types) {
  out << "m";
  for (std::size_t t = 0; t < types; ++t) out << ",k_" << t;
  out << ",lambda,zeta,welfare,crashed\n";
  out << std::setprecision(12);
  for (const SweepRow& row : rows) {
    out << row.m.value();
    if (!row.error.empty()) {
      for (std::size_t t = 0; t < types; ++t) out << ",";
      out << ",nan,nan,nan,error\n";
      continue;
    }
    for (int k : row.report.profile) out << ',' << k;
    out << ',' << row.report.lambda << ',' << row.report.zeta << ',' << row.report.welfare << ','
        << (row.report.crashed ? 1 : 0) << '\n';
  }
}

}  // namespace scrip
