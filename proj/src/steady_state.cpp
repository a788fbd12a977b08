#include "scrip/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace scrip {

namespace {

// Unnormalized weights (lambda w)^i for i = 0..k, scaled so the largest is 1.
void geometric_weights(double ratio, int k, std::vector<double>& w) {
  w.assign(static_cast<std::size_t>(k) + 1, 0.0);
  if (ratio <= 1.0) {
    double x = 1.0;
    for (int i = 0; i <= k; ++i) {
      w[i] = x;
      x *= ratio;
    }
  } else {
    const double inv = 1.0 / ratio;
    double x = 1.0;
    for (int i = k; i >= 0; --i) {
      w[i] = x;
      x *= inv;
    }
  }
}

double type_mean(double ratio, int k) {
  if (k <= 0) return 0.0;
  double num = 0.0, den = 0.0;
  if (ratio <= 1.0) {
    double x = 1.0;
    for (int i = 0; i <= k; ++i) {
      num += i * x;
      den += x;
      x *= ratio;
      if (x == 0.0) break;
    }
  } else {
    const double inv = 1.0 / ratio;
    double x = 1.0;
    for (int i = k; i >= 0; --i) {
      num += i * x;
      den += x;
      x *= inv;
      if (x == 0.0) break;
    }
  }
  return num / den;
}

double supremum_money(const ValidatedSpec& spec, const ThresholdProfile& k) {
  double s = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t) s += spec.fraction(t) * k[t];
  return s;
}

void check_profile(const ValidatedSpec& spec, const ThresholdProfile& k) {
  if (k.size() != spec.size())
    throw Error(ErrorCode::BadParameter, "threshold profile has " + std::to_string(k.size()) +
                                             " entries for " + std::to_string(spec.size()) + " types");
  for (int kt : k)
    if (kt < 0) throw Error(ErrorCode::BadParameter, "negative threshold");
}

}  // namespace

double mean_wealth(const ValidatedSpec& spec, const ThresholdProfile& k, double lambda) {
  double s = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t)
    s += spec.fraction(t) * type_mean(lambda * spec.type(t).omega(), k[t]);
  return s;
}

double solve_lambda(const ValidatedSpec& spec, const ThresholdProfile& k) {
  check_profile(spec, k);
  const double m = spec.m();
  const double sup = supremum_money(spec, k);
  if (!(m > 0.0) || m >= sup)
    throw Error(ErrorCode::InfeasibleMoney,
                "average money " + std::to_string(m) + " outside (0, " + std::to_string(sup) + ")");

  double lo = std::log(1e-12), hi = std::log(1e12);
  while (mean_wealth(spec, k, std::exp(lo)) > m && lo > -700.0) lo -= 27.6;
  while (mean_wealth(spec, k, std::exp(hi)) < m && hi < 700.0) hi += 27.6;

  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_wealth(spec, k, std::exp(mid)) < m) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

WealthDistribution wealth_distribution(const ValidatedSpec& spec, const ThresholdProfile& k,
                                       double lambda) {
  check_profile(spec, k);
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadParameter, "lambda must be positive");
  WealthDistribution out;
  out.d.resize(spec.size());
  std::vector<double> w;
  for (std::size_t t = 0; t < spec.size(); ++t) {
    geometric_weights(lambda * spec.type(t).omega(), k[t], w);
    double total = 0.0;
    for (double x : w) total += x;
    const double f = spec.fraction(t);
    out.d[t].resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out.d[t][i] = f * w[i] / total;
  }
  return out;
}

std::vector<double> volunteer_mass(const ValidatedSpec& spec, const ThresholdProfile& k,
                                   const WealthDistribution& dist) {
  std::vector<double> u(spec.size());
  const double agents = static_cast<double>(spec.agents());
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const double at_threshold = dist.d[t][static_cast<std::size_t>(k[t])];
    u[t] = spec.type(t).beta * std::max(0.0, spec.fraction(t) - at_threshold) * agents;
  }
  return u;
}

namespace {

double welfare_impl(const ValidatedSpec& spec, const ThresholdProfile& k,
                    const WealthDistribution& dist, bool standard_only) {
  const auto ups = volunteer_mass(spec, k, dist);
  double weight_total = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t) weight_total += spec.type(t).chi * ups[t];
  if (!(weight_total > 0.0))
    throw Error(ErrorCode::DegenerateVolunteers, "no agent is willing to volunteer");

  double paying = 0.0, gain = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const double requests = spec.type(t).rho * (spec.fraction(t) - dist.d[t][0]);
    paying += requests;
    if (!standard_only || spec.type(t).behavior.is_standard()) gain += requests * spec.type(t).gamma;
  }
  double cost = 0.0;
  for (std::size_t t = 0; t < spec.size(); ++t) {
    if (standard_only && !spec.type(t).behavior.is_standard()) continue;
    cost += spec.type(t).chi * ups[t] / weight_total * spec.type(t).alpha;
  }
  return gain - paying * cost;
}

}  // namespace

double expected_welfare(const ValidatedSpec& spec, const ThresholdProfile& k,
                        const WealthDistribution& dist) {
  return welfare_impl(spec, k, dist, false);
}

double standard_welfare(const ValidatedSpec& spec, const ThresholdProfile& k,
                        const WealthDistribution& dist) {
  return welfare_impl(spec, k, dist, true);
}

SteadyState steady_state(const ValidatedSpec& spec, const ThresholdProfile& k) {
  SteadyState ss;
  ss.lambda = solve_lambda(spec, k);
  ss.dist = wealth_distribution(spec, k, ss.lambda);
  ss.zeta = ss.dist.zeta();
  ss.volunteer_mass = volunteer_mass(spec, k, ss.dist);
  try {
    ss.welfare_per_round = expected_welfare(spec, k, ss.dist);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVolunteers) throw;
    ss.welfare_per_round = 0.0;
  }
  return ss;
}

void write_distribution_csv(std::ostream& out, const WealthDistribution& dist) {
  out << "type_index,wealth,fraction\n";
  out << std::setprecision(12);
  for (std::size_t t = 0; t < dist.types(); ++t)
    for (std::size_t i = 0; i < dist.d[t].size(); ++i)
      out << t << ',' << i << ',' << dist.d[t][i] << '\n';
}

}  // namespace scrip
