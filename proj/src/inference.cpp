#include "scrip/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scrip/steady_state.hpp"

namespace scrip {

namespace {

double log_add(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log sum_{l=0}^{i} lambda^l for i = 0..K.
std::vector<double> log_partial_sums(double lambda, std::size_t K) {
  const double ll = std::log(lambda);
  std::vector<double> s(K + 1);
  s[0] = 0.0;
  for (std::size_t i = 1; i <= K; ++i) s[i] = log_add(s[i - 1], static_cast<double>(i) * ll);
  return s;
}

void check_observed(const ObservedDistribution& d) {
  if (d.empty()) throw Error(ErrorCode::BadParameter, "empty distribution");
  double total = 0.0;
  for (double x : d) {
    if (!(x >= 0.0)) throw Error(ErrorCode::BadParameter, "distribution entries must be >= 0");
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::BadParameter, "distribution sums to " + std::to_string(total));
  if (!(d.back() > 0.0)) throw Error(ErrorCode::BadParameter, "d(K) must be positive");
}

double max_residual(const ObservedDistribution& d, const ObservedDistribution& r) {
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::fabs(d[i] - r[i]));
  return worst;
}

}  // namespace

std::vector<int> Explanation::support() const {
  std::vector<int> s;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] > 0.0) s.push_back(static_cast<int>(i));
  return s;
}

ObservedDistribution forward_distribution(double lambda, const std::vector<double>& f) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadParameter, "lambda must be positive");
  if (f.empty()) return {};
  const std::size_t K = f.size() - 1;
  const auto ls = log_partial_sums(lambda, K);
  const double ll = std::log(lambda);
  ObservedDistribution d(K + 1, 0.0);
  for (std::size_t i = 0; i <= K; ++i) {
    if (f[i] == 0.0) continue;
    for (std::size_t j = 0; j <= i; ++j) d[j] += f[i] * std::exp(static_cast<double>(j) * ll - ls[i]);
  }
  return d;
}

Explanation explanation_from_lambda(const ObservedDistribution& d, double lambda, double neg_tol) {
  check_observed(d);
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadParameter, "lambda must be positive");
  const std::size_t K = d.size() - 1;
  const auto ls = log_partial_sums(lambda, K);
  const double ll = std::log(lambda);
  Explanation e;
  e.lambda = lambda;
  e.f.assign(K + 1, 0.0);
  // With g_i = f_i / S_i, d(j) / lambda^j = sum_{i >= j} g_i, so each f_j
  // only needs d(j) and d(j+1).
  for (std::size_t j = K + 1; j-- > 0;) {
    const double next = j == K ? 0.0 : d[j + 1] / lambda;
    const double fj = (d[j] - next) * std::exp(ls[j] - static_cast<double>(j) * ll);
    if (fj < -neg_tol) throw NegativeFractionError(static_cast<int>(j), fj);
    e.f[j] = std::max(0.0, fj);
  }
  e.residual = max_residual(d, forward_distribution(lambda, e.f));
  return e;
}

double sufficient_lambda(const ObservedDistribution& d) {
  check_observed(d);
  for (std::size_t i = 0; i + 1 < d.size(); ++i)
    if (d[i] == 0.0 && d[i + 1] > 0.0)
      throw Error(ErrorCode::NoExplanation, "distribution has a gap at wealth " + std::to_string(i));
  double lambda = 1.0;
  for (int j = 0; j < 1000; ++j, lambda *= 2.0) {
    try {
      explanation_from_lambda(d, lambda);
      return lambda;
    } catch (const NegativeFractionError&) {
    }
  }
  throw Error(ErrorCode::NoExplanation, "no lambda up to 2^1000 explains the distribution");
}

namespace {

// Sorted log-ratios grouped into runs whose neighbours differ by <= tol.
std::vector<std::vector<double>> cluster(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<std::vector<double>> groups;
  for (double v : values) {
    if (groups.empty() || v - groups.back().back() > tol) groups.emplace_back();
    groups.back().push_back(v);
  }
  return groups;
}

std::vector<double> median3(const std::vector<double>& r) {
  std::vector<double> out = r;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    double w[3] = {r[i - 1], r[i], r[i + 1]};
    std::sort(w, w + 3);
    out[i] = w[1];
  }
  return out;
}

// f restricted to `support` at a fixed lambda; empty when a weight is negative.
std::vector<double> restricted_fractions(const ObservedDistribution& d, double lambda,
                                         const std::vector<std::size_t>& support,
                                         const std::vector<double>& ls, double neg_tol) {
  const std::size_t K = d.size() - 1;
  const double ll = std::log(lambda);
  std::vector<double> f(K + 1, 0.0);
  double total = 0.0;
  for (std::size_t j : support) {
    const double next = j == K ? 0.0 : d[j + 1] / lambda;
    const double fj = (d[j] - next) * std::exp(ls[j] - static_cast<double>(j) * ll);
    if (fj < -neg_tol) return {};
    f[j] = std::max(0.0, fj);
    total += f[j];
  }
  if (!(total > 0.0)) return {};
  for (double& x : f) x /= total;
  return f;
}

}  // namespace

Explanation minimal_explanation(const ObservedDistribution& d, const MinimalOptions& opts) {
  check_observed(d);
  const std::size_t K = d.size() - 1;
  for (double x : d)
    if (!(x > 0.0)) throw Error(ErrorCode::NoExplanation, "minimal explanation needs full support");
  if (K == 0) return Explanation{1.0, {1.0}, 0.0};

  std::vector<double> r(K);
  for (std::size_t j = 1; j <= K; ++j) r[j - 1] = std::log(d[j]) - std::log(d[j - 1]);
  const std::vector<double> detect = opts.smooth ? median3(r) : r;

  // Candidate slopes: the modal cluster and the steepest-rising cluster
  // (a valid lambda must dominate every ratio).
  const auto groups = cluster(detect, opts.slope_tol);
  std::vector<double> slopes;
  auto mean = [](const std::vector<double>& g) { return std::accumulate(g.begin(), g.end(), 0.0) / g.size(); };
  std::size_t modal = 0;
  for (std::size_t g = 1; g < groups.size(); ++g)
    if (groups[g].size() >= groups[modal].size()) modal = g;
  slopes.push_back(mean(groups[modal]));
  if (modal + 1 != groups.size()) slopes.push_back(mean(groups.back()));

  bool found = false;
  Explanation best;
  std::size_t best_size = K + 2;
  for (double log_lambda : slopes) {
    const double lambda = std::exp(log_lambda);
    const auto ls = log_partial_sums(lambda, K);
    std::vector<std::size_t> deviations;
    for (std::size_t j = 1; j <= K; ++j)
      if (std::fabs(detect[j - 1] - log_lambda) > opts.slope_tol) deviations.push_back(j - 1);

    // Exhaustive when few deviation points, otherwise only the full set.
    const std::size_t D = deviations.size();
    const bool exhaustive = D <= static_cast<std::size_t>(opts.max_subset_points);
    const std::size_t first_size = exhaustive ? 0 : D;
    for (std::size_t size = first_size; size <= D && size + 1 <= best_size; ++size) {
      std::vector<bool> pick(D, false);
      std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
      do {
        std::vector<std::size_t> support;
        for (std::size_t q = 0; q < D; ++q)
          if (pick[q]) support.push_back(deviations[q]);
        support.push_back(K);
        const auto f = restricted_fractions(d, lambda, support, ls, opts.residual_tol);
        if (f.empty()) continue;
        const double res = max_residual(d, forward_distribution(lambda, f));
        if (res > opts.residual_tol) continue;
        const std::size_t s = support.size();
        if (!found || s < best_size || (s == best_size && res < best.residual)) {
          found = true;
          best_size = s;
          best = Explanation{lambda, f, res};
        }
      } while (std::prev_permutation(pick.begin(), pick.end()));
      if (found && best_size == size + 1) break;
    }
  }
  if (!found) throw Error(ErrorCode::NoExplanation, "no candidate slope explains the distribution");
  return best;
}

std::vector<double> per_type_lambda(const WealthDistribution& dist, const std::vector<double>& omegas,
                                    double tol) {
  if (omegas.size() != dist.types())
    throw Error(ErrorCode::BadParameter, "one omega per type required");
  std::vector<double> out;
  for (std::size_t t = 0; t < dist.types(); ++t) {
    std::vector<double> ratios;
    const auto& row = dist.d[t];
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i] > 0.0 && row[i - 1] > 0.0) ratios.push_back(row[i] / row[i - 1]);
    if (ratios.empty()) throw Error(ErrorCode::BadParameter, "type " + std::to_string(t) + " has no ratios");
    std::sort(ratios.begin(), ratios.end());
    const std::size_t h = ratios.size() / 2;
    const double med = ratios.size() % 2 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
    out.push_back(med / omegas[t]);
  }
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double avg = std::accumulate(out.begin(), out.end(), 0.0) / out.size();
  if (*hi - *lo > tol * avg)
    throw Error(ErrorCode::InconsistentLambda, "per-type lambda estimates spread from " +
                                                   std::to_string(*lo) + " to " + std::to_string(*hi));
  return out;
}

CostInterval cost_bounds(int k, double gamma, const WalkParams& w) {
  if (k < 0) throw Error(ErrorCode::BadParameter, "threshold must be >= 0");
  return {gamma * discounted_absorption(k + 1, w), gamma * discounted_absorption(k, w)};
}

namespace {

// Rationals p_i / D sharing one denominator, summing exactly to `total`
// (largest remainder rounding).
std::vector<std::int64_t> common_numerators(const std::vector<double>& x, std::int64_t D, std::int64_t total) {
  std::vector<std::int64_t> p(x.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = x[i] * static_cast<double>(D);
    p[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(scaled)));
    used += p[i];
    rem.push_back({scaled - std::floor(scaled), i});
  }
  std::sort(rem.begin(), rem.end(), std::greater<>());
  for (std::size_t q = 0; used < total; ++q, ++used) ++p[rem[q % rem.size()].second];
  for (std::size_t q = rem.size(); used > total && q-- > 0;)
    if (p[rem[q].second] > 1) {
      --p[rem[q].second];
      --used;
    }
  return p;
}

}  // namespace

SynthesizedGame synthesize_game(const ObservedDistribution& d, const Explanation& e,
                                const SynthesisOptions& opts) {
  check_observed(d);
  const std::vector<int> support = e.support();
  if (support.empty()) throw Error(ErrorCode::BadParameter, "explanation has empty support");

  std::vector<double> f;
  for (int k : support) f.push_back(e.f[static_cast<std::size_t>(k)]);
  double m = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) m += static_cast<double>(i) * d[i];

  // Exact small denominators when they exist, otherwise a shared grid.
  std::vector<Rational> fr;
  std::int64_t h = 1;
  bool exact = true;
  for (double x : f) {
    fr.push_back(Rational::approximate(x, opts.max_den));
    if (std::fabs(fr.back().value() - x) > 1e-12) exact = false;
    h = std::lcm(h, fr.back().den);
    if (h > opts.max_den) exact = false;
  }
  Rational total(0);
  for (const Rational& r : fr) total = total + r;
  if (!(total == Rational(1))) exact = false;
  if (!exact) {
    h = opts.max_den;
    const auto p = common_numerators(f, h, h);
    for (std::size_t i = 0; i < f.size(); ++i) fr[i] = Rational(p[i], h);
  }
  // h also has to make m h an integer.
  const Rational money = Rational::approximate(m, opts.max_den);
  h = std::lcm(h, money.den);

  SynthesizedGame out;
  out.spec.h = h;
  out.spec.n = opts.n;
  out.spec.m = money;
  for (std::size_t i = 0; i < support.size(); ++i) {
    AgentType t;
    t.beta = t.chi = t.rho = 1.0;
    t.gamma = opts.gamma;
    t.delta = opts.delta;
    t.alpha = 0.5 * opts.gamma;  // placeholder until the walk is known
    out.spec.types.push_back({t, fr[i]});
    out.profile.push_back(support[i]);
  }
  const ValidatedSpec vs = validate_spec(out.spec);
  const SteadyState ss = steady_state(vs, out.profile);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const WalkParams w = transition_probs(vs, out.profile, ss.dist, i);
    const CostInterval c = cost_bounds(support[i], opts.gamma, w);
    if (!(c.lo < c.hi)) throw Error(ErrorCode::BadParameter, "degenerate cost interval");
    out.spec.types[i].type.alpha = c.midpoint();
  }
  return out;
}

}  // namespace scrip
