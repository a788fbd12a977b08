#include "scrip/perturbations.hpp"

#include <cmath>
#include <numeric>

#include "scrip/steady_state.hpp"

namespace scrip {

WalkParams altruist_adjusted_walk(const WalkParams& w, double a) {
  if (!(a >= 0.0 && a < 1.0)) throw Error(ErrorCode::BadParameter, "altruist fraction must lie in [0,1)");
  WalkParams out = w;
  out.p_up = (1.0 - a) * w.p_up;
  out.p_down = (1.0 - a) * w.p_down;
  return out;
}

double altruist_welfare(const ValidatedSpec& spec, const ThresholdProfile& k, double a) {
  if (spec.size() != 1 || !spec.type(0).behavior.is_standard())
    throw Error(ErrorCode::BadParameter, "altruist welfare law needs a single standard type");
  if (!(a >= 0.0 && a < 1.0)) throw Error(ErrorCode::BadParameter, "altruist fraction must lie in [0,1)");
  const AgentType& t = spec.type(0);
  if (k.at(0) == 0)
    throw Error(ErrorCode::CrashedEconomy, "trivial profile: only altruists serve, welfare " +
                                               std::to_string(a * t.gamma));
  const double zeta = steady_state(spec, k).zeta;
  return a * t.gamma + (1.0 - a) * (1.0 - zeta) * (t.gamma - t.alpha);
}

std::int64_t min_altruists(const std::vector<AgentType>& standard, double beta_altruist, std::int64_t h) {
  if (!(beta_altruist > 0.0 && beta_altruist < 1.0))
    throw Error(ErrorCode::BadParameter, "altruist ability must lie in (0,1)");
  if (h <= 0) throw Error(ErrorCode::BadParameter, "h must be positive");
  const double q = 1.0 - beta_altruist;
  std::int64_t need = 1;
  for (const AgentType& t : standard) {
    const double c = t.rho / static_cast<double>(h) * t.gamma;
    auto ok = [&](std::int64_t a) { return c * std::pow(q, static_cast<double>(a)) < t.alpha; };
    std::int64_t a = 1;
    if (!ok(1)) {
      a = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log(t.alpha / c) / std::log(q))));
      while (a > 1 && ok(a - 1)) --a;
      while (!ok(a)) ++a;
    }
    need = std::max(need, a);
  }
  return need;
}

namespace {

std::int64_t integralizing_h(const std::vector<TypeEntry>& types, std::int64_t h, std::int64_t cap) {
  std::int64_t out = h;
  for (const TypeEntry& e : types) {
    out = std::lcm(out, e.fraction.den);
    if (out > cap)
      throw Error(ErrorCode::NonIntegralPopulation,
                  "no base population up to " + std::to_string(cap) + " makes every type integral");
  }
  return out;
}

// Each type keeps a (1 - p) share unchanged and moves a p share to altered(type).
template <class Alter>
ValidatedSpec split_types(const ValidatedSpec& spec, Rational p, std::int64_t h_cap, Alter altered) {
  if (p.num < 0 || !(p < Rational(1))) throw Error(ErrorCode::BadParameter, "split fraction must lie in [0,1)");
  GameSpec g = spec.spec();
  if (p.num == 0) return spec;
  std::vector<TypeEntry> types;
  for (const TypeEntry& e : g.types) {
    types.push_back({e.type, (Rational(1) - p) * e.fraction});
    types.push_back({altered(e.type), p * e.fraction});
  }
  g.h = integralizing_h(types, g.h, h_cap);
  g.types = std::move(types);
  return validate_spec(g);
}

}  // namespace

ValidatedSpec hoarder_spec(const ValidatedSpec& spec, Rational f_h, std::int64_t h_cap) {
  return split_types(spec, f_h, h_cap, [](AgentType t) {
    t.behavior = Behavior::hoarder();
    return t;
  });
}

ValidatedSpec sybil_spec(const ValidatedSpec& spec, int s, Rational p, std::int64_t h_cap) {
  if (s < 0) throw Error(ErrorCode::BadParameter, "sybil count must be >= 0");
  return split_types(spec, p, h_cap, [s](AgentType t) {
    t.chi *= 1.0 + s;
    return t;
  });
}

double satisfaction_rate(double R, int k) {
  if (R < 0.0 || k < 0) throw Error(ErrorCode::BadParameter, "satisfaction rate needs R >= 0, k >= 0");
  if (k == 0 || R == 0.0) return 0.0;
  if (std::fabs(R - 1.0) < 1e-9) return static_cast<double>(k) / (k + 1.0);
  if (R < 1.0) return (R - std::pow(R, k + 1)) / (1.0 - std::pow(R, k + 1));
  // Divide through by R^{k+1} so large R cannot overflow.
  const double inv = 1.0 / R;
  return (std::pow(inv, k) - 1.0) / (std::pow(inv, k + 1) - 1.0);
}

EquivalentMoney equivalent_money_supply(const ValidatedSpec& spec, const ThresholdProfile& k,
                                        std::int64_t max_den) {
  if (spec.size() != 2) throw Error(ErrorCode::BadParameter, "equivalent money needs exactly two types");
  AgentType t = spec.type(0), s = spec.type(1);
  if (!(t.chi <= s.chi)) throw Error(ErrorCode::BadParameter, "type 1 must carry the larger chi");
  AgentType s_as_t = s;
  s_as_t.chi = t.chi;
  if (!(s_as_t == t)) throw Error(ErrorCode::BadParameter, "types must differ only in chi");

  const SteadyState ss = steady_state(spec, k);
  EquivalentMoney out;
  out.p_up_target = transition_probs(spec, k, ss.dist, 1).p_up;
  if (!(out.p_up_target > 0.0) || !std::isfinite(out.p_up_target))
    throw Error(ErrorCode::BadBracket, "target p_u outside the reachable range");

  const int ks = k[1];
  if (ks <= 0) throw Error(ErrorCode::BadBracket, "sybiled type plays a trivial threshold");
  t.rho = 1.0;
  GameSpec single;
  single.types = {{t, Rational(1)}};
  single.h = spec.h();
  single.n = spec.n();
  single.m = Rational(0);
  single.hoard_cap = spec.hoard_cap();
  const ValidatedSpec base = validate_spec(single);
  const ThresholdProfile kk{ks};

  auto p_up_at = [&](double lambda) {
    return transition_probs(base, kk, wealth_distribution(base, kk, lambda), 0).p_up;
  };
  // p_u rises with lambda, and m' = mean_wealth rises with lambda.
  double lo = std::log(1e-12), hi = std::log(1e12);
  if (p_up_at(std::exp(lo)) > out.p_up_target || p_up_at(std::exp(hi)) < out.p_up_target)
    throw Error(ErrorCode::BadBracket, "target p_u not bracketed");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p_up_at(std::exp(mid)) < out.p_up_target) lo = mid;
    else hi = mid;
  }
  out.m_continuous = mean_wealth(base, kk, std::exp(0.5 * (lo + hi)));
  out.m = Rational::approximate(out.m_continuous, max_den);
  out.n = out.m.den * spec.n();

  single.m = out.m;
  single.h = spec.h() * out.m.den;
  out.game = validate_spec(single);
  const double lam = solve_lambda(out.game, kk);
  out.p_up_gap = std::fabs(p_up_at(lam) - out.p_up_target);
  return out;
}

}  // namespace scrip
