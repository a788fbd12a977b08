// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "scrip/equilibrium.hpp"
#include "scrip/inference.hpp"
#include "scrip/perturbations.hpp"
#include "scrip/simulator.hpp"
#include "scrip/steady_state.hpp"

using namespace scrip;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

AgentType agent(double alpha, double beta = 1.0, double delta = 0.95) {
  AgentType t;
  t.alpha = alpha;
  t.beta = beta;
  t.gamma = 1.0;
  t.delta = delta;
  return t;
}

ValidatedSpec from_config(const std::string& name) {
  return validate_spec(load_game_spec(oracle::config_path(name)));
}

ValidatedSpec single(const AgentType& t, Rational m, std::int64_t h, std::int64_t n) {
  GameSpec g;
  g.types = {{t, Rational(1)}};
  g.h = h;
  g.n = n;
  g.m = m;
  return validate_spec(g);
}

// 1. The two-type game reaches (20, 13).
void equilibrium_reproduction(Verdict& v) {
  const auto spec = from_config("sec6.json");
  const auto t0 = Clock::now();
  const auto r = greatest_equilibrium(spec);
  const double secs = seconds_since(t0);
  v.detail << "profile (" << r.profile[0] << "," << r.profile[1] << "), lambda " << r.lambda << ", " << secs
           << " s";
  v.require(!r.crashed, "not crashed");
  v.require(std::abs(r.profile[0] - 20) <= 1 && std::abs(r.profile[1] - 13) <= 1, "profile within 1 of (20,13)");
  v.require(secs < 10.0, "runtime < 10 s");
}

// 2. Log-linear structure with a single break at 13.
void log_linear_structure(Verdict& v) {
  const auto r = greatest_equilibrium(from_config("sec6.json"));
  const auto d = r.dist.marginal();
  int breaks = 0, break_at = -1;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    if (std::fabs(d[i + 1] / d[i] / r.lambda - 1.0) > 1e-9) {
      ++breaks;
      break_at = static_cast<int>(i);
    }
  }
  const auto e = minimal_explanation(d);
  const auto sup = e.support();
  v.detail << breaks << " break(s) at " << break_at << ", support {";
  for (std::size_t i = 0; i < sup.size(); ++i) v.detail << (i ? "," : "") << sup[i];
  v.detail << "}, f = (" << (e.f.size() > 13 ? e.f[13] : 0.0) << ", " << (e.f.size() > 20 ? e.f[20] : 0.0) << ")";
  v.require(breaks == 1 && break_at == 13, "one break, at wealth 13");
  v.require(sup == std::vector<int>{13, 20}, "support {13,20}");
  v.require(sup.size() == 2 && std::fabs(e.f[13] - 0.7) <= 0.02 && std::fabs(e.f[20] - 0.3) <= 0.02,
            "f within 0.02 of (.7,.3)");
}

// 3. Welfare rises with m, then the economy crashes and stays crashed.
void crash_monotonicity(Verdict& v) {
  const auto spec = from_config("crashgame.json");
  const auto t0 = Clock::now();
  const auto rows = welfare_sweep(spec, money_grid(Rational(1), Rational(1, 2), Rational(12)));
  const double secs = seconds_since(t0);
  // Regression fixture: first zero-welfare point on this grid.
  const Rational expected_m_star(7);
  bool monotone = true, stays_zero = true, errors = false;
  std::optional<Rational> m_star;
  double prev = -1.0, peak = 0.0;
  for (const auto& row : rows) {
    errors = errors || !row.error.empty();
    const double w = row.report.welfare;
    if (m_star) {
      stays_zero = stays_zero && w == 0.0 && row.report.crashed;
      continue;
    }
    if (row.report.crashed) {
      m_star = row.m;
      stays_zero = stays_zero && w == 0.0;
      continue;
    }
    monotone = monotone && w >= prev - 1e-9;
    prev = w;
    peak = std::max(peak, w);
  }
  v.detail << "peak welfare " << peak << ", m* = " << (m_star ? m_star->str() : "none") << ", " << secs << " s";
  v.require(!errors, "no numeric failures");
  v.require(monotone, "non-decreasing before m*");
  v.require(m_star.has_value(), "finite m*");
  v.require(stays_zero, "zero from m* on");
  v.require(m_star && *m_star == expected_m_star, "m* = 7 fixture");
  v.require(secs < 120.0, "runtime < 2 min");
}

// 4. Crash points with and without sybils in the low-ability game.
void sybil_crash_points(Verdict& v) {
  const auto spec = from_config("sybil.json");
  const auto t0 = Clock::now();
  const auto b = critical_money(spec, Rational(4), Rational(12));
  const auto sy = sybil_spec(spec, 1, Rational(1, 5));
  const auto at95 = greatest_equilibrium(sy.with_money(Rational(19, 2)));
  const double secs = seconds_since(t0);
  v.detail << "no sybils: crash in (" << b.last_nontrivial.str() << ", " << b.first_trivial.str()
           << "]; 20% sybils at m=9.5: " << (at95.crashed ? "trivial" : "nontrivial") << ", " << secs << " s";
  v.require(std::fabs(b.last_nontrivial.value() - 10.25) <= 0.5 && std::fabs(b.first_trivial.value() - 10.5) <= 0.5,
            "bracket within 0.5 of (10.25, 10.5]");
  v.require(at95.crashed, "sybil game trivial at m = 9.5");
  v.require(secs < 300.0, "runtime < 5 min");
}

// 5. Simulated time-averaged distribution converges to the analytic one.
void distribution_convergence(Verdict& v) {
  const auto spec = single(agent(0.05), Rational(1), 10, 100);
  const auto eq = greatest_equilibrium(spec);
  SimConfig cfg{spec};
  cfg.profile = eq.profile;
  cfg.rounds = 10'000'000;
  cfg.seed = 20240901;
  const auto t0 = Clock::now();
  const auto runs = run_seeds(cfg, 3);
  const double secs = seconds_since(t0);
  v.detail << "k = " << eq.profile[0] << ", L2 per seed:";
  for (const auto& r : runs) {
    double l2 = 0.0;
    const auto& emp = r.empirical.d[0];
    const auto& ana = eq.dist.d[0];
    for (std::size_t i = 0; i < std::max(emp.size(), ana.size()); ++i) {
      const double a = i < ana.size() ? ana[i] : 0.0, e = i < emp.size() ? emp[i] : 0.0;
      l2 += (a - e) * (a - e);
    }
    l2 = std::sqrt(l2);
    v.detail << " " << l2;
    v.require(l2 < 1e-3, "L2 < 1e-3");
    v.require(r.money_conserved, "money conserved");
  }
  v.detail << ", " << secs << " s for 3 seeds";
  v.require(secs < 3 * 180.0, "runtime < 3 min per seed");
}

// 6. Simulated satisfaction rate against the closed form.
void satisfaction_closed_form(Verdict& v) {
  struct Case {
    std::string name;
    ValidatedSpec spec;
    ThresholdProfile k;
    std::vector<std::size_t> types;
    std::int64_t rounds;
  };
  const auto sec6 = from_config("sec6.json");
  std::vector<Case> cases = {
      {"R=1,k=3", single(agent(0.05), Rational(3, 2), 10, 100), {3}, {0}, 4'000'000},
      {"R=2,k=1", single(agent(0.05), Rational(2, 3), 3, 300), {1}, {0}, 4'000'000},
      {"two-type game", sec6, greatest_equilibrium(sec6).profile, {0, 1}, 10'000'000},
  };
  const auto low = single(agent(0.08, 0.01, 0.97), Rational(4), 1, 10000);
  cases.push_back({"low ability", low, greatest_equilibrium(low).profile, {0}, 20'000'000});

  int checked = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Case& cs = cases[c];
    SimConfig cfg{cs.spec};
    cfg.profile = cs.k;
    cfg.rounds = cs.rounds;
    cfg.seed = 7000 + c;
    const auto r = run(cfg);
    const auto ss = steady_state(cs.spec, cs.k);
    for (std::size_t t : cs.types) {
      const auto w = transition_probs(cs.spec, cs.k, ss.dist, t);
      const double rate = satisfaction_rate(w.ratio(), cs.k[t]);
      const double probe = satisfaction_probe(r, t);
      v.detail << (checked ? "; " : "") << cs.name << " type " << t << ": R " << w.ratio() << ", k " << cs.k[t]
               << ", probe " << probe << " vs " << rate;
      v.require(std::fabs(probe - rate) <= 0.005, cs.name + " within 0.005");
      ++checked;
    }
  }
  v.require(std::fabs(satisfaction_rate(1.0, 3) - 0.75) < 1e-12, "R=1,k=3 closed form 0.75");
  v.require(std::fabs(satisfaction_rate(2.0, 1) - 2.0 / 3.0) < 1e-12, "R=2,k=1 closed form 2/3");
  v.require(checked == 5, "five configurations");
}

// 7. Altruists raise welfare along the closed-form law; hoarders lower it.
void perturbation_welfare(Verdict& v) {
  const auto spec = single(agent(0.05), Rational(2), 10, 100);
  double prev_measured = -1.0, prev_formula = -1.0, worst = 0.0;
  int points = 0;
  bool monotone = true, within = true, crashed_early = false;
  for (int step = 0; step < 20; ++step) {
    const double a = 0.05 * step;
    EquilibriumOptions opts;
    opts.altruist_fraction = a;
    const auto eq = greatest_equilibrium(spec, opts);
    if (eq.crashed) {
      crashed_early = step == 0;
      break;
    }
    SimConfig cfg{spec};
    cfg.profile = eq.profile;
    cfg.rounds = 2'000'000;
    cfg.seed = 900 + step;
    cfg.free_service_fraction = a;
    const double measured = measured_welfare(run(cfg), spec, false);
    const double formula = altruist_welfare(spec, eq.profile, a);
    const double rel = std::fabs(measured - formula) / formula;
    worst = std::max(worst, rel);
    within = within && rel <= 0.01;
    monotone = monotone && measured >= prev_measured && formula >= prev_formula;
    prev_measured = measured;
    prev_formula = formula;
    ++points;
  }
  v.detail << points << " altruist levels, worst relative gap " << worst << ", welfare up to " << prev_measured;
  v.require(!crashed_early && points >= 2, "pre-crash points exist");
  v.require(within, "measured within 1% of the law");
  v.require(monotone, "non-decreasing in a");

  const auto sec6 = from_config("sec6.json");
  double prev = 1e300;
  bool down = true;
  v.detail << "; hoarders:";
  for (int tenth = 0; tenth <= 3; ++tenth) {
    const auto r = greatest_equilibrium(hoarder_spec(sec6, Rational(tenth, 10)));
    v.detail << " " << r.welfare;
    down = down && r.welfare <= prev + 1e-12;
    prev = r.welfare;
  }
  v.require(down, "hoarder welfare non-increasing");
}

// 8. Monotonicity properties on random single-type games.
void monotonicity_suite(Verdict& v) {
  std::mt19937_64 rng(8080);
  std::uniform_real_distribution<double> alpha(0.02, 0.4), beta(0.2, 1.0), delta(0.9, 0.99);
  std::uniform_int_distribution<int> hh(1, 5), nn(10, 40), kk(3, 30), bump(1, 6);
  int lambda_bad = 0, money_bad = 0, others_bad = 0, g_bad = 0, vi_bad = 0, vi_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t h = hh(rng), n = nn(rng);
    const int k = kk(rng);
    // Money strictly inside (0, k) on the 1/h grid, with room for one more step.
    std::uniform_int_distribution<std::int64_t> units(1, std::max<std::int64_t>(1, h * k - 2));
    const Rational m(units(rng), h), m2 = m + Rational(1, h);
    const auto s = single(agent(alpha(rng), beta(rng), delta(rng)), m, h, n);
    const auto s2 = s.with_money(m2);

    if (solve_lambda(s2, {k}) < solve_lambda(s, {k})) ++lambda_bad;
    const auto br = best_reply_profile(s, {k});
    if (best_reply_profile(s2, {k})[0] > br[0]) ++money_bad;
    if (best_reply_profile(s, {k + bump(rng)})[0] < br[0]) ++others_bad;

    const auto ss = steady_state(s, {k});
    const auto w = walk_for(s, {k}, ss, 0, {});
    double prev = discounted_absorption(0, w);
    for (int kappa = 1; kappa <= 200; ++kappa) {
      const double g = discounted_absorption(kappa, w);
      if (!(g < prev)) ++g_bad;
      prev = g;
    }
    const int cap = std::max(60, 2 * br[0] + 10);
    if (br[0] < 1024) {
      ++vi_checked;
      if (value_iteration_oracle(s.type(0), w, cap, 1e-13).threshold() != br[0]) ++vi_bad;
    }
  }
  v.detail << "violations: lambda " << lambda_bad << ", reply vs m " << money_bad << ", reply vs others "
           << others_bad << ", g " << g_bad << ", value iteration " << vi_bad << "/" << vi_checked;
  v.require(lambda_bad == 0, "lambda non-decreasing in m");
  v.require(money_bad == 0, "best reply non-increasing in m");
  v.require(others_bad == 0, "best reply non-decreasing in others' k");
  v.require(g_bad == 0, "g strictly decreasing");
  v.require(vi_bad == 0 && vi_checked > 0, "value iteration agrees with the threshold rule");
}

// 9. Inference inverts the forward map and finds small supports.
void inference_round_trip(Verdict& v) {
  std::mt19937_64 rng(9090);
  std::uniform_real_distribution<double> u(0.05, 1.0), loglam(std::log(0.4), std::log(2.5));
  std::uniform_int_distribution<int> KK(1, 30), ss(1, 6);
  double worst = 0.0;
  int support_bad = 0, lemma_checked = 0, lemma_bad = 0, alternatives = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int K = KK(rng);
    std::vector<double> f(static_cast<std::size_t>(K) + 1, 0.0);
    f[K] = u(rng);
    std::uniform_int_distribution<int> pos(0, K);
    const int extra = ss(rng) - 1;
    for (int j = 0; j < extra; ++j) f[pos(rng)] = u(rng);
    double sum = 0.0;
    for (double x : f) sum += x;
    for (double& x : f) x /= sum;
    int s = 0;
    for (double x : f) s += x > 0.0;
    const double lam = std::exp(loglam(rng));
    const auto d = forward_distribution(lam, f);

    const auto e = explanation_from_lambda(d, lam);
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::fabs(e.f[i] - f[i]));
    const auto minimal = minimal_explanation(d);
    if (static_cast<int>(minimal.support().size()) > s) ++support_bad;

    if (lemma_checked < 10 && K >= 8) {
      ++lemma_checked;
      for (double scale = 0.5; scale <= 2.0; scale += 0.01) {
        if (std::fabs(scale - 1.0) < 1e-9) continue;
        try {
          const auto alt = explanation_from_lambda(d, lam * scale);
          ++alternatives;
          if (static_cast<int>(alt.support().size()) < K - s) ++lemma_bad;
        } catch (const NegativeFractionError&) {
        }
      }
    }
  }
  v.detail << "max |f error| " << worst << ", oversized minimal supports " << support_bad << ", support bound "
           << lemma_bad << " violations over " << alternatives << " alternatives on " << lemma_checked
           << " instances";
  v.require(worst <= 1e-9, "f within 1e-9");
  v.require(support_bad == 0, "minimal support <= true support");
  v.require(lemma_checked == 10 && lemma_bad == 0, "support bound holds");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"equilibrium reproduction", equilibrium_reproduction},
      {"log-linear structure", log_linear_structure},
      {"crash existence and monotonicity", crash_monotonicity},
      {"sybil crash points", sybil_crash_points},
      {"distribution convergence", distribution_convergence},
      {"satisfaction-rate closed form", satisfaction_closed_form},
      {"altruist and hoarder welfare", perturbation_welfare},
      {"monotonicity suite", monotonicity_suite},
      {"inference round trip", inference_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
