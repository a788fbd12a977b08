#include "scrip/mdp.hpp"

#include <algorithm>
#include <cmath>

#include "scrip/steady_state.hpp"

namespace scrip {

double round_decay(const AgentType& type, const ValidatedSpec& spec) {
  return (1.0 - type.delta) / static_cast<double>(spec.agents());
}

WalkParams transition_probs(const ValidatedSpec& spec, const ThresholdProfile& k,
                            const WealthDistribution& dist, std::size_t t) {
  const auto ups = volunteer_mass(spec, k, dist);
  double paying = 0.0, weight_total = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    paying += spec.type(s).rho * (spec.fraction(s) - dist.d[s][0]);
    weight_total += spec.type(s).chi * ups[s];
  }
  const AgentType& type = spec.type(t);
  WalkParams w;
  w.p_down = type.rho / static_cast<double>(spec.agents());
  w.decay = round_decay(type, spec);
  if (!(weight_total > 0.0)) {
    if (paying > 0.0) throw Error(ErrorCode::DegenerateVolunteers, "no agent is willing to volunteer");
    w.p_up = 0.0;
    return w;
  }
  w.p_up = paying * type.chi * type.beta / weight_total;
  return w;
}

double discounted_absorption(int kappa, const WalkParams& w) {
  if (kappa < 0) throw Error(ErrorCode::BadParameter, "kappa must be non-negative");
  if (kappa == 0) return 1.0;
  const double disc = w.discount();
  const double down = disc * w.p_down;
  const double up = disc * w.p_up;
  const std::size_t n = static_cast<std::size_t>(kappa);

  // Rows x = 1..kappa: -down*phi(x-1) + diag*phi(x) - up*phi(x+1) = 0, phi(0) = 1.
  // Thomas forward sweep keeps only the modified super-diagonal and rhs.
  std::vector<double> c(n + 1, 0.0), r(n + 1, 0.0);
  double prev_c = 0.0, prev_r = 0.0;
  for (std::size_t x = 1; x <= n; ++x) {
    const bool top = x == n;
    const double diag = w.decay + disc * (top ? w.p_down : w.p_up + w.p_down);
    const double sup = top ? 0.0 : -up;
    const double sub = x == 1 ? 0.0 : -down;
    const double rhs = x == 1 ? down : 0.0;
    const double piv = diag - sub * prev_c;
    c[x] = sup / piv;
    r[x] = (rhs - sub * prev_r) / piv;
    prev_c = c[x];
    prev_r = r[x];
  }
  // Back substitution is only needed for the last unknown.
  return r[n];
}

int best_reply_threshold(const AgentType& type, const WalkParams& w, int k_max) {
  // Without anyone to pay, no threshold earns anything; s_0 is the canonical reply.
  if (!(w.p_up > 0.0)) return 0;
  auto holds = [&](int kappa) { return type.alpha <= type.gamma * discounted_absorption(kappa, w); };
  if (holds(k_max))
    throw Error(ErrorCode::UnboundedThreshold,
                "volunteering still pays at the threshold cap " + std::to_string(k_max));
  // holds(0) is always true; bracket the crossing then bisect.
  int lo = 0, hi = 1;
  while (hi < k_max && holds(hi)) {
    lo = hi;
    hi = std::min(k_max, hi * 2);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (holds(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

int OraclePolicy::threshold() const {
  const auto first_off = std::find(volunteer.begin(), volunteer.end(), false);
  if (std::find(first_off, volunteer.end(), true) != volunteer.end()) return -1;
  return static_cast<int>(first_off - volunteer.begin());
}

OraclePolicy value_iteration_oracle(const AgentType& type, const WalkParams& w, int state_cap,
                                    double tol, long max_iterations) {
  if (state_cap < 1) throw Error(ErrorCode::BadParameter, "state cap must be >= 1");
  // Tiny populations can push the mean-field p_u past 1 - p_d; that is no transition law.
  if (w.p_up < 0.0 || w.p_down < 0.0 || w.p_up + w.p_down > 1.0)
    throw Error(ErrorCode::BadParameter, "walk probabilities must be non-negative with p_u + p_d <= 1");
  const std::size_t S = static_cast<std::size_t>(state_cap);
  const double disc = w.discount();
  const double pu = w.p_up, pd = w.p_down;
  const double reward_request = type.gamma * pd;
  const double cost_volunteer = type.alpha * pu;

  std::vector<double> u(S + 1, 0.0), next(S + 1, 0.0);
  auto q_values = [&](const std::vector<double>& v, std::size_t s, double& q0, double& q1) {
    const double stay = v[s];
    const double below = s > 0 ? v[s - 1] : v[s];
    const double p_down = s > 0 ? pd : 0.0;
    const double base = s > 0 ? reward_request : 0.0;
    q0 = base + disc * (p_down * below + (1.0 - p_down) * stay);
    if (s == S) {
      q1 = q0 - cost_volunteer;
    } else {
      q1 = base - cost_volunteer + disc * (p_down * below + pu * v[s + 1] + (1.0 - p_down - pu) * stay);
    }
  };

  OraclePolicy out;
  out.volunteer.assign(S + 1, false);
  long it = 0;
  for (; it < max_iterations; ++it) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t s = 0; s <= S; ++s) {
      double q0, q1;
      q_values(u, s, q0, q1);
      next[s] = std::max(q0, q1);
      const double diff = next[s] - u[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    u.swap(next);
    if (hi - lo < tol) break;
  }
  if (it == max_iterations)
    throw Error(ErrorCode::NonConvergence, "value iteration did not converge");
  out.iterations = it + 1;
  for (std::size_t s = 0; s <= S; ++s) {
    double q0, q1;
    q_values(u, s, q0, q1);
    // Volunteering is chosen only when it strictly pays.
    out.volunteer[s] = q1 > q0;
  }
  return out;
}

}  // namespace scrip
