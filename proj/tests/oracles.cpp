#include "oracles.hpp"

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace oracle {

std::string config_path(const std::string& name) { return std::string(SCRIPKIT_CONFIG_DIR) + "/" + name; }

namespace {

long double mean_at(long double lambda, const std::vector<double>& f, const std::vector<double>& omega,
                    const std::vector<int>& k) {
  long double total = 0.0L;
  for (std::size_t t = 0; t < f.size(); ++t) {
    const long double x = lambda * omega[t];
    long double num = 0.0L, den = 0.0L, p = 1.0L;
    for (int i = 0; i <= k[t]; ++i) {
      num += i * p;
      den += p;
      p *= x;
    }
    total += f[t] * num / den;
  }
  return total;
}

// Dense solve of A x = b with partial pivoting.
std::vector<long double> gauss(std::vector<std::vector<long double>> A, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double q = A[r][c] / A[c][c];
      if (q == 0.0L) continue;
      for (std::size_t j = c; j < n; ++j) A[r][j] -= q * A[c][j];
      b[r] -= q * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    long double s = b[r];
    for (std::size_t j = r + 1; j < n; ++j) s -= A[r][j] * x[j];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace

long double lambda_root(const std::vector<double>& f, const std::vector<double>& omega,
                        const std::vector<int>& k, double m) {
  long double lo = 1.0L, hi = 1.0L;
  while (mean_at(lo, f, omega, k) > m) lo /= 2;
  while (mean_at(hi, f, omega, k) < m) hi *= 2;
  // Illinois variant of regula falsi.
  long double flo = mean_at(lo, f, omega, k) - m, fhi = mean_at(hi, f, omega, k) - m;
  int side = 0;
  for (int it = 0; it < 500; ++it) {
    const long double x = (lo * fhi - hi * flo) / (fhi - flo);
    const long double fx = mean_at(x, f, omega, k) - m;
    if (fx == 0.0L || std::fabs(hi - lo) < 1e-18L * hi) return x;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi /= 2;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo /= 2;
      side = 1;
    }
  }
  return (lo + hi) / 2;
}

std::vector<double> brute_force_marginal(int agents, int k, int money) {
  // Enumerate wealth vectors with entries in [0,k] summing to money.
  std::vector<std::vector<int>> states;
  std::vector<int> cur(agents, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == agents - 1) {
      if (left <= k) {
        cur[pos] = left;
        states.push_back(cur);
      }
      return;
    }
    for (int w = 0; w <= std::min(k, left); ++w) {
      cur[pos] = w;
      self(self, pos + 1, left - w);
    }
  };
  rec(rec, 0, money);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t s = 0; s < states.size(); ++s) index[states[s]] = s;

  // Sparse transition list of the lazy chain.
  struct Edge {
    std::size_t to;
    double p;
  };
  std::vector<std::vector<Edge>> out(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& x = states[s];
    double stay = 0.5;
    for (int i = 0; i < agents; ++i) {
      const double pi = 0.5 / agents;
      if (x[i] == 0) {
        stay += pi;
        continue;
      }
      std::vector<int> vol;
      for (int j = 0; j < agents; ++j)
        if (j != i && x[j] < k) vol.push_back(j);
      if (vol.empty()) {
        stay += pi;
        continue;
      }
      for (int j : vol) {
        auto y = x;
        --y[i];
        ++y[j];
        out[s].push_back({index.at(y), pi / vol.size()});
      }
    }
    out[s].push_back({s, stay});
  }
  std::vector<double> p(states.size(), 1.0 / states.size()), q(states.size());
  for (int it = 0; it < 200000; ++it) {
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s)
      for (const Edge& e : out[s]) q[e.to] += p[s] * e.p;
    double diff = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) diff += std::fabs(q[s] - p[s]);
    p.swap(q);
    if (diff < 1e-14) break;
  }
  std::vector<double> marginal(k + 1, 0.0);
  for (std::size_t s = 0; s < states.size(); ++s)
    for (int i = 0; i < agents; ++i) marginal[states[s][i]] += p[s] / agents;
  return marginal;
}

long double absorption_dense(int kappa, double p_up, double p_down, double disc) {
  const std::size_t n = static_cast<std::size_t>(kappa) + 1;
  std::vector<std::vector<long double>> A(n, std::vector<long double>(n, 0.0L));
  std::vector<long double> b(n, 0.0L);
  A[0][0] = 1.0L;
  b[0] = 1.0L;
  for (std::size_t x = 1; x < n; ++x) {
    const bool top = x + 1 == n;
    const long double up = top ? 0.0L : p_up;
    A[x][x] = 1.0L - disc * (1.0L - up - p_down);
    A[x][x - 1] = -static_cast<long double>(disc) * p_down;
    if (!top) A[x][x + 1] = -static_cast<long double>(disc) * up;
  }
  return gauss(A, b)[n - 1];
}

McEstimate absorption_monte_carlo(int kappa, double p_up, double p_down, double disc, long paths,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum = 0.0, sq = 0.0;
  for (long p = 0; p < paths; ++p) {
    int x = kappa;
    double factor = 1.0;
    while (x > 0) {
      factor *= disc;
      const double r = u(rng);
      if (r < p_down) --x;
      else if (x < kappa && r < p_down + p_up) ++x;
      if (factor < 1e-300) break;
    }
    sum += factor;
    sq += factor * factor;
  }
  McEstimate e;
  e.mean = sum / paths;
  e.std_error = std::sqrt(std::max(0.0, sq / paths - e.mean * e.mean) / paths);
  return e;
}

std::vector<bool> policy_iteration(double alpha, double gamma, double p_up, double p_down, double decay,
                                   int cap) {
  const std::size_t n = static_cast<std::size_t>(cap) + 1;
  const long double disc = 1.0L - decay;
  std::vector<bool> pol(n, true);
  pol[n - 1] = false;
  auto value_of = [&](const std::vector<bool>& policy) {
    // (I - disc P) u = r, assembled with decay kept separate on the diagonal.
    std::vector<std::vector<long double>> A(n, std::vector<long double>(n, 0.0L));
    std::vector<long double> r(n, 0.0L);
    for (std::size_t s = 0; s < n; ++s) {
      const long double pd = s > 0 ? p_down : 0.0L;
      const long double pu = (policy[s] && s + 1 < n) ? p_up : 0.0L;
      r[s] = (s > 0 ? gamma * pd : 0.0L) - (policy[s] ? alpha * static_cast<long double>(p_up) : 0.0L);
      A[s][s] = decay + disc * (pd + pu);
      if (s > 0) A[s][s - 1] = -disc * pd;
      if (s + 1 < n) A[s][s + 1] = -disc * pu;
    }
    return gauss(A, r);
  };
  for (int it = 0; it < 1000; ++it) {
    const auto u = value_of(pol);
    std::vector<bool> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      // Gain from volunteering: -alpha p_u + disc p_u (u(s+1) - u(s)).
      const long double gain =
          s + 1 < n ? -alpha * static_cast<long double>(p_up) + disc * p_up * (u[s + 1] - u[s]) : -1.0L;
      next[s] = gain >= -1e-15L * std::fabs(alpha * p_up);
    }
    if (next == pol) break;
    pol = next;
  }
  return pol;
}

double time_with_money(double R, int k) {
  long double w = 1.0L, total = 0.0L, zero = 1.0L;
  for (int i = 0; i <= k; ++i) {
    total += w;
    w *= R;
  }
  return static_cast<double>(1.0L - zero / total);
}

std::vector<double> forward(double lambda, const std::vector<double>& f) {
  const std::size_t K = f.size() - 1;
  std::vector<double> d(K + 1, 0.0);
  for (std::size_t i = 0; i <= K; ++i) {
    long double S = 0.0L;
    for (std::size_t l = 0; l <= i; ++l) S += std::pow(static_cast<long double>(lambda), static_cast<long double>(l));
    for (std::size_t j = 0; j <= i; ++j)
      d[j] += static_cast<double>(f[i] * std::pow(static_cast<long double>(lambda), static_cast<long double>(j)) / S);
  }
  return d;
}

std::int64_t scan_min_altruists(double c, double q, double alpha) {
  long double v = c * q;
  for (std::int64_t a = 1; a < 100000000; ++a, v *= q)
    if (v < alpha) return a;
  throw std::runtime_error("scan did not terminate");
}

}  // namespace oracle
