#include "scrip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>

#include <omp.h>

namespace scrip {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::int64_t kAlways = std::numeric_limits<std::int64_t>::max();

struct WinnerClass {
  std::size_t type = 0;
  double weight = 1.0;
  double beta = 1.0;
  bool altruist = false;
  std::vector<std::int32_t> willing;
};

struct Group {
  std::vector<std::int32_t> members;
  std::int64_t threshold = 0;
  std::int64_t pool = 0;
};

// Time-weighted count over the measurement window, accumulated lazily.
struct LazyCount {
  std::int64_t count = 0;
  std::int64_t last = 0;
  double acc = 0.0;

  void advance(std::int64_t now) {
    if (now > last) {
      acc += static_cast<double>(count) * static_cast<double>(now - last);
      last = now;
    }
  }
};

class Simulation {
 public:
  explicit Simulation(const SimConfig& c) : cfg_(c), spec_(c.spec) {
    setup_streams();
    setup_agents();
    setup_groups();
    setup_wealth();
  }

  SimResult run() {
    const std::int64_t rounds = cfg_.rounds;
    for (round_ = 0; round_ < rounds; ++round_) {
      step();
      if (cfg_.check_every_round) verify_money();
    }
    return finish();
  }

 private:
  const SimConfig& cfg_;
  const ValidatedSpec& spec_;
  std::size_t N_ = 0, T_ = 0;
  std::int64_t money_ = 0;
  std::int64_t round_ = 0, window_start_ = 0;

  std::mt19937_64 req_rng_, ability_rng_, winner_rng_, free_rng_, internal_rng_, init_rng_;
  std::discrete_distribution<std::size_t> type_pick_;
  std::vector<std::int64_t> type_start_, type_count_;

  std::vector<std::size_t> type_of_, class_of_;
  std::vector<std::int64_t> threshold_, wealth_;
  std::vector<std::int32_t> group_of_, pos_;
  std::vector<WinnerClass> classes_;
  std::vector<Group> groups_;

  std::vector<std::vector<LazyCount>> hist_;
  std::vector<LazyCount> willing_;
  std::vector<TypeCounters> counters_;
  std::vector<double> disc_util_, util_sum_, log_disc_;
  bool money_ok_ = true;
  bool have_altruists_ = false;
  std::vector<std::int64_t> able_;

  void setup_streams() {
    std::uint64_t s = cfg_.seed;
    for (auto* g : {&req_rng_, &ability_rng_, &winner_rng_, &free_rng_, &internal_rng_, &init_rng_})
      g->seed(splitmix64(s));
  }

  void setup_agents() {
    T_ = spec_.size();
    N_ = static_cast<std::size_t>(spec_.agents());
    money_ = spec_.total_money();
    if (cfg_.profile.size() != T_) throw Error(ErrorCode::ConfigError, "profile size does not match types");
    if (!cfg_.agent_thresholds.empty() && cfg_.agent_thresholds.size() != N_)
      throw Error(ErrorCode::ConfigError, "agent_thresholds must list every agent");
    if (!cfg_.sybils.empty() && cfg_.sybils.size() != N_)
      throw Error(ErrorCode::ConfigError, "sybils must list every agent");
    if (cfg_.rounds <= 0) throw Error(ErrorCode::ConfigError, "rounds must be positive");
    if (!(cfg_.tail_fraction > 0.0 && cfg_.tail_fraction <= 1.0))
      throw Error(ErrorCode::ConfigError, "tail_fraction must lie in (0,1]");
    if (!(cfg_.free_service_fraction >= 0.0 && cfg_.free_service_fraction < 1.0))
      throw Error(ErrorCode::ConfigError, "free_service_fraction must lie in [0,1)");
    if (N_ > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
      throw Error(ErrorCode::ConfigError, "too many agents");

    window_start_ = cfg_.rounds - static_cast<std::int64_t>(std::floor(cfg_.tail_fraction * cfg_.rounds));

    std::vector<double> req_weight(T_);
    std::int64_t start = 0;
    for (std::size_t t = 0; t < T_; ++t) {
      type_start_.push_back(start);
      type_count_.push_back(spec_.agents_of(t));
      start += type_count_.back();
      req_weight[t] = spec_.type(t).rho * static_cast<double>(type_count_.back());
      const AgentType& ty = spec_.type(t);
      log_disc_.push_back(std::log1p(-(1.0 - ty.delta) / static_cast<double>(spec_.n())));
    }
    type_pick_ = std::discrete_distribution<std::size_t>(req_weight.begin(), req_weight.end());

    type_of_.resize(N_);
    threshold_.resize(N_);
    class_of_.resize(N_);
    std::map<std::pair<std::size_t, double>, std::size_t> class_index;
    for (std::size_t t = 0; t < T_; ++t) {
      const AgentType& ty = spec_.type(t);
      for (std::int64_t j = 0; j < type_count_[t]; ++j) {
        const auto i = static_cast<std::size_t>(type_start_[t] + j);
        type_of_[i] = t;
        if (ty.behavior.always_volunteers()) threshold_[i] = kAlways;
        else if (!cfg_.agent_thresholds.empty()) threshold_[i] = cfg_.agent_thresholds[i];
        else threshold_[i] = cfg_.profile[t];
        if (threshold_[i] < 0) throw Error(ErrorCode::ConfigError, "negative threshold");
        const int s = cfg_.sybils.empty() ? 0 : cfg_.sybils[i];
        if (s < 0) throw Error(ErrorCode::ConfigError, "negative sybil count");
        const double weight = ty.chi * (1.0 + s);
        auto [it, fresh] = class_index.try_emplace({t, weight}, classes_.size());
        if (fresh) {
          WinnerClass c;
          c.type = t;
          c.weight = weight;
          c.beta = ty.beta;
          c.altruist = ty.behavior.kind == BehaviorKind::Altruist;
          have_altruists_ = have_altruists_ || c.altruist;
          classes_.push_back(std::move(c));
        }
        class_of_[i] = it->second;
      }
    }
    group_of_.assign(N_, -1);
    pos_.assign(N_, -1);
    wealth_.assign(N_, 0);
    disc_util_.assign(N_, 0.0);
    util_sum_.assign(N_, 0.0);
    hist_.assign(T_, {});
    willing_.assign(T_, LazyCount{0, window_start_, 0.0});
    counters_.assign(T_, {});
  }

  void setup_groups() {
    for (const CollusionGroup& cg : cfg_.groups) {
      if (cg.members.empty()) throw Error(ErrorCode::ConfigError, "empty collusion group");
      if (cg.threshold < 0) throw Error(ErrorCode::ConfigError, "negative group threshold");
      Group g;
      g.threshold = cg.threshold;
      for (std::int64_t a : cg.members) {
        if (a < 0 || static_cast<std::size_t>(a) >= N_)
          throw Error(ErrorCode::ConfigError, "collusion member out of range");
        const auto i = static_cast<std::size_t>(a);
        if (group_of_[i] >= 0) throw Error(ErrorCode::ConfigError, "collusion groups overlap");
        if (type_of_[i] != type_of_[static_cast<std::size_t>(cg.members.front())])
          throw Error(ErrorCode::ConfigError, "collusion group mixes types");
        if (!spec_.type(type_of_[i]).behavior.is_standard() &&
            spec_.type(type_of_[i]).behavior.kind != BehaviorKind::FixedThreshold)
          throw Error(ErrorCode::ConfigError, "only threshold agents can collude");
        group_of_[i] = static_cast<std::int32_t>(groups_.size());
        g.members.push_back(static_cast<std::int32_t>(i));
      }
      groups_.push_back(std::move(g));
    }
  }

  void setup_wealth() {
    if (!cfg_.initial_wealth.empty()) {
      if (cfg_.initial_wealth.size() != N_)
        throw Error(ErrorCode::ConfigError, "initial_wealth must list every agent");
      std::int64_t total = 0;
      for (std::int64_t w : cfg_.initial_wealth) {
        if (w < 0) throw Error(ErrorCode::ConfigError, "negative initial wealth");
        total += w;
      }
      if (total != money_)
        throw Error(ErrorCode::ConfigError, "initial wealth sums to " + std::to_string(total) +
                                                ", expected " + std::to_string(money_));
      wealth_ = cfg_.initial_wealth;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, N_ - 1);
      for (std::int64_t d = 0; d < money_; ++d) ++wealth_[pick(init_rng_)];
    }
    for (Group& g : groups_)
      for (auto m : g.members) g.pool += wealth_[m];
    for (std::size_t i = 0; i < N_; ++i) {
      cell(type_of_[i], wealth_[i]).count++;
      if (wants_to_work(i)) add_willing(i);
    }
  }

  std::int64_t now() const { return std::max(round_ + 1, window_start_); }
  bool in_window() const { return round_ >= window_start_; }

  LazyCount& cell(std::size_t t, std::int64_t w) {
    auto& h = hist_[t];
    if (static_cast<std::size_t>(w) >= h.size())
      h.resize(static_cast<std::size_t>(w) + 1, LazyCount{0, window_start_, 0.0});
    return h[static_cast<std::size_t>(w)];
  }

  bool wants_to_work(std::size_t i) const {
    if (threshold_[i] == kAlways) return true;
    const std::int32_t g = group_of_[i];
    if (g >= 0) return groups_[g].pool < groups_[g].threshold;
    return wealth_[i] < threshold_[i];
  }

  void add_willing(std::size_t i) {
    auto& list = classes_[class_of_[i]].willing;
    pos_[i] = static_cast<std::int32_t>(list.size());
    list.push_back(static_cast<std::int32_t>(i));
    LazyCount& w = willing_[type_of_[i]];
    w.advance(now());
    w.count++;
  }

  void remove_willing(std::size_t i) {
    auto& list = classes_[class_of_[i]].willing;
    const std::int32_t p = pos_[i];
    const std::int32_t moved = list.back();
    list[p] = moved;
    pos_[moved] = p;
    list.pop_back();
    pos_[i] = -1;
    LazyCount& w = willing_[type_of_[i]];
    w.advance(now());
    w.count--;
  }

  void refresh(std::size_t i) {
    const bool want = wants_to_work(i);
    if (want && pos_[i] < 0) add_willing(i);
    else if (!want && pos_[i] >= 0) remove_willing(i);
  }

  void change_wealth(std::size_t i, std::int64_t delta) {
    const std::size_t t = type_of_[i];
    const std::int64_t stamp = now();
    LazyCount& from = cell(t, wealth_[i]);
    from.advance(stamp);
    from.count--;
    wealth_[i] += delta;
    LazyCount& to = cell(t, wealth_[i]);
    to.advance(stamp);
    to.count++;
    const std::int32_t g = group_of_[i];
    if (g >= 0) {
      groups_[g].pool += delta;
      for (auto m : groups_[g].members) refresh(static_cast<std::size_t>(m));
    } else {
      refresh(i);
    }
  }

  void utility(std::size_t i, double u) {
    disc_util_[i] += std::exp(static_cast<double>(round_) * log_disc_[type_of_[i]]) * u;
    util_sum_[i] += u;
    if (in_window()) counters_[type_of_[i]].window_utility += u;
  }

  void step() {
    const std::size_t t = type_pick_(req_rng_);
    std::uniform_int_distribution<std::int64_t> within(0, type_count_[t] - 1);
    const auto i = static_cast<std::size_t>(type_start_[t] + within(req_rng_));
    const AgentType& rt = spec_.type(t);
    TypeCounters scratch;
    TypeCounters& c = in_window() ? counters_[t] : scratch;
    c.requests++;

    if (cfg_.free_service_fraction > 0.0 &&
        std::uniform_real_distribution<double>(0.0, 1.0)(free_rng_) < cfg_.free_service_fraction) {
      c.satisfied++;
      c.satisfied_free++;
      utility(i, rt.gamma);
      return;
    }

    const std::int32_t g = group_of_[i];
    if (g >= 0 && groups_[g].pool < groups_[g].threshold && groups_[g].members.size() > 1) {
      // Internal service: each co-member is able independently.
      std::bernoulli_distribution able(rt.beta);
      std::vector<std::int32_t> ready;
      for (auto m : groups_[g].members)
        if (static_cast<std::size_t>(m) != i && able(internal_rng_)) ready.push_back(m);
      if (!ready.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
        const auto server = static_cast<std::size_t>(ready[pick(internal_rng_)]);
        c.satisfied++;
        c.satisfied_internal++;
        utility(server, -spec_.type(type_of_[server]).alpha);
        utility(i, rt.gamma);
        return;
      }
    }

    const bool paying = (g >= 0 ? groups_[g].pool : wealth_[i]) > 0;

    // Excluded from the draw: the requester and its co-members.
    auto excluded = [&](std::size_t a) { return a == i || (g >= 0 && group_of_[a] == g); };
    double total_weight = 0.0, altruist_weight = 0.0;
    std::vector<std::int64_t>& able = able_;
    able.assign(classes_.size(), 0);
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      WinnerClass& wc = classes_[k];
      std::int64_t avail = static_cast<std::int64_t>(wc.willing.size());
      if (g >= 0) {
        for (auto m : groups_[g].members)
          if (class_of_[m] == k && pos_[m] >= 0) --avail;
      } else if (class_of_[i] == k && pos_[i] >= 0) {
        --avail;
      }
      if (avail <= 0) continue;
      std::int64_t x = avail;
      if (wc.beta < 1.0) x = std::binomial_distribution<std::int64_t>(avail, wc.beta)(ability_rng_);
      able[k] = x;
      total_weight += wc.weight * static_cast<double>(x);
      if (wc.altruist) altruist_weight += wc.weight * static_cast<double>(x);
    }
    if (total_weight > 0.0) c.had_candidate++;

    const double pool_weight = paying ? total_weight : altruist_weight;
    if (!(pool_weight > 0.0)) {
      if (paying) c.unsatisfied_no_volunteer++;
      else c.unsatisfied_no_money++;
      return;
    }

    // Winner: class proportional to weight * able count, then a uniform able member.
    double u = std::uniform_real_distribution<double>(0.0, pool_weight)(winner_rng_);
    std::size_t chosen = classes_.size();
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      if (able[k] == 0 || (!paying && !classes_[k].altruist)) continue;
      chosen = k;
      u -= classes_[k].weight * static_cast<double>(able[k]);
      if (u < 0.0) break;
    }
    const auto& list = classes_[chosen].willing;
    std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
    std::size_t server;
    do {
      server = static_cast<std::size_t>(list[pick(winner_rng_)]);
    } while (excluded(server));

    const std::size_t st = type_of_[server];
    c.satisfied++;
    utility(server, -spec_.type(st).alpha);
    utility(i, rt.gamma);
    if (!paying) return;

    std::size_t payer = i;
    if (wealth_[i] == 0)
      for (auto m : groups_[g].members)
        if (wealth_[m] > 0) {
          payer = static_cast<std::size_t>(m);
          break;
        }
    change_wealth(payer, -1);
    change_wealth(server, +1);
    if (in_window()) {
      c.spent++;
      counters_[st].earned++;
    }
  }

  void verify_money() {
    std::int64_t total = 0;
    for (std::int64_t w : wealth_) {
      if (w < 0) money_ok_ = false;
      total += w;
    }
    if (total != money_) money_ok_ = false;
  }

  SimResult finish() {
    round_ = cfg_.rounds - 1;  // now() == rounds
    verify_money();
    SimResult r;
    r.rounds = cfg_.rounds;
    r.window_rounds = cfg_.rounds - window_start_;
    const double span = static_cast<double>(r.window_rounds) * static_cast<double>(N_);
    r.empirical.d.resize(T_);
    for (std::size_t t = 0; t < T_; ++t) {
      for (LazyCount& lc : hist_[t]) lc.advance(now());
      r.empirical.d[t].resize(hist_[t].size());
      for (std::size_t w = 0; w < hist_[t].size(); ++w) r.empirical.d[t][w] = hist_[t][w].acc / span;
      willing_[t].advance(now());
      counters_[t].willing_agent_rounds = willing_[t].acc;
      counters_[t].agent_rounds = static_cast<double>(type_count_[t]) * static_cast<double>(r.window_rounds);
    }
    r.counters = counters_;
    r.discounted_utility.resize(N_);
    r.utility_per_round.resize(N_);
    for (std::size_t i = 0; i < N_; ++i) {
      r.discounted_utility[i] = (1.0 - spec_.type(type_of_[i]).delta) * disc_util_[i];
      r.utility_per_round[i] = util_sum_[i] / static_cast<double>(cfg_.rounds);
    }
    r.final_wealth = wealth_;
    r.agent_type = type_of_;
    r.money_conserved = money_ok_;
    return r;
  }
};

}  // namespace

SimResult run(const SimConfig& config) { return Simulation(config).run(); }

std::uint64_t replicate_seed(std::uint64_t base, int i) {
  std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(i + 1));
  return splitmix64(s);
}

std::vector<SimResult> run_seeds_serial(const SimConfig& config, int count) {
  std::vector<SimResult> out;
  for (int i = 0; i < count; ++i) {
    SimConfig c = config;
    c.seed = replicate_seed(config.seed, i);
    out.push_back(run(c));
  }
  return out;
}

std::vector<SimResult> run_seeds(const SimConfig& config, int count, int jobs) {
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::vector<SimResult> out(static_cast<std::size_t>(std::max(count, 0)));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < count; ++i) {
    try {
      SimConfig c = config;
      c.seed = replicate_seed(config.seed, i);
      out[static_cast<std::size_t>(i)] = run(c);
    } catch (...) {
#pragma omp critical(seed_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

UtilityReport utility_check(const SimResult& result, const ValidatedSpec& spec, std::size_t type) {
  UtilityReport rep;
  rep.expected = spec.type(type).rho * spec.type(type).gamma / static_cast<double>(spec.h());
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < result.agent_type.size(); ++i) {
    if (result.agent_type[i] != type) continue;
    sum += result.discounted_utility[i];
    sq += result.discounted_utility[i] * result.discounted_utility[i];
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::BadParameter, "type has no agents");
  rep.measured = sum / count;
  const double var = count > 1 ? (sq - sum * sum / count) / (count - 1) : 0.0;
  rep.std_error = std::sqrt(std::max(0.0, var) / count);
  return rep;
}

double satisfaction_probe(const SimResult& result, std::size_t type) {
  const TypeCounters& c = result.counters.at(type);
  if (c.had_candidate == 0) return 0.0;
  return static_cast<double>(c.satisfied - c.satisfied_free - c.satisfied_internal) /
         static_cast<double>(c.had_candidate);
}

double measured_welfare(const SimResult& result, const ValidatedSpec& spec, bool standard_only) {
  double total = 0.0;
  for (std::size_t t = 0; t < result.counters.size(); ++t) {
    if (standard_only && !spec.type(t).behavior.is_standard()) continue;
    total += result.counters[t].window_utility;
  }
  return total / static_cast<double>(result.window_rounds);
}

}  // namespace scrip
