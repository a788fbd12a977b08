#pragma once

#include <cstdint>
#include <vector>

#include "scrip/model.hpp"

namespace scrip {

/// Same-type agents that pool scrip, serve each other first, and volunteer
/// externally iff the pooled wealth is below `threshold`.
struct CollusionGroup {
  std::vector<std::int64_t> members;
  int threshold = 0;
};

struct SimConfig {
  ValidatedSpec spec;
  ThresholdProfile profile;                   // one threshold per type
  std::vector<int> agent_thresholds;          // optional per-agent override
  std::vector<CollusionGroup> groups;
  std::vector<int> sybils;                    // optional per-agent sybil count
  std::int64_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> initial_wealth;   // empty: each dollar to a uniform agent
  double free_service_fraction = 0.0;         // requests satisfied at no cost to anyone
  double tail_fraction = 0.5;                 // share of rounds in the measurement window
  bool check_every_round = false;             // re-sum all wallets each round
};

/// Counts over the measurement window.
struct TypeCounters {
  std::int64_t requests = 0;
  std::int64_t satisfied = 0;                 // includes free and internal service
  std::int64_t satisfied_free = 0;
  std::int64_t satisfied_internal = 0;
  std::int64_t unsatisfied_no_money = 0;
  std::int64_t unsatisfied_no_volunteer = 0;
  std::int64_t had_candidate = 0;             // an able paid volunteer existed
  std::int64_t earned = 0;
  std::int64_t spent = 0;
  double willing_agent_rounds = 0.0;
  double agent_rounds = 0.0;
  double window_utility = 0.0;                // utils accrued by the type's agents
};

struct SimResult {
  WealthDistribution empirical;               // time average over the window
  std::vector<double> discounted_utility;     // (1-delta) sum_r (1-(1-delta)/n)^r u_r per agent
  std::vector<double> utility_per_round;      // mean utils per round per agent
  std::vector<TypeCounters> counters;
  std::vector<std::int64_t> final_wealth;
  std::vector<std::size_t> agent_type;
  bool money_conserved = true;
  std::int64_t rounds = 0;
  std::int64_t window_rounds = 0;
};

/// Exact round-by-round Monte Carlo of the scrip game. Deterministic in the seed.
SimResult run(const SimConfig& config);

/// Independent runs with seeds derived from config.seed, in parallel (jobs <= 0: all cores).
std::vector<SimResult> run_seeds(const SimConfig& config, int count, int jobs = 0);
/// Serial reference for run_seeds.
std::vector<SimResult> run_seeds_serial(const SimConfig& config, int count);
/// Seed of replicate i in run_seeds.
std::uint64_t replicate_seed(std::uint64_t base, int i);

struct UtilityReport {
  double measured = 0.0;    // mean normalized utility over the type's agents
  double expected = 0.0;    // rho gamma / h
  double std_error = 0.0;
};

/// Compares a type's discounted utility with rho_t gamma_t / h, valid when
/// all of the type's requests are satisfied.
UtilityReport utility_check(const SimResult& result, const ValidatedSpec& spec, std::size_t type);

/// Satisfied fraction of the type's requests among those with an able volunteer.
double satisfaction_probe(const SimResult& result, std::size_t type);

/// Per-round social welfare over the window: sum over agents of utils, divided by rounds.
double measured_welfare(const SimResult& result, const ValidatedSpec& spec, bool standard_only);

}  // namespace scrip
