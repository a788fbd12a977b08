#include "scrip/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scrip/equilibrium.hpp"
#include "scrip/inference.hpp"
#include "scrip/perturbations.hpp"
#include "scrip/simulator.hpp"
#include "scrip/steady_state.hpp"

namespace scrip::cli {

using nlohmann::json;

namespace {

enum class Level { Quiet, Warn, Info, Debug };

Level log_level() {
  const char* v = std::getenv("SCRIPKIT_LOG");
  if (!v) return Level::Warn;
  const std::string s(v);
  if (s == "quiet" || s == "off") return Level::Quiet;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& m) const { emit(Level::Info, "info", m); }
  void debug(const std::string& m) const { emit(Level::Debug, "debug", m); }
  void warn(const std::string& m) const { emit(Level::Warn, "warn", m); }

 private:
  std::ostream& err_;
  Level level_;
  void emit(Level l, const char* tag, const std::string& m) const {
    if (level_ >= l) err_ << "[" << tag << "] " << m << '\n';
  }
};

// Twelve significant digits, matching the CSV outputs.
double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json profile_json(const ThresholdProfile& k) { return json(k); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
  return f;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
}

void write_text(const std::string& dir, const std::string& name, const std::string& body) {
  auto f = open_out(std::filesystem::path(dir) / name);
  f << body;
  if (!f) throw Error(ErrorCode::IoError, "write failed for '" + name + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct Common {
  std::string config;
  std::string out;
  int jobs = 0;
  int kmax = 1024;
};

void write_manifest(const std::string& dir, const std::string& command, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& args) {
  json m;
  m["command"] = command;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a(config_text));
  m["seed"] = seed;
  m["version"] = std::string(kVersion);
  m["args"] = args;
  write_text(dir, "manifest.json", m.dump(2) + "\n");
}

json report_json(const EquilibriumReport& r, const ValidatedSpec& spec) {
  json j;
  j["profile"] = profile_json(r.profile);
  j["lambda"] = sig12(r.lambda);
  j["zeta"] = sig12(r.zeta);
  j["welfare"] = sig12(r.welfare);
  j["welfare_scaled"] = sig12(r.welfare * static_cast<double>(spec.n()));
  j["crashed"] = r.crashed;
  j["iterations"] = r.trace.size() - 1;
  j["trace"] = r.trace;
  return j;
}

std::string distribution_csv(const WealthDistribution& d) {
  std::ostringstream os;
  write_distribution_csv(os, d);
  return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows, std::size_t types) {
  std::ostringstream os;
  write_sweep_csv(os, rows, types);
  return os.str();
}

EquilibriumOptions eq_options(const Common& c) {
  EquilibriumOptions o;
  o.k_max = c.kmax;
  return o;
}

// --- simulate ---------------------------------------------------------------

SimConfig sim_config_from(const json& doc, const ValidatedSpec& spec, const Common& c, Log& log) {
  SimConfig cfg;
  cfg.spec = spec;
  const json block = doc.contains("simulate") ? doc.at("simulate") : json::object();
  try {
    const json prof = block.value("profile", json("equilibrium"));
    if (prof.is_string()) {
      if (prof.get<std::string>() != "equilibrium")
        throw Error(ErrorCode::ConfigError, "simulate.profile must be a list or \"equilibrium\"");
      const auto eq = greatest_equilibrium(spec, eq_options(c));
      cfg.profile = eq.profile;
      log.info("simulating at the greatest equilibrium");
    } else {
      cfg.profile = prof.get<ThresholdProfile>();
    }
    if (block.contains("rounds")) cfg.rounds = static_cast<std::int64_t>(block.at("rounds").get<double>());
    cfg.seed = block.value("seed", std::uint64_t{0});
    cfg.free_service_fraction = block.value("free_service_fraction", 0.0);
    cfg.tail_fraction = block.value("tail_fraction", 0.5);
    if (block.contains("sybils")) cfg.sybils = block.at("sybils").get<std::vector<int>>();
    if (block.contains("agent_thresholds"))
      cfg.agent_thresholds = block.at("agent_thresholds").get<std::vector<int>>();
    if (block.contains("initial_wealth"))
      cfg.initial_wealth = block.at("initial_wealth").get<std::vector<std::int64_t>>();
    if (block.contains("groups"))
      for (const auto& g : block.at("groups"))
        cfg.groups.push_back({g.at("members").get<std::vector<std::int64_t>>(), g.at("threshold").get<int>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed simulate block: ") + e.what());
  }
  return cfg;
}

json sim_json(const SimResult& r, const SimConfig& cfg) {
  json j;
  j["rounds"] = r.rounds;
  j["window_rounds"] = r.window_rounds;
  j["seed"] = cfg.seed;
  j["profile"] = cfg.profile;
  j["money_conserved"] = r.money_conserved;
  j["welfare_per_round"] = sig12(measured_welfare(r, cfg.spec, false));
  j["zeta"] = sig12(r.empirical.zeta());
  j["types"] = json::array();
  for (std::size_t t = 0; t < r.counters.size(); ++t) {
    const TypeCounters& c = r.counters[t];
    double disc = 0.0, per_round = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.agent_type.size(); ++i)
      if (r.agent_type[i] == t) {
        disc += r.discounted_utility[i];
        per_round += r.utility_per_round[i];
        ++count;
      }
    json jt;
    jt["requests"] = c.requests;
    jt["satisfied"] = c.satisfied;
    jt["satisfied_free"] = c.satisfied_free;
    jt["satisfied_internal"] = c.satisfied_internal;
    jt["unsatisfied_no_money"] = c.unsatisfied_no_money;
    jt["unsatisfied_no_volunteer"] = c.unsatisfied_no_volunteer;
    jt["had_candidate"] = c.had_candidate;
    jt["earned"] = c.earned;
    jt["spent"] = c.spent;
    jt["earn_rate"] = sig12(c.willing_agent_rounds > 0 ? c.earned / c.willing_agent_rounds : 0.0);
    jt["request_rate"] = sig12(c.agent_rounds > 0 ? c.requests / c.agent_rounds : 0.0);
    jt["satisfaction"] = sig12(satisfaction_probe(r, t));
    jt["mean_discounted_utility"] = sig12(count ? disc / count : 0.0);
    jt["mean_utility_per_round"] = sig12(count ? per_round / count : 0.0);
    j["types"].push_back(jt);
  }
  return j;
}

std::string agents_csv(const SimResult& r) {
  std::ostringstream os;
  os << "agent,type,final_wealth,discounted_utility,utility_per_round\n" << std::setprecision(12);
  for (std::size_t i = 0; i < r.agent_type.size(); ++i)
    os << i << ',' << r.agent_type[i] << ',' << r.final_wealth[i] << ',' << r.discounted_utility[i] << ','
       << r.utility_per_round[i] << '\n';
  return os.str();
}

// --- infer ------------------------------------------------------------------

// Accepts "wealth,fraction" or the per-type "type_index,wealth,fraction"
// layout written by equilibrium and simulate; rows are summed per wealth.
ObservedDistribution read_distribution_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::pair<long, double>> rows;
  long max_w = -1;
  bool typed = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("wealth", 0) == 0) continue;
    if (line.rfind("type_index", 0) == 0) {
      typed = true;
      continue;
    }
    std::string rest = line;
    if (typed) {
      const auto first = rest.find(',');
      if (first == std::string::npos) throw Error(ErrorCode::ConfigError, "bad CSV line: " + line);
      rest = rest.substr(first + 1);
    }
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::ConfigError, "bad CSV line: " + line);
    try {
      const long w = std::stol(rest.substr(0, comma));
      const double f = std::stod(rest.substr(comma + 1));
      if (w < 0) throw Error(ErrorCode::ConfigError, "negative wealth in CSV");
      rows.push_back({w, f});
      max_w = std::max(max_w, w);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "bad CSV line: " + line);
    }
  }
  if (max_w < 0) throw Error(ErrorCode::ConfigError, "empty distribution CSV");
  ObservedDistribution d(static_cast<std::size_t>(max_w) + 1, 0.0);
  for (auto [w, f] : rows) d[static_cast<std::size_t>(w)] += f;
  return d;
}

int exit_for(const Error& e) {
  switch (classify(e.code())) {
    case ErrorClass::Config: return kConfigError;
    case ErrorClass::Numeric: return kNumericError;
    case ErrorClass::Io: return kIoError;
  }
  return kNumericError;
}

}  // namespace

std::vector<Rational> parse_money_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw Error(ErrorCode::ConfigError, "--m expects LO:STEP:HI, got '" + text + "'");
  try {
    return money_grid(Rational::parse(parts[0]), Rational::parse(parts[1]), Rational::parse(parts[2]));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad money grid: ") + e.what());
  }
}

std::int64_t parse_count(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 1.0) || v > 9.0e18 || v != std::floor(v))
    throw Error(ErrorCode::ConfigError, "expected a positive integer count, got '" + text + "'");
  return static_cast<std::int64_t>(v);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Log log(err);
  CLI::App app{"scripkit: equilibria, crashes, simulation and inference for scrip economies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common c;
  std::string grid_text, rounds_text, input;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double altruist = 0.0;
  std::string hoarder = "0", sybil_fraction = "0";
  int sybil = 0;
  MinimalOptions mopts;
  SynthesisOptions sopts;

  auto common = [&](CLI::App* s, bool needs_config) {
    auto* opt = s->add_option("--config", c.config, "game spec JSON");
    if (needs_config) opt->required();
    s->add_option("--out", c.out, "output directory (files plus manifest.json)");
    s->add_option("--jobs", c.jobs, "worker threads (default: all cores)");
    s->add_option("--kmax", c.kmax, "threshold cap")->check(CLI::PositiveNumber);
  };

  auto* eq = app.add_subcommand("equilibrium", "greatest equilibrium of a game");
  common(eq, true);
  auto* sweep = app.add_subcommand("sweep", "welfare across a money grid");
  common(sweep, true);
  sweep->add_option("--m", grid_text, "money grid LO:STEP:HI")->required();
  auto* crash = app.add_subcommand("crash", "bracket the critical money supply");
  common(crash, true);
  crash->add_option("--m", grid_text, "search grid LO:STEP:HI")->required();
  auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the game");
  common(sim, true);
  sim->add_option("--rounds", rounds_text, "rounds (accepts 1e7)");
  sim->add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_given = true; });
  auto* infer = app.add_subcommand("infer", "explain an observed wealth distribution");
  common(infer, false);
  infer->add_option("--input", input, "CSV: wealth,fraction or type_index,wealth,fraction")->required();
  infer->add_option("--tol", mopts.slope_tol, "log-slope deviation tolerance");
  infer->add_option("--residual-tol", mopts.residual_tol, "max reconstruction error");
  infer->add_flag("--smooth", mopts.smooth, "median-smooth log-ratios (noisy inputs)");
  infer->add_option("--gamma", sopts.gamma, "gamma of the synthesized game");
  infer->add_option("--delta", sopts.delta, "delta of the synthesized game");
  infer->add_option("--n", sopts.n, "replicas of the synthesized game");
  auto* pert = app.add_subcommand("perturb", "welfare sweep with altruists, hoarders or sybils");
  common(pert, true);
  pert->add_option("--m", grid_text, "money grid LO:STEP:HI")->required();
  pert->add_option("--altruist-fraction", altruist, "fraction of requests served for free");
  pert->add_option("--hoarder-fraction", hoarder, "fraction of each type hoarding (p/q)");
  pert->add_option("--sybil", sybil, "sybils per sybiling agent");
  pert->add_option("--sybil-fraction", sybil_fraction, "fraction of agents with sybils (p/q)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << json{{"error", "ConfigError"}, {"message", e.what()}}.dump() << '\n';
    return kConfigError;
  }

  try {
    std::string config_text;
    json doc;
    ValidatedSpec spec;
    if (!c.config.empty()) {
      config_text = read_file(c.config);
      doc = parse_json_text(config_text, c.config);
      spec = validate_spec(parse_game_spec(doc));
    }
    if (!c.out.empty()) ensure_dir(c.out);
    const std::string name = app.get_subcommands().front()->get_name();
    log.debug("command " + name);

    if (name == "equilibrium") {
      const auto r = greatest_equilibrium(spec, eq_options(c));
      const std::string body = report_json(r, spec).dump(2) + "\n";
      out << body;
      if (!c.out.empty()) {
        write_text(c.out, "equilibrium.json", body);
        if (!r.crashed) write_text(c.out, "distribution.csv", distribution_csv(r.dist));
        write_manifest(c.out, name, config_text, 0, args);
      }
    } else if (name == "sweep" || name == "perturb") {
      ValidatedSpec target = spec;
      EquilibriumOptions o = eq_options(c);
      if (name == "perturb") {
        o.altruist_fraction = altruist;
        target = hoarder_spec(target, Rational::parse(hoarder));
        if (sybil > 0) target = sybil_spec(target, sybil, Rational::parse(sybil_fraction));
      }
      const auto grid = parse_money_grid(grid_text);
      const auto rows = welfare_sweep(target, grid, o, c.jobs);
      for (const auto& row : rows)
        if (!row.error.empty()) log.warn("m = " + row.m.str() + ": " + row.error);
      const std::string body = sweep_csv(rows, target.size());
      out << body;
      if (!c.out.empty()) {
        write_text(c.out, name + ".csv", body);
        write_manifest(c.out, name, config_text, 0, args);
      }
    } else if (name == "crash") {
      const auto grid = parse_money_grid(grid_text);
      if (grid.size() < 2) throw Error(ErrorCode::ConfigError, "crash grid needs at least two points");
      const Rational step = grid[1] - grid[0];
      const auto b = critical_money(spec, grid.front(), grid.back(), step, eq_options(c));
      json j{{"last_nontrivial", b.last_nontrivial.str()},
             {"first_trivial", b.first_trivial.str()},
             {"last_nontrivial_value", sig12(b.last_nontrivial.value())},
             {"first_trivial_value", sig12(b.first_trivial.value())}};
      const std::string body = j.dump(2) + "\n";
      out << body;
      if (!c.out.empty()) {
        write_text(c.out, "crash.json", body);
        write_manifest(c.out, name, config_text, 0, args);
      }
    } else if (name == "simulate") {
      SimConfig cfg = sim_config_from(doc, spec, c, log);
      if (!rounds_text.empty()) cfg.rounds = parse_count(rounds_text);
      if (seed_given) cfg.seed = seed;
      if (cfg.rounds <= 0) throw Error(ErrorCode::ConfigError, "give --rounds or simulate.rounds");
      log.info("simulating " + std::to_string(cfg.rounds) + " rounds");
      const SimResult r = run(cfg);
      const std::string body = sim_json(r, cfg).dump(2) + "\n";
      out << body;
      if (!c.out.empty()) {
        write_text(c.out, "simulate.json", body);
        write_text(c.out, "distribution.csv", distribution_csv(r.empirical));
        write_text(c.out, "agents.csv", agents_csv(r));
        write_manifest(c.out, name, config_text, cfg.seed, args);
      }
    } else if (name == "infer") {
      const std::string csv_text = read_file(input);
      const ObservedDistribution d = read_distribution_csv(input);
      const Explanation e = minimal_explanation(d, mopts);
      json j;
      j["lambda"] = sig12(e.lambda);
      j["residual"] = sig12(e.residual);
      j["support"] = json::array();
      for (int k : e.support()) j["support"].push_back({{"k", k}, {"f", sig12(e.f[static_cast<std::size_t>(k)])}});
      j["cost_bounds"] = json::array();
      try {
        const SynthesizedGame g = synthesize_game(d, e, sopts);
        const ValidatedSpec vs = validate_spec(g.spec);
        const SteadyState ss = steady_state(vs, g.profile);
        for (std::size_t t = 0; t < g.profile.size(); ++t) {
          const CostInterval ci = cost_bounds(g.profile[t], sopts.gamma, transition_probs(vs, g.profile, ss.dist, t));
          j["cost_bounds"].push_back({{"k", g.profile[t]}, {"alpha_lo", sig12(ci.lo)}, {"alpha_hi", sig12(ci.hi)}});
        }
        j["game"] = to_json(g.spec);
      } catch (const Error& ex) {
        log.warn(std::string("no synthesized game: ") + ex.what());
      }
      const std::string body = j.dump(2) + "\n";
      out << body;
      if (!c.out.empty()) {
        write_text(c.out, "infer.json", body);
        write_manifest(c.out, name, csv_text, 0, args);
      }
    }
    return kOk;
  } catch (const Error& e) {
    err << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return kNumericError;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace scrip::cli
