#include "scrip/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace scrip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::NonIntegralPopulation: return "NonIntegralPopulation";
    case ErrorCode::NonIntegralMoney: return "NonIntegralMoney";
    case ErrorCode::InfeasibleMoney: return "InfeasibleMoney";
    case ErrorCode::DegenerateVolunteers: return "DegenerateVolunteers";
    case ErrorCode::UnboundedThreshold: return "UnboundedThreshold";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::BadBracket: return "BadBracket";
    case ErrorCode::CrashedEconomy: return "CrashedEconomy";
    case ErrorCode::NegativeFraction: return "NegativeFraction";
    case ErrorCode::NoExplanation: return "NoExplanation";
    case ErrorCode::InconsistentLambda: return "InconsistentLambda";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadParameter:
    case ErrorCode::NonIntegralPopulation:
    case ErrorCode::NonIntegralMoney:
    case ErrorCode::ConfigError:
      return ErrorClass::Config;
    case ErrorCode::IoError:
      return ErrorClass::Io;
    default:
      return ErrorClass::Numeric;
  }
}

NegativeFractionError::NegativeFractionError(int index, double value)
    : Error(ErrorCode::NegativeFraction,
            "negative fraction " + std::to_string(value) + " at threshold " +
                std::to_string(index)),
      index_(index),
      value_(value) {}

// ---------------------------------------------------------------------------
// Rational

namespace {

void normalize(std::int64_t& num, std::int64_t& den) {
  if (den == 0) throw Error(ErrorCode::BadParameter, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::ConfigError, "not an integer: '" + std::string(s) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(num, den); }

Rational Rational::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::ConfigError, "empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return Rational(parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1))));
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits(text.substr(0, dot));
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) throw Error(ErrorCode::ConfigError, "too many decimals: " + std::string(text));
    digits += frac;
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    if (digits == "-" || digits.empty()) digits += "0";
    return Rational(parse_int(digits), den);
  }
  return Rational(parse_int(text), 1);
}

Rational Rational::approximate(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw Error(ErrorCode::BadParameter, "cannot rationalize non-finite value");
  const bool neg = x < 0;
  double v = std::fabs(x);
  // Convergents h/k of the continued fraction of v.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = v;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(rem);
    if (a_d > 9.0e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den) {
      // Semiconvergent check: the largest admissible intermediate fraction.
      const std::int64_t t = (max_den - k0) / k1;
      const std::int64_t hs = t * h1 + h0, ks = t * k1 + k0;
      if (ks > 0 && std::fabs(static_cast<double>(hs) / ks - v) <
                        std::fabs(static_cast<double>(h1) / k1 - v)) {
        h1 = hs;
        k1 = ks;
      }
      break;
    }
    const std::int64_t h2 = a * h1 + h0;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double frac = rem - a_d;
    if (frac < 1e-15 || std::fabs(static_cast<double>(h1) / k1 - v) < 1e-17 * std::max(1.0, v)) break;
    rem = 1.0 / frac;
  }
  return Rational(neg ? -h1 : h1, k1);
}

bool Rational::scales_to_integer(std::int64_t k) const {
  // num * k / den integral  <=>  den | k (num and den coprime)
  return k % den == 0 || (num == 0);
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(Rational a, Rational b) {
  const std::int64_t g = std::gcd(a.den, b.den);
  return Rational(a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den);
}
Rational operator-(Rational a, Rational b) { return a + Rational(-b.num, b.den); }
Rational operator*(Rational a, Rational b) {
  const std::int64_t g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
  const std::int64_t g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
  const std::int64_t s1 = g1 ? g1 : 1, s2 = g2 ? g2 : 1;
  return Rational((a.num / s1) * (b.num / s2), (a.den / s2) * (b.den / s1));
}
Rational operator/(Rational a, Rational b) {
  if (b.num == 0) throw Error(ErrorCode::BadParameter, "division by zero rational");
  return a * Rational(b.den, b.num);
}
bool operator<(Rational a, Rational b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::BadParameter, msg);
}

void check_type(const AgentType& t, std::size_t idx) {
  const std::string where = "type " + std::to_string(idx) + ": ";
  check(std::isfinite(t.alpha) && t.alpha > 0, where + "alpha must be > 0");
  check(t.beta > 0 && t.beta <= 1, where + "beta must be in (0,1]");
  check(std::isfinite(t.gamma) && t.gamma > t.alpha, where + "gamma must exceed alpha");
  check(t.delta > 0 && t.delta < 1, where + "delta must be in (0,1)");
  check(std::isfinite(t.rho) && t.rho > 0, where + "rho must be > 0");
  check(std::isfinite(t.chi) && t.chi > 0, where + "chi must be > 0");
  check(std::isfinite(t.omega()) && t.omega() > 0, where + "omega must be finite and positive");
  if (t.behavior.kind == BehaviorKind::FixedThreshold)
    check(t.behavior.fixed_threshold >= 0, where + "fixed threshold must be >= 0");
}

}  // namespace

ValidatedSpec validate_spec(const GameSpec& spec) {
  check(!spec.types.empty(), "game needs at least one type");
  check(spec.h > 0, "h must be a positive integer");
  check(spec.n > 0, "n must be a positive integer");
  check(spec.m.num >= 0, "m must be non-negative");
  check(spec.hoard_cap > 0, "hoard cap must be positive");

  Rational total(0);
  for (std::size_t t = 0; t < spec.types.size(); ++t) {
    check_type(spec.types[t].type, t);
    const Rational& f = spec.types[t].fraction;
    check(f.num > 0, "type " + std::to_string(t) + ": fraction must be > 0");
    total = total + f;
    if (!f.scales_to_integer(spec.h))
      throw Error(ErrorCode::NonIntegralPopulation,
                  "f_" + std::to_string(t) + " * h = " + f.str() + " * " + std::to_string(spec.h) +
                      " is not an integer");
  }
  check(total == Rational(1), "type fractions sum to " + total.str() + ", not 1");
  if (!spec.m.scales_to_integer(spec.h))
    throw Error(ErrorCode::NonIntegralMoney,
                "m * h = " + spec.m.str() + " * " + std::to_string(spec.h) + " is not an integer");

  ValidatedSpec out;
  out.spec_ = spec;
  double rho_mass = 0.0;
  for (const auto& e : spec.types) {
    out.fractions_.push_back(e.fraction.value());
    rho_mass += e.type.rho * e.fraction.value();
  }
  // Exact idempotence: leave rho untouched when already normalized.
  if (std::fabs(rho_mass - 1.0) > 1e-15)
    for (auto& e : out.spec_.types) e.type.rho /= rho_mass;
  return out;
}

std::int64_t ValidatedSpec::agents_of(std::size_t t) const {
  const Rational c = spec_.types[t].fraction * Rational(agents());
  return c.num / c.den;
}

std::int64_t ValidatedSpec::total_money() const {
  const Rational c = spec_.m * Rational(agents());
  return c.num / c.den;
}

ValidatedSpec ValidatedSpec::with_money(Rational m) const {
  GameSpec s = spec_;
  s.m = m;
  return validate_spec(s);
}

ValidatedSpec ValidatedSpec::with_replicas(std::int64_t n) const {
  GameSpec s = spec_;
  s.n = n;
  return validate_spec(s);
}

ThresholdProfile initial_profile(const ValidatedSpec& spec, int top) {
  ThresholdProfile k(spec.size(), top);
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const Behavior& b = spec.type(t).behavior;
    if (b.always_volunteers()) k[t] = spec.hoard_cap();
    else if (b.kind == BehaviorKind::FixedThreshold) k[t] = b.fixed_threshold;
  }
  return k;
}

// ---------------------------------------------------------------------------
// WealthDistribution

double WealthDistribution::type_mass(std::size_t t) const {
  double s = 0.0;
  for (double x : d[t]) s += x;
  return s;
}

double WealthDistribution::mean() const {
  double s = 0.0;
  for (const auto& row : d)
    for (std::size_t i = 0; i < row.size(); ++i) s += static_cast<double>(i) * row[i];
  return s;
}

double WealthDistribution::zeta() const {
  double s = 0.0;
  for (const auto& row : d)
    if (!row.empty()) s += row[0];
  return s;
}

std::vector<double> WealthDistribution::marginal() const {
  std::size_t width = 0;
  for (const auto& row : d) width = std::max(width, row.size());
  std::vector<double> out(width, 0.0);
  for (const auto& row : d)
    for (std::size_t i = 0; i < row.size(); ++i) out[i] += row[i];
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Rational rational_field(const nlohmann::json& v, const char* name) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) {
    // Go through the shortest decimal rendering so 0.3 parses as 3/10.
    std::ostringstream os;
    os.precision(15);
    os << v.get<double>();
    return Rational::parse(os.str());
  }
  throw Error(ErrorCode::ConfigError, std::string("field '") + name + "' must be a number or \"p/q\"");
}

double number_field(const nlohmann::json& obj, const char* name, double fallback, bool required) {
  if (!obj.contains(name)) {
    if (required) throw Error(ErrorCode::ConfigError, std::string("missing field '") + name + "'");
    return fallback;
  }
  const auto& v = obj.at(name);
  if (!v.is_number()) throw Error(ErrorCode::ConfigError, std::string("field '") + name + "' must be numeric");
  return v.get<double>();
}

Behavior parse_behavior(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "standard") return Behavior::standard();
    if (s == "altruist") return Behavior::altruist();
    if (s == "hoarder") return Behavior::hoarder();
    throw Error(ErrorCode::ConfigError, "unknown behavior '" + s + "'");
  }
  if (v.is_object() && v.contains("fixed")) return Behavior::fixed(v.at("fixed").get<int>());
  throw Error(ErrorCode::ConfigError, "behavior must be a string or {\"fixed\": k}");
}

}  // namespace

GameSpec parse_game_spec(const nlohmann::json& doc) {
  try {
    GameSpec spec;
    if (!doc.contains("types") || !doc.at("types").is_array())
      throw Error(ErrorCode::ConfigError, "config needs a 'types' array");
    for (const auto& jt : doc.at("types")) {
      TypeEntry e;
      e.type.alpha = number_field(jt, "alpha", 0, true);
      e.type.beta = number_field(jt, "beta", 0, true);
      e.type.gamma = number_field(jt, "gamma", 0, true);
      e.type.delta = number_field(jt, "delta", 0, true);
      e.type.rho = number_field(jt, "rho", 1.0, false);
      e.type.chi = number_field(jt, "chi", 1.0, false);  // five-entry tuples imply chi = 1
      if (jt.contains("behavior")) e.type.behavior = parse_behavior(jt.at("behavior"));
      if (!jt.contains("fraction")) throw Error(ErrorCode::ConfigError, "type missing 'fraction'");
      e.fraction = rational_field(jt.at("fraction"), "fraction");
      spec.types.push_back(e);
    }
    if (!doc.contains("h") || !doc.contains("m") || !doc.contains("n"))
      throw Error(ErrorCode::ConfigError, "config needs 'h', 'm' and 'n'");
    spec.h = doc.at("h").get<std::int64_t>();
    spec.m = rational_field(doc.at("m"), "m");
    spec.n = doc.at("n").get<std::int64_t>();
    if (doc.contains("hoard_cap")) spec.hoard_cap = doc.at("hoard_cap").get<int>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
}

GameSpec load_game_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_game_spec(doc);
}

nlohmann::json to_json(const GameSpec& spec) {
  nlohmann::json doc;
  doc["types"] = nlohmann::json::array();
  for (const auto& e : spec.types) {
    nlohmann::json jt;
    jt["alpha"] = e.type.alpha;
    jt["beta"] = e.type.beta;
    jt["gamma"] = e.type.gamma;
    jt["delta"] = e.type.delta;
    jt["rho"] = e.type.rho;
    jt["chi"] = e.type.chi;
    switch (e.type.behavior.kind) {
      case BehaviorKind::Standard: jt["behavior"] = "standard"; break;
      case BehaviorKind::Altruist: jt["behavior"] = "altruist"; break;
      case BehaviorKind::Hoarder: jt["behavior"] = "hoarder"; break;
      case BehaviorKind::FixedThreshold:
        jt["behavior"] = {{"fixed", e.type.behavior.fixed_threshold}};
        break;
    }
    jt["fraction"] = e.fraction.str();
    doc["types"].push_back(jt);
  }
  doc["h"] = spec.h;
  doc["m"] = spec.m.str();
  doc["n"] = spec.n;
  doc["hoard_cap"] = spec.hoard_cap;
  return doc;
}

}  // namespace scrip
