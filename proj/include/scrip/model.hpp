#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scrip/error.hpp"

namespace scrip {

/// Exact non-negative-or-signed rational used for fractions and money so
/// that integrality constraints can be checked without rounding.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  /// Accepts "p/q", integers, and finite decimals ("0.25").
  static Rational parse(std::string_view text);
  /// Best rational approximation with denominator <= max_den (continued fractions).
  static Rational approximate(double x, std::int64_t max_den);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// True when this * k is an integer.
  bool scales_to_integer(std::int64_t k) const;
  std::string str() const;

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend bool operator<(Rational a, Rational b);
  friend bool operator<=(Rational a, Rational b) { return !(b < a); }
};

enum class BehaviorKind { Standard, Altruist, Hoarder, FixedThreshold };

struct Behavior {
  BehaviorKind kind = BehaviorKind::Standard;
  int fixed_threshold = 0;  // only meaningful for FixedThreshold

  static Behavior standard() { return {}; }
  static Behavior altruist() { return {BehaviorKind::Altruist, 0}; }
  static Behavior hoarder() { return {BehaviorKind::Hoarder, 0}; }
  static Behavior fixed(int k) { return {BehaviorKind::FixedThreshold, k}; }

  bool is_standard() const { return kind == BehaviorKind::Standard; }
  bool always_volunteers() const {
    return kind == BehaviorKind::Altruist || kind == BehaviorKind::Hoarder;
  }
  friend bool operator==(const Behavior&, const Behavior&) = default;
};

struct AgentType {
  double alpha = 0.0;  // cost of satisfying a request (utils)
  double beta = 1.0;   // per-round probability of being able to serve
  double gamma = 1.0;  // utility of a satisfied request
  double delta = 0.95; // discount parameter
  double rho = 1.0;    // relative request rate
  double chi = 1.0;    // relative selection weight
  Behavior behavior;

  double omega() const { return beta * chi / rho; }
  friend bool operator==(const AgentType&, const AgentType&) = default;
};

struct TypeEntry {
  AgentType type;
  Rational fraction;
};

struct GameSpec {
  std::vector<TypeEntry> types;
  std::int64_t h = 1;
  Rational m;
  std::int64_t n = 1;
  int hoard_cap = 5000;
};

/// A GameSpec whose invariants have been checked and whose request rates
/// have been normalized so that sum_t rho_t f_t = 1. Immutable.
class ValidatedSpec {
 public:
  std::size_t size() const { return spec_.types.size(); }
  const AgentType& type(std::size_t t) const { return spec_.types[t].type; }
  double fraction(std::size_t t) const { return fractions_[t]; }
  Rational fraction_exact(std::size_t t) const { return spec_.types[t].fraction; }
  std::int64_t h() const { return spec_.h; }
  std::int64_t n() const { return spec_.n; }
  double m() const { return spec_.m.value(); }
  Rational m_exact() const { return spec_.m; }
  int hoard_cap() const { return spec_.hoard_cap; }

  /// Total number of agents, h * n.
  std::int64_t agents() const { return spec_.h * spec_.n; }
  /// Agents of type t, f_t * h * n.
  std::int64_t agents_of(std::size_t t) const;
  /// Total money m * h * n.
  std::int64_t total_money() const;

  const GameSpec& spec() const { return spec_; }

  /// Same population with a different average money supply; revalidated.
  ValidatedSpec with_money(Rational m) const;
  ValidatedSpec with_replicas(std::int64_t n) const;

 private:
  friend ValidatedSpec validate_spec(const GameSpec& spec);
  GameSpec spec_;
  std::vector<double> fractions_;
};

ValidatedSpec validate_spec(const GameSpec& spec);

/// One threshold per type; an agent volunteers iff its wealth < k_t.
using ThresholdProfile = std::vector<int>;

/// d(t, i): fraction of all agents that are type t and hold i dollars.
struct WealthDistribution {
  std::vector<std::vector<double>> d;

  std::size_t types() const { return d.size(); }
  double type_mass(std::size_t t) const;
  double mean() const;
  /// Fraction of agents with no money, sum_t d(t, 0).
  double zeta() const;
  /// Marginal over types: fraction of agents holding i dollars.
  std::vector<double> marginal() const;
};

/// Initial profile for a spec: fixed strategies for nonstandard types,
/// `top` for standard ones.
ThresholdProfile initial_profile(const ValidatedSpec& spec, int top);

GameSpec parse_game_spec(const nlohmann::json& doc);
GameSpec load_game_spec(const std::string& path);
nlohmann::json to_json(const GameSpec& spec);

}  // namespace scrip
