#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scrip {

enum class ErrorCode {
  BadParameter,
  NonIntegralPopulation,
  NonIntegralMoney,
  InfeasibleMoney,
  DegenerateVolunteers,
  UnboundedThreshold,
  NonConvergence,
  IterationCap,
  BadBracket,
  CrashedEconomy,
  NegativeFraction,
  NoExplanation,
  InconsistentLambda,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Numeric failures (bracketing, iteration caps) vs. bad input vs. I/O.
enum class ErrorClass { Config, Numeric, Io };
ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by explanation_from_lambda; carries the offending wealth level.
class NegativeFractionError : public Error {
 public:
  NegativeFractionError(int index, double value);

  int index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  int index_;
  double value_;
};

}  // namespace scrip
