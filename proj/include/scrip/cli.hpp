#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "scrip/model.hpp"

namespace scrip::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericError = 3;
inline constexpr int kIoError = 4;

/// Parses "LO:STEP:HI" into an inclusive grid of exact rationals.
std::vector<Rational> parse_money_grid(const std::string& text);

/// Parses a count such as "10000000" or "1e7".
std::int64_t parse_count(const std::string& text);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a(std::string_view bytes);

/// Runs one command; outputs go to `out`, diagnostics and error JSON to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, char** argv);

}  // namespace scrip::cli
