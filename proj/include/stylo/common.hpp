#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stylo {

/// Bad or inconsistent input data (exit code 1 at the CLI).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required upstream artifact is missing (exit code 2).
class DependencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Programmer-facing precondition failure on numerical routines.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using UnixSeconds = std::int64_t;
inline constexpr UnixSeconds kSecondsPerDay = 86400;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

/// Number of Unicode scalar values in a UTF-8 string. Invalid bytes count as one each.
std::size_t utf8_length(std::string_view text) noexcept;

/// Decode UTF-8 into code points; invalid sequences map to U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view text);
void utf8_append(std::string& out, char32_t cp);

/// Arithmetic mean; nullopt for empty input.
std::optional<double> mean_of(std::span<const double> xs);

/// Sample standard deviation (n-1); nullopt for n < 2.
std::optional<double> sample_sd(std::span<const double> xs);

/// Percentile with linear interpolation between closest ranks (h = (n-1)p).
/// `p` in [0,1]; input need not be sorted.
double percentile_linear(std::vector<double> xs, double p);

/// Shortest round-trip decimal representation, used for all emitted numbers.
std::string format_double(double value);

} // namespace stylo
