#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace careflow {

/// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr Timestamp kMillisPerHour = 3'600'000;

// Error categories. The CLI maps each one to a distinct exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded pseudo-random source with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard.
/// The standard distributions are implementation-defined, so every derived
/// quantity (uniform doubles, bounded integers, permutations) is computed
/// here by hand. See docs/formats.md for the exact recipes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). Rejection sampling on the low residue.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates, swapping i with below(i + 1) for i = n-1 down to 1.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer over (seed, stream); used to derive independent
/// per-stage and per-patient seeds from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// The permutation of 0..n-1 produced by Rng(seed).shuffle on the identity.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z`. Throws DataError on malformed input.
Timestamp parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SS.fffZ`.
std::string format_iso8601(Timestamp ms);

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
/// Throws DataError on an unterminated quote.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict numeric parses; the whole field must be consumed.
bool parse_int64(std::string_view text, std::int64_t& out);
bool parse_double(std::string_view text, double& out);

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Throws ConfigError on a line without '=' or a repeated key.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Removes a trailing '\r' (CRLF input).
inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace careflow
