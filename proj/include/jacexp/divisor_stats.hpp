#pragma once

/// @file divisor_stats.hpp
/// @brief Exact counts of integers and shifted primes with a divisor in (y, z],
/// and the upper-estimate formula those counts are compared against.

#include <cstdint>
#include <string>
#include <vector>

#include "jacexp/prime_engine.hpp"

namespace jacexp::divisors {

/// delta = 1 - (1 + log log 2) / log 2
double ford_delta();

struct DivisorWindow {
  std::uint64_t x = 0;
  double y = 0;
  double z = 0;

  /// General counting: 0 < y <= z <= x (y == z is the empty interval).
  void validate() const;

  /// Empty string when 3 <= y <= sqrt(x) and 2y <= z <= y^2, otherwise the
  /// first violated condition.
  std::string estimate_range_violation() const;
};

struct FordEstimate {
  double u = 0;      // y^(1+u) = z
  double delta = 0;
  double value = 0;  // x * u^delta * log(2/u)^(-3/2)
};

/// Number of n <= x having a divisor d with y < d <= z. Marks multiples of each
/// such d over a segmented bit array; segments may be split over `threads`.
std::uint64_t count_H(const DivisorWindow& w, unsigned threads = 1);

/// Number of primes p <= x such that p + lambda (when positive) has a divisor
/// in (y, z]. The sieve must cover x.
std::uint64_t count_H_shifted(const DivisorWindow& w, std::int64_t lambda,
                              const primes::PrimeSieve& sieve);
std::uint64_t count_H_shifted(const DivisorWindow& w, std::int64_t lambda);

/// DomainError naming the violated range condition when the window is outside
/// the estimate's range.
FordEstimate ford_upper_estimate(const DivisorWindow& w);

enum class ZRule { kDouble, kSquare, kFixed };

struct RatioRow {
  double y = 0;
  double z = 0;
  double u = 0;
  std::uint64_t H = 0;
  std::uint64_t H_shifted = 0;
  double estimate = 0;
  double ratio = 0;          // H / estimate
  double ratio_shifted = 0;  // H_shifted * log x / H
};

struct RatioSweepOptions {
  ZRule rule = ZRule::kDouble;
  double fixed_z = 0;  // used by ZRule::kFixed
  std::int64_t lambda = -1;
  unsigned threads = 1;
};

/// One row per y (sorted ascending). Every generated window must satisfy the
/// estimate's range, otherwise DomainError.
std::vector<RatioRow> ratio_sweep(std::uint64_t x, std::vector<double> y_list,
                                  const RatioSweepOptions& opts = {});

}  // namespace jacexp::divisors
