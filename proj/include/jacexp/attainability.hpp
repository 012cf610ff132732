#pragma once

/// @file attainability.hpp
/// @brief Which group orders and structures occur over F_p, and closed-form
/// bounds on Jacobian exponents.
///
/// Membership questions (is N in the Hasse window, is a structure attainable)
/// are answered in exact integer arithmetic. Bound evaluators return doubles.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace jacexp::attain {

struct HasseWindow {
  std::uint64_t q = 0;
  unsigned g = 1;
  double lower = 0;  // (sqrt(q) - 1)^(2g)
  double upper = 0;  // (sqrt(q) + 1)^(2g)
  std::uint64_t first = 0;  // ceil(lower)
  std::uint64_t last = 0;   // floor(upper)

  bool contains(std::uint64_t N) const { return N >= first && N <= last; }
  std::uint64_t width() const { return last - first + 1; }
};

/// q prime >= 5, g >= 1. The integer range is exact whenever the binomial
/// expansion of (sqrt(q) +- 1)^(2g) fits in 128 bits.
HasseWindow hasse_window(std::uint64_t q, unsigned g);

/// (q + 1 - N)^2 <= 4q
bool in_hasse_interval(std::uint64_t q, std::uint64_t N);

/// (sqrt(q) + sign)^n = rational + irrational * sqrt(q), or nullopt on overflow.
struct QuadraticSurd {
  __int128 rational = 0;
  __int128 irrational = 0;
};
std::optional<QuadraticSurd> sqrt_shift_power(std::uint64_t q, int sign, unsigned n);

enum class OrderKind { kOrdinary, kSupersingular, kNotAttainable };

struct AttainableOrder {
  std::uint64_t N = 0;
  std::int64_t trace = 0;  // p + 1 - N
  OrderKind kind = OrderKind::kNotAttainable;
};

/// Over a prime field p >= 5 every trace with a^2 <= 4p occurs; a = 0 is the
/// supersingular class.
AttainableOrder waterhouse_attainable(std::uint64_t p, std::uint64_t N);

struct Structure {
  std::uint64_t m1 = 1;
  std::uint64_t m2 = 1;

  friend bool operator==(const Structure&, const Structure&) = default;
  friend auto operator<=>(const Structure&, const Structure&) = default;
};

/// Largest d with d | p - 1 and d^2 | N; every divisor of it is an attainable m1.
std::uint64_t max_first_factor(std::uint64_t p, std::uint64_t N);

/// All Z/m1 x Z/m2 with m1 | m2, m1 m2 = N, m1 | p - 1, sorted by m2 ascending.
/// DomainError unless N is an ordinary attainable order.
std::vector<Structure> ruck_structures(std::uint64_t p, std::uint64_t N);

struct OracleMinimum {
  std::uint64_t exponent = 0;
  std::uint64_t N = 0;
  Structure structure;
};

/// Smallest exponent over ordinary orders and their attainable structures;
/// ties go to the smallest N.
OracleMinimum min_exponent_oracle(std::uint64_t p);

/// sqrt(q) - 1, independent of the genus.
double trivial_exponent_bound(double q, unsigned g);

/// ((sqrt(q) - 1)^(2g) / (k1^s k2^(s-1) ... ks))^(1 / (2g - s)); k has length s,
/// 1 <= s <= 2g - 1.
double exponent_floor(double q, unsigned g, unsigned s, std::span<const std::uint64_t> k);

struct QkBound {
  double U = 0;      // possible cardinalities
  double V = 0;      // possible q per cardinality
  double bound = 0;  // U * V
};

/// k has length 2g - 1.
QkBound qk_bound(double x, unsigned g, std::span<const std::uint64_t> k);

struct KSetMembership {
  bool in_K = false;
  bool outside_interval = false;  // k1 ... kg not in (x^(1/4-3eta), x^(1/4+3eta)]
  bool weighted_g = false;        // k1^g k2^(g-1) ... kg >= x^(g/4 - 2g eta)
  bool weighted_2g = false;       // k1^(2g-1) ... k_(2g-1) >= x^(g - 3/4 - 2 eta)
  double interval_lo = 0;
  double interval_hi = 0;
};

/// 0 < eta < 1/(100 g); k has length 2g - 1.
KSetMembership k_set_membership(double x, double eta, unsigned g, std::span<const std::uint64_t> k);

}  // namespace jacexp::attain
