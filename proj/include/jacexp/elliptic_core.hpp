#pragma once

/// @file elliptic_core.hpp
/// @brief Point counting and certified group structure for y^2 = x^3 + ax + b over F_p.
///
/// E(F_p) is isomorphic to Z/m1 x Z/m2 with m1 | m2 and m1 | p - 1; the exponent
/// is m2. Structures are either certified or reported as UncertifiedError,
/// never guessed.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "jacexp/prime_engine.hpp"
#include "jacexp/prime_field.hpp"

namespace jacexp::ec {

/// Primes up to this bound are certified by enumerating every point.
inline constexpr std::uint64_t kDefaultExhaustiveThreshold = 2000;

struct WeierstrassCurve {
  std::uint64_t p = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  WeierstrassCurve() = default;
  /// Validates p (prime, 5 <= p < 2^61), a, b in [0, p) and 4a^3 + 27b^2 != 0.
  WeierstrassCurve(std::uint64_t p, std::uint64_t a, std::uint64_t b);

  friend bool operator==(const WeierstrassCurve&, const WeierstrassCurve&) = default;
  friend auto operator<=>(const WeierstrassCurve&, const WeierstrassCurve&) = default;
};

bool is_nonsingular(std::uint64_t p, std::uint64_t a, std::uint64_t b);

struct CurvePoint {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  bool infinity = true;

  static CurvePoint at_infinity() { return {}; }
  static CurvePoint affine(std::uint64_t x, std::uint64_t y) { return {x, y, false}; }

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct GroupStructure {
  std::uint64_t q = 0;
  std::uint64_t N = 0;
  std::uint64_t m1 = 1;
  std::uint64_t m2 = 1;

  std::uint64_t exponent() const { return m2; }
  friend bool operator==(const GroupStructure&, const GroupStructure&) = default;
};

struct StructureOptions {
  std::uint64_t p_exhaustive = kDefaultExhaustiveThreshold;
  unsigned max_samples = 200;
};

/// Quadratic character of a modulo an odd prime p, by a^((p-1)/2).
int legendre(std::int64_t a, std::uint64_t p);

/// x^3 + ax + b
std::uint64_t rhs(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t x);
bool on_curve(const WeierstrassCurve& E, const CurvePoint& P);

/// #E(F_p) = p + 1 + sum_x chi(x^3 + ax + b). O(p).
std::uint64_t point_count(const WeierstrassCurve& E);
std::uint64_t point_count(const WeierstrassCurve& E, const PrimeField& F);

/// Chord-tangent group law. Off-curve inputs raise ArgumentError.
CurvePoint negate(const WeierstrassCurve& E, const CurvePoint& P);
CurvePoint add(const WeierstrassCurve& E, const CurvePoint& P, const CurvePoint& Q);
CurvePoint scalar_mul(const WeierstrassCurve& E, std::int64_t n, const CurvePoint& P);

/// Exact order of P given the factored group order.
std::uint64_t point_order(const WeierstrassCurve& E, const CurvePoint& P,
                          const primes::Factorization& group_order);

/// Number of distinct roots of x^3 + ax + b in F_p (0, 1 or 3).
unsigned cubic_root_count(const WeierstrassCurve& E, const PrimeField& F);

/// #E[m](F_p), the points killed by m, by enumerating every x in F_p.
std::uint64_t torsion_count(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t m);

GroupStructure group_structure(const WeierstrassCurve& E, const StructureOptions& opts = {});
/// Hot-path variant: the caller supplies the field and the point count.
GroupStructure group_structure(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t N,
                               const StructureOptions& opts = {});

std::uint64_t exponent(const WeierstrassCurve& E, const StructureOptions& opts = {});

bool is_supersingular(const WeierstrassCurve& E);

/// 1728 * 4a^3 / (4a^3 + 27b^2) mod p
std::uint64_t j_invariant(const WeierstrassCurve& E);

/// (a d^2, b d^3) for the least non-residue d.
WeierstrassCurve quadratic_twist(const WeierstrassCurve& E);

/// One nonsingular (a, b) per isomorphism class over F_p, each the
/// lexicographically smallest member of its class under (a, b) -> (u^4 a, u^6 b),
/// listed in lexicographic order.
std::vector<WeierstrassCurve> class_representatives(std::uint64_t p);

using CurveFilter = std::function<bool(const WeierstrassCurve&)>;

/// First class representative (lexicographic) with exactly N points, or
/// nullopt when N is not an attainable order. ConsistencyError if an attainable
/// order is not realized by the scan.
std::optional<WeierstrassCurve> find_curve_with_order(std::uint64_t p, std::uint64_t N);

/// First class representative passing `filter` whose group is Z/m1 x Z/m2.
std::optional<WeierstrassCurve> find_curve_with_structure(std::uint64_t p, std::uint64_t m1,
                                                          std::uint64_t m2,
                                                          const StructureOptions& opts = {},
                                                          const CurveFilter& filter = {});

}  // namespace jacexp::ec
