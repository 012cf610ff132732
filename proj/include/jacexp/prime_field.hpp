#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace jacexp::ec {

/// Largest supported characteristic: products of two residues stay below 2^122.
inline constexpr std::uint64_t kMaxFieldPrime = std::uint64_t{1} << 61;

/// Quadratic-character and square-root tables are built when p is at most this.
inline constexpr std::uint64_t kFieldTableLimit = std::uint64_t{1} << 22;

/// Arithmetic in F_p for a prime 5 <= p < 2^61.
///
/// Residues are canonical (in [0, p)). When built with tables (small p) the
/// quadratic character and square roots are lookups; otherwise Euler's
/// criterion and Tonelli-Shanks.
class PrimeField {
 public:
  /// Throws ArgumentError unless p is prime and below kMaxFieldPrime,
  /// UnsupportedFieldError for p in {2, 3}.
  explicit PrimeField(std::uint64_t p, bool with_tables = false);

  std::uint64_t p() const noexcept { return p_; }
  bool has_tables() const noexcept { return !chi_.empty(); }

  std::uint64_t reduce(std::int64_t v) const noexcept {
    const auto sp = static_cast<std::int64_t>(p_);
    return static_cast<std::uint64_t>(((v % sp) + sp) % sp);
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept {
    const std::uint64_t s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept {
    return a >= b ? a - b : a + p_ - b;
  }
  std::uint64_t neg(std::uint64_t a) const noexcept { return a == 0 ? 0 : p_ - a; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
    if (small_) return a * b % p_;
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p_);
  }
  std::uint64_t sqr(std::uint64_t a) const noexcept { return mul(a, a); }
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const noexcept;
  /// Requires a != 0.
  std::uint64_t inv(std::uint64_t a) const noexcept;

  /// Quadratic character: 0, +1 or -1.
  int legendre(std::uint64_t a) const noexcept {
    if (!chi_.empty()) return chi_[a];
    return legendre_by_power(a);
  }
  int legendre_by_power(std::uint64_t a) const noexcept;

  /// Some square root of a, or nullopt when a is a non-residue.
  std::optional<std::uint64_t> sqrt(std::uint64_t a) const;

 private:
  std::uint64_t p_;
  bool small_;  // p < 2^32, so 64-bit products suffice
  std::vector<std::int8_t> chi_;
  std::vector<std::uint32_t> root_;  // root_[r] valid when chi_[r] >= 0
};

}  // namespace jacexp::ec
