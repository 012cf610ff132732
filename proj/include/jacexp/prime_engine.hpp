#pragma once

/// @file prime_engine.hpp
/// @brief Sieving, factorization and elementary sums over primes.
///
/// Everything downstream (divisor counts, curve surveys, the theorem checks)
/// reads primality from a PrimeSieve and divisors from a Factorization.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace jacexp::primes {

// -----------------------------------------------------------------------------
// Word-size modular arithmetic
// -----------------------------------------------------------------------------

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

/// floor(sqrt(n)), exact for every 64-bit n.
std::uint64_t isqrt(std::uint64_t n);

/// floor(sqrt(n)) for 128-bit n.
unsigned __int128 isqrt128(unsigned __int128 n);

/// Deterministic Miller-Rabin; exact for all n < 2^64.
bool is_prime_u64(std::uint64_t n);

// -----------------------------------------------------------------------------
// Sieve
// -----------------------------------------------------------------------------

/// Largest limit accepted by PrimeSieve (odd-only bit table, 256 MiB at the cap).
inline constexpr std::uint64_t kSieveCeiling = std::uint64_t{1} << 32;

/// Entries (odd numbers) sieved per segment during construction.
inline constexpr std::uint64_t kSegmentEntries = std::uint64_t{1} << 20;

/// Immutable primality table over [0, limit], built by a segmented
/// Eratosthenes pass. Safe to share between threads once constructed.
class PrimeSieve {
 public:
  /// Throws ArgumentError when limit < 2 or limit > kSieveCeiling.
  explicit PrimeSieve(std::uint64_t limit);

  std::uint64_t limit() const noexcept { return limit_; }

  /// Requires n <= limit().
  bool is_prime(std::uint64_t n) const noexcept {
    if (n < 3) return n == 2;
    if ((n & 1) == 0) return false;
    const std::uint64_t i = n >> 1;
    return (odd_bits_[i >> 6] >> (i & 63)) & 1;
  }

  /// Number of primes <= x; CapacityError if x > limit().
  std::uint64_t count_up_to(std::uint64_t x) const;

  /// Calls fn(p) for each prime p in [lo, hi], ascending. hi is clamped to limit().
  void for_each_prime(std::uint64_t lo, std::uint64_t hi,
                      const std::function<void(std::uint64_t)>& fn) const;

  std::vector<std::uint64_t> primes(std::uint64_t lo, std::uint64_t hi) const;

 private:
  std::uint64_t limit_;
  // bit i set <=> 2i+1 is prime
  std::vector<std::uint64_t> odd_bits_;
};

// -----------------------------------------------------------------------------
// Factorization
// -----------------------------------------------------------------------------

/// Trial division covers primes up to this bound; larger cofactors are split
/// by Pollard-Brent rho with a fixed seed.
inline constexpr std::uint64_t kTrialDivisionBound = 1'000'000;

struct PrimePower {
  std::uint64_t prime;
  unsigned multiplicity;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
  std::uint64_t n = 1;
  std::vector<PrimePower> factors;  // ascending by prime

  /// Product of prime^multiplicity (wraps silently past 2^64; callers hold n < 2^64).
  std::uint64_t product() const;

  /// All divisors, ascending.
  std::vector<std::uint64_t> divisors() const;
};

/// ArgumentError for n == 0. Reproducible run-to-run.
Factorization factorize(std::uint64_t n);

// -----------------------------------------------------------------------------
// Prime counts and sums
// -----------------------------------------------------------------------------

/// Number of primes q <= x with q = a (mod k). x is floored.
/// CapacityError when floor(x) exceeds the sieve; ArgumentError when k == 0 or x < 0.
std::uint64_t prime_count(const PrimeSieve& sieve, double x, std::uint64_t k, std::int64_t a);

/// Builds a sieve covering x.
std::uint64_t prime_count(double x, std::uint64_t k, std::int64_t a);

/// Sum of 1/p over primes y < p <= z.
double mertens_sum(const PrimeSieve& sieve, double y, double z);
double mertens_sum(double y, double z);

/// True iff some divisor d of n satisfies y < d <= z.
bool has_divisor_in(std::uint64_t n, double y, double z);
bool has_divisor_in(const Factorization& f, double y, double z);

}  // namespace jacexp::primes
