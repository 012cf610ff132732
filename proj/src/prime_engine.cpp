#include "jacexp/prime_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "jacexp/errors.hpp"

namespace jacexp::primes {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  // correct the floating estimate in both directions
  while (r > 0 && static_cast<unsigned __int128>(r) * r > n) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

unsigned __int128 isqrt128(unsigned __int128 n) {
  if (n == 0) return 0;
  auto r = static_cast<unsigned __int128>(std::sqrt(static_cast<long double>(n)));
  // Newton steps from the estimate, then exact correction
  for (int i = 0; i < 4 && r > 0; ++i) r = (r + n / r) / 2;
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

namespace {

bool miller_rabin_witness(std::uint64_t n, std::uint64_t a, std::uint64_t d, int r) {
  std::uint64_t x = pow_mod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < r; ++i) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // first twelve primes as bases are deterministic below 3.3e24
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (!miller_rabin_witness(n, a, d, r)) return false;
  }
  return true;
}

// -----------------------------------------------------------------------------
// PrimeSieve
// -----------------------------------------------------------------------------

PrimeSieve::PrimeSieve(std::uint64_t limit) : limit_(limit) {
  if (limit < 2) throw ArgumentError("sieve limit must be at least 2");
  if (limit > kSieveCeiling) {
    throw ArgumentError("sieve limit " + std::to_string(limit) + " exceeds ceiling " +
                        std::to_string(kSieveCeiling));
  }
  const std::uint64_t entries = limit / 2 + 1;  // odd numbers 1,3,...,<= limit (+ slack)
  odd_bits_.assign((entries + 63) / 64, ~std::uint64_t{0});
  odd_bits_[0] &= ~std::uint64_t{1};  // 1 is not prime

  // base primes up to sqrt(limit), plain sieve
  const std::uint64_t root = isqrt(limit);
  std::vector<char> small(root + 1, 1);
  std::vector<std::uint64_t> base;
  for (std::uint64_t i = 3; i <= root; i += 2) {
    if (!small[i]) continue;
    base.push_back(i);
    for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = 0;
  }

  for (std::uint64_t seg = 0; seg < entries; seg += kSegmentEntries) {
    const std::uint64_t seg_end = std::min(entries, seg + kSegmentEntries);
    const std::uint64_t n_lo = 2 * seg + 1;
    for (std::uint64_t p : base) {
      std::uint64_t start = p * p;
      if (start < n_lo) {
        start = (n_lo + p - 1) / p * p;
        if ((start & 1) == 0) start += p;
      }
      for (std::uint64_t i = start >> 1; i < seg_end; i += p) {
        odd_bits_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
      }
    }
  }

  // clear everything above limit
  for (std::uint64_t i = (limit + 1) / 2; i < odd_bits_.size() * 64; ++i) {
    odd_bits_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
}

std::uint64_t PrimeSieve::count_up_to(std::uint64_t x) const {
  if (x > limit_) {
    throw CapacityError("prime count up to " + std::to_string(x) + " exceeds sieve limit " +
                        std::to_string(limit_));
  }
  if (x < 2) return 0;
  const std::uint64_t last = (x - 1) / 2;  // index of the largest odd <= x
  std::uint64_t count = 1;                  // the prime 2
  const std::uint64_t full_words = (last + 1) / 64;
  for (std::uint64_t w = 0; w < full_words; ++w) count += std::popcount(odd_bits_[w]);
  const std::uint64_t rem = (last + 1) % 64;
  if (rem) count += std::popcount(odd_bits_[full_words] & ((std::uint64_t{1} << rem) - 1));
  return count;
}

void PrimeSieve::for_each_prime(std::uint64_t lo, std::uint64_t hi,
                                const std::function<void(std::uint64_t)>& fn) const {
  hi = std::min(hi, limit_);
  if (lo > hi) return;
  if (lo <= 2 && hi >= 2) fn(2);
  std::uint64_t first = std::max<std::uint64_t>(lo, 3);
  if (first > hi) return;
  std::uint64_t i = first / 2;  // index of the first odd >= first
  if (2 * i + 1 < first) ++i;
  const std::uint64_t i_end = (hi - 1) / 2;  // inclusive
  while (i <= i_end) {
    std::uint64_t word = odd_bits_[i >> 6] >> (i & 63);
    if (word == 0) {
      i = (i | 63) + 1;
      continue;
    }
    i += std::countr_zero(word);
    if (i > i_end) break;
    fn(2 * i + 1);
    ++i;
  }
}

std::vector<std::uint64_t> PrimeSieve::primes(std::uint64_t lo, std::uint64_t hi) const {
  std::vector<std::uint64_t> out;
  for_each_prime(lo, hi, [&](std::uint64_t p) { out.push_back(p); });
  return out;
}

// -----------------------------------------------------------------------------
// Factorization
// -----------------------------------------------------------------------------

std::uint64_t Factorization::product() const {
  std::uint64_t prod = 1;
  for (const auto& [p, e] : factors) {
    for (unsigned i = 0; i < e; ++i) prod *= p;
  }
  return prod;
}

std::vector<std::uint64_t> Factorization::divisors() const {
  std::vector<std::uint64_t> divs{1};
  for (const auto& [p, e] : factors) {
    const std::size_t base = divs.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

namespace {

const std::vector<std::uint64_t>& trial_primes() {
  static const std::vector<std::uint64_t> primes =
      PrimeSieve(kTrialDivisionBound).primes(2, kTrialDivisionBound);
  return primes;
}

// Brent's variant of Pollard rho; returns a nontrivial factor of composite odd n.
std::uint64_t pollard_brent(std::uint64_t n) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ n);
  for (;;) {
    const std::uint64_t c = rng() % (n - 1) + 1;
    std::uint64_t y = rng() % n;
    const std::uint64_t m = 128;
    std::uint64_t g = 1, r = 1, q = 1, x = 0, ys = 0;
    auto f = [&](std::uint64_t v) {
      const std::uint64_t sq = mul_mod(v, v, n);
      return sq >= n - c ? sq - (n - c) : sq + c;
    };
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split_large(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = pollard_brent(n);
  split_large(d, out);
  split_large(n / d, out);
}

}  // namespace

Factorization factorize(std::uint64_t n) {
  if (n == 0) throw ArgumentError("factorize: n must be positive");
  Factorization f;
  f.n = n;
  std::uint64_t rest = n;
  for (std::uint64_t p : trial_primes()) {
    if (p * p > rest) break;
    if (rest % p) continue;
    unsigned e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    f.factors.push_back({p, e});
  }
  if (rest > 1) {
    std::vector<std::uint64_t> big;
    split_large(rest, big);
    std::sort(big.begin(), big.end());
    for (std::uint64_t p : big) {
      if (!f.factors.empty() && f.factors.back().prime == p) {
        ++f.factors.back().multiplicity;
      } else {
        f.factors.push_back({p, 1});
      }
    }
  }
  return f;
}

// -----------------------------------------------------------------------------
// Counts and sums
// -----------------------------------------------------------------------------

namespace {

std::uint64_t floor_nonneg(double v) {
  return v <= 0 ? 0 : static_cast<std::uint64_t>(std::floor(v));
}

}  // namespace

std::uint64_t prime_count(const PrimeSieve& sieve, double x, std::uint64_t k, std::int64_t a) {
  if (k == 0) throw ArgumentError("prime_count: modulus must be positive");
  if (!(x >= 0)) throw ArgumentError("prime_count: x must be non-negative");
  const std::uint64_t xi = floor_nonneg(x);
  if (xi > sieve.limit()) {
    throw CapacityError("prime_count: x=" + std::to_string(xi) + " exceeds sieve limit " +
                        std::to_string(sieve.limit()));
  }
  if (k == 1) return sieve.count_up_to(xi);
  const auto sk = static_cast<std::int64_t>(k);
  const auto residue = static_cast<std::uint64_t>(((a % sk) + sk) % sk);
  std::uint64_t count = 0;
  sieve.for_each_prime(2, xi, [&](std::uint64_t p) {
    if (p % k == residue) ++count;
  });
  return count;
}

std::uint64_t prime_count(double x, std::uint64_t k, std::int64_t a) {
  const PrimeSieve sieve(std::max<std::uint64_t>(2, floor_nonneg(x)));
  return prime_count(sieve, x, k, a);
}

double mertens_sum(const PrimeSieve& sieve, double y, double z) {
  if (!(y >= 0) || !(z >= y)) throw ArgumentError("mertens_sum: need 0 <= y <= z");
  const std::uint64_t lo = floor_nonneg(y) + 1;
  const std::uint64_t hi = floor_nonneg(z);
  if (hi > sieve.limit()) {
    throw CapacityError("mertens_sum: z=" + std::to_string(hi) + " exceeds sieve limit " +
                        std::to_string(sieve.limit()));
  }
  long double sum = 0;
  sieve.for_each_prime(lo, hi, [&](std::uint64_t p) { sum += 1.0L / static_cast<long double>(p); });
  return static_cast<double>(sum);
}

double mertens_sum(double y, double z) {
  if (!(y >= 0) || !(z >= y)) throw ArgumentError("mertens_sum: need 0 <= y <= z");
  const PrimeSieve sieve(std::max<std::uint64_t>(2, floor_nonneg(z)));
  return mertens_sum(sieve, y, z);
}

bool has_divisor_in(const Factorization& f, double y, double z) {
  if (!(z > y)) return false;
  const std::uint64_t lo = y < 0 ? 1 : floor_nonneg(y) + 1;
  const std::uint64_t hi = std::min<std::uint64_t>(f.n, z >= 1.8e19 ? f.n : floor_nonneg(z));
  if (lo > hi) return false;
  if (lo <= 1) return true;
  if (f.n >= lo && f.n <= hi) return true;

  // depth-first over exponent vectors, pruning products above hi
  bool found = false;
  auto dfs = [&](auto&& self, std::size_t idx, std::uint64_t d) -> void {
    if (found) return;
    if (d >= lo) {
      found = true;  // d <= hi is maintained by the pruning below
      return;
    }
    for (std::size_t i = idx; i < f.factors.size() && !found; ++i) {
      std::uint64_t next = d;
      for (unsigned e = 1; e <= f.factors[i].multiplicity; ++e) {
        if (next > hi / f.factors[i].prime) break;
        next *= f.factors[i].prime;
        self(self, i + 1, next);
        if (found) return;
      }
    }
  };
  dfs(dfs, 0, 1);
  return found;
}

bool has_divisor_in(std::uint64_t n, double y, double z) {
  return has_divisor_in(factorize(n), y, z);
}

}  // namespace jacexp::primes
