#include "jacexp/attainability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "jacexp/errors.hpp"
#include "jacexp/prime_engine.hpp"

namespace jacexp::attain {

namespace {

void require_field_prime(std::uint64_t p, const char* who) {
  if (p < 5 || !primes::is_prime_u64(p)) {
    throw ArgumentError(std::string(who) + ": q=" + std::to_string(p) + " must be a prime >= 5");
  }
}

std::uint64_t floor_two_sqrt(std::uint64_t q) {
  return static_cast<std::uint64_t>(primes::isqrt128(static_cast<unsigned __int128>(q) * 4));
}

}  // namespace

std::uint64_t max_first_factor(std::uint64_t p, std::uint64_t N) {
  const std::uint64_t g = std::gcd(p - 1, N);
  std::uint64_t d = 1;
  for (const auto& [ell, e] : primes::factorize(g).factors) {
    std::uint64_t vN = 0;
    for (std::uint64_t t = N; t % ell == 0; t /= ell) ++vN;
    const std::uint64_t take = std::min<std::uint64_t>(e, vN / 2);
    for (std::uint64_t i = 0; i < take; ++i) d *= ell;
  }
  return d;
}

std::optional<QuadraticSurd> sqrt_shift_power(std::uint64_t q, int sign, unsigned n) {
  QuadraticSurd r{1, 0};
  const __int128 s = sign >= 0 ? 1 : -1;
  const auto qq = static_cast<__int128>(q);
  for (unsigned i = 0; i < n; ++i) {
    // (A + B sqrt q)(sqrt q + s) = (sA + Bq) + (A + sB) sqrt q
    __int128 bq = 0, rational = 0, irrational = 0;
    if (__builtin_mul_overflow(r.irrational, qq, &bq)) return std::nullopt;
    if (__builtin_add_overflow(s * r.rational, bq, &rational)) return std::nullopt;
    if (__builtin_add_overflow(r.rational, s * r.irrational, &irrational)) return std::nullopt;
    r = {rational, irrational};
  }
  return r;
}

bool in_hasse_interval(std::uint64_t q, std::uint64_t N) {
  const __int128 t = static_cast<__int128>(q) + 1 - static_cast<__int128>(N);
  return t * t <= static_cast<__int128>(q) * 4;
}

HasseWindow hasse_window(std::uint64_t q, unsigned g) {
  require_field_prime(q, "hasse_window");
  if (g < 1) throw ArgumentError("hasse_window: genus must be >= 1");
  HasseWindow w;
  w.q = q;
  w.g = g;
  const double r = std::sqrt(static_cast<double>(q));
  w.lower = std::pow(r - 1.0, 2.0 * g);
  w.upper = std::pow(r + 1.0, 2.0 * g);
  if (g == 1) {
    const std::uint64_t t = floor_two_sqrt(q);
    w.first = q + 1 - t;
    w.last = q + 1 + t;
    return w;
  }
  // (sqrt q + 1)^(2g) = A + B sqrt q and (sqrt q - 1)^(2g) = A - B sqrt q; B sqrt q is irrational
  const auto plus = sqrt_shift_power(q, +1, 2 * g);
  bool exact = false;
  if (plus) {
    __int128 b2q = 0;
    if (!__builtin_mul_overflow(plus->irrational, plus->irrational, &b2q) &&
        !__builtin_mul_overflow(b2q, static_cast<__int128>(q), &b2q)) {
      const auto floor_bsq = static_cast<__int128>(primes::isqrt128(static_cast<unsigned __int128>(b2q)));
      const __int128 hi = plus->rational + floor_bsq;
      const __int128 lo = plus->rational - floor_bsq;
      if (hi <= static_cast<__int128>(UINT64_MAX)) {
        w.first = static_cast<std::uint64_t>(lo);
        w.last = static_cast<std::uint64_t>(hi);
        exact = true;
      }
    }
  }
  if (!exact) {
    const long double rl = std::sqrt(static_cast<long double>(q));
    const long double lo = std::pow(rl - 1.0L, 2.0L * g);
    const long double hi = std::pow(rl + 1.0L, 2.0L * g);
    if (hi >= 1.8e19L) throw CapacityError("hasse_window: upper bound exceeds 64-bit range");
    w.first = static_cast<std::uint64_t>(std::ceil(lo));
    w.last = static_cast<std::uint64_t>(std::floor(hi));
  }
  return w;
}

AttainableOrder waterhouse_attainable(std::uint64_t p, std::uint64_t N) {
  require_field_prime(p, "waterhouse_attainable");
  AttainableOrder o;
  o.N = N;
  o.trace = static_cast<std::int64_t>(static_cast<__int128>(p) + 1 - static_cast<__int128>(N));
  if (!in_hasse_interval(p, N)) {
    o.kind = OrderKind::kNotAttainable;
  } else if (o.trace == 0) {
    o.kind = OrderKind::kSupersingular;
  } else {
    // |trace| <= 2 sqrt(p) < p, so gcd(trace, p) = 1 automatically
    o.kind = OrderKind::kOrdinary;
  }
  return o;
}

std::vector<Structure> ruck_structures(std::uint64_t p, std::uint64_t N) {
  const AttainableOrder o = waterhouse_attainable(p, N);
  if (o.kind == OrderKind::kSupersingular) {
    throw DomainError("ruck_structures: N=" + std::to_string(N) + " is supersingular over F_" +
                      std::to_string(p));
  }
  if (o.kind == OrderKind::kNotAttainable) {
    throw DomainError("ruck_structures: N=" + std::to_string(N) + " is outside the Hasse window of F_" +
                      std::to_string(p));
  }
  const std::uint64_t dmax = max_first_factor(p, N);
  std::vector<Structure> out;
  for (std::uint64_t m1 : primes::factorize(dmax).divisors()) out.push_back({m1, N / m1});
  std::sort(out.begin(), out.end(), [](const Structure& l, const Structure& r) { return l.m2 < r.m2; });
  return out;
}

OracleMinimum min_exponent_oracle(std::uint64_t p) {
  const HasseWindow w = hasse_window(p, 1);
  OracleMinimum best;
  for (std::uint64_t N = w.first; N <= w.last; ++N) {
    if (N == p + 1) continue;  // supersingular
    const std::uint64_t m1 = max_first_factor(p, N);
    const std::uint64_t m2 = N / m1;
    if (best.exponent == 0 || m2 < best.exponent) best = {m2, N, {m1, m2}};
  }
  return best;
}

double trivial_exponent_bound(double q, unsigned /*g*/) {
  if (!(q >= 2)) throw ArgumentError("trivial_exponent_bound: q must be >= 2");
  return std::sqrt(q) - 1.0;
}

double exponent_floor(double q, unsigned g, unsigned s, std::span<const std::uint64_t> k) {
  if (g < 1) throw ArgumentError("exponent_floor: genus must be >= 1");
  if (s < 1 || s > 2 * g - 1) {
    throw ArgumentError("exponent_floor: s=" + std::to_string(s) + " outside [1, " +
                        std::to_string(2 * g - 1) + "]");
  }
  if (k.size() != s) {
    throw ArgumentError("exponent_floor: expected " + std::to_string(s) + " k values, got " +
                        std::to_string(k.size()));
  }
  double log_denominator = 0;
  for (unsigned i = 0; i < s; ++i) {
    if (k[i] == 0) throw ArgumentError("exponent_floor: k values must be positive");
    log_denominator += static_cast<double>(s - i) * std::log(static_cast<double>(k[i]));
  }
  const double log_numerator = 2.0 * g * std::log(std::sqrt(q) - 1.0);
  return std::exp((log_numerator - log_denominator) / static_cast<double>(2 * g - s));
}

QkBound qk_bound(double x, unsigned g, std::span<const std::uint64_t> k) {
  if (g < 1) throw ArgumentError("qk_bound: genus must be >= 1");
  if (k.size() != 2 * g - 1) {
    throw ArgumentError("qk_bound: expected " + std::to_string(2 * g - 1) + " k values, got " +
                        std::to_string(k.size()));
  }
  const double root = std::sqrt(x) + 1.0;
  double denominator = 1;
  double first_g = 1;
  for (unsigned i = 0; i < k.size(); ++i) {
    if (k[i] == 0) throw ArgumentError("qk_bound: k values must be positive");
    const double kd = static_cast<double>(k[i]);
    denominator *= std::pow(kd, static_cast<double>(2 * g - i));
    if (i < g) first_g *= kd;
  }
  QkBound r;
  r.U = std::pow(root, 2.0 * g) / denominator;
  r.V = 5.0 * root / first_g + 1.0;
  r.bound = r.U * r.V;
  return r;
}

KSetMembership k_set_membership(double x, double eta, unsigned g, std::span<const std::uint64_t> k) {
  if (g < 1) throw ArgumentError("k_set_membership: genus must be >= 1");
  if (!(eta > 0) || !(eta < 1.0 / (100.0 * g))) {
    throw ArgumentError("k_set_membership: eta must lie in (0, 1/(100g))");
  }
  if (k.size() != 2 * g - 1) {
    throw ArgumentError("k_set_membership: expected " + std::to_string(2 * g - 1) + " k values");
  }
  if (!(x > 1)) throw ArgumentError("k_set_membership: x must exceed 1");
  const double lx = std::log(x);
  KSetMembership m;
  m.interval_lo = std::pow(x, 0.25 - 3 * eta);
  m.interval_hi = std::pow(x, 0.25 + 3 * eta);

  long double log_prod = 0, log_weighted_g = 0, log_weighted_2g = 0;
  for (unsigned i = 0; i < k.size(); ++i) {
    if (k[i] == 0) throw ArgumentError("k_set_membership: k values must be positive");
    const long double lk = std::log(static_cast<long double>(k[i]));
    if (i < g) {
      log_prod += lk;
      log_weighted_g += static_cast<long double>(g - i) * lk;
    }
    log_weighted_2g += static_cast<long double>(2 * g - 1 - i) * lk;
  }
  const long double lo = (0.25L - 3 * eta) * lx;
  const long double hi = (0.25L + 3 * eta) * lx;
  m.outside_interval = !(log_prod > lo && log_prod <= hi);
  m.weighted_g = log_weighted_g >= (g / 4.0L - 2.0L * g * eta) * lx;
  m.weighted_2g = log_weighted_2g >= (g - 0.75L - 2.0L * eta) * lx;
  m.in_K = m.outside_interval && m.weighted_g && m.weighted_2g;
  return m;
}

}  // namespace jacexp::attain
