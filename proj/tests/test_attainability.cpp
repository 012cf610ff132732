#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "jacexp/attainability.hpp"
#include "jacexp/elliptic_core.hpp"
#include "jacexp/errors.hpp"
#include "jacexp/prime_engine.hpp"
#include "oracles.hpp"

using namespace jacexp;
using namespace jacexp::attain;

TEST_CASE("genus-1 window equals the trace condition") {
  std::mt19937_64 rng(31337);
  const primes::PrimeSieve sieve(1'000'000);
  const auto ps = sieve.primes(5, 1'000'000);
  for (int t = 0; t < 400; ++t) {
    const std::uint64_t p = ps[rng() % ps.size()];
    const auto w = hasse_window(p, 1);
    // first - 1 and last + 1 fall outside; endpoints inside
    for (const std::uint64_t N : {w.first - 1, w.first, w.last, w.last + 1, p + 1}) {
      const __int128 a = static_cast<__int128>(p) + 1 - N;
      REQUIRE(w.contains(N) == (a * a <= 4 * static_cast<__int128>(p)));
      REQUIRE(in_hasse_interval(p, N) == w.contains(N));
    }
  }
  CHECK_THROWS_AS(hasse_window(4, 1), ArgumentError);
}

TEST_CASE("higher-genus windows bracket the real bounds") {
  for (std::uint64_t q : {5ULL, 101ULL, 1009ULL, 65537ULL}) {
    for (unsigned g : {2u, 3u}) {
      const auto w = hasse_window(q, g);
      CHECK(static_cast<double>(w.first) >= w.lower - 1e-6 * w.lower);
      CHECK(static_cast<double>(w.first) - 1 < w.lower);
      CHECK(static_cast<double>(w.last) <= w.upper + 1e-6 * w.upper);
      CHECK(static_cast<double>(w.last) + 1 > w.upper);
    }
  }
  // (sqrt 5 + 1)^4 = 56 + 24 sqrt 5 = 109.66..., (sqrt 5 - 1)^4 = 2.33...
  const auto w = hasse_window(5, 2);
  CHECK(w.first == 3);
  CHECK(w.last == 109);
  const auto s = sqrt_shift_power(5, 1, 4);
  REQUIRE(s.has_value());
  CHECK(s->rational == 56);
  CHECK(s->irrational == 24);
}

TEST_CASE("attainable orders") {
  CHECK(waterhouse_attainable(7, 8).kind == OrderKind::kSupersingular);
  CHECK(waterhouse_attainable(7, 9).kind == OrderKind::kOrdinary);
  CHECK(waterhouse_attainable(7, 14).kind == OrderKind::kNotAttainable);
  CHECK(waterhouse_attainable(7, 9).trace == -1);
  CHECK_THROWS_AS(ruck_structures(7, 8), DomainError);
  CHECK_THROWS_AS(ruck_structures(7, 14), DomainError);
  CHECK(ruck_structures(7, 9) == std::vector<Structure>{{3, 3}, {1, 9}});
  CHECK(ruck_structures(11, 8) == std::vector<Structure>{{2, 4}, {1, 8}});
  CHECK(max_first_factor(13, 16) == 4);
}

// Central cross-check: the oracle's (N, m1, m2) set equals enumeration over all curves.
TEST_CASE("oracle structures equal enumerated structures") {
  for (std::uint64_t p = 5; p <= 61; ++p) {
    if (!oracle::is_prime(p)) continue;
    std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> predicted, realized;
    const auto w = hasse_window(p, 1);
    for (std::uint64_t N = w.first; N <= w.last; ++N) {
      if (N == p + 1) continue;
      for (const auto& s : ruck_structures(p, N)) predicted.insert({N, s.m1, s.m2});
    }
    for (std::uint64_t a = 0; a < p; ++a)
      for (std::uint64_t b = 0; b < p; ++b) {
        if (!oracle::nonsingular(p, a, b)) continue;
        const auto s = oracle::brute_structure(p, a, b);
        if (s.N != p + 1) realized.insert({s.N, s.m1, s.m2});
      }
    REQUIRE(predicted == realized);
    std::uint64_t least = 0;
    for (const auto& [N, m1, m2] : realized)
      if (least == 0 || m2 < least) least = m2;
    CHECK(min_exponent_oracle(p).exponent == least);
  }
}

TEST_CASE("oracle minimum tie-breaks on N") {
  const auto m = min_exponent_oracle(11);
  CHECK(m.exponent == 4);
  CHECK(m.N == 8);
  CHECK(m.structure == Structure{2, 4});
  CHECK(min_exponent_oracle(5).exponent == 2);
  CHECK(min_exponent_oracle(7).exponent == 2);
  CHECK(min_exponent_oracle(7).structure == Structure{2, 2});
}

TEST_CASE("trivial bound and exponent floor") {
  CHECK(trivial_exponent_bound(100, 1) == doctest::Approx(9));
  CHECK_THROWS_AS(trivial_exponent_bound(1, 1), ArgumentError);
  const std::uint64_t k1[1] = {1};
  // s = 1, g = 1: (sqrt q - 1)^2 / k1
  CHECK(exponent_floor(101, 1, 1, k1) == doctest::Approx(std::pow(std::sqrt(101.0) - 1, 2)));
  const std::uint64_t k3[3] = {2, 3, 5};
  const double direct = std::pow(std::pow(std::sqrt(1e4) - 1, 4) / (8.0 * 9.0 * 5.0), 1.0);
  CHECK(exponent_floor(1e4, 2, 3, k3) == doctest::Approx(direct));
  CHECK_THROWS_AS(exponent_floor(1e4, 2, 4, k3), ArgumentError);
  CHECK_THROWS_AS(exponent_floor(1e4, 2, 2, k3), ArgumentError);
}

TEST_CASE("exponent floor decreases in each k") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const unsigned g = 1 + rng() % 3;
    const unsigned s = 1 + rng() % (2 * g - 1);
    std::vector<std::uint64_t> k(s);
    for (auto& v : k) v = 1 + rng() % 20;
    const double q = 1000 + static_cast<double>(rng() % 100000);
    const double base = exponent_floor(q, g, s, k);
    const unsigned i = rng() % s;
    k[i] += 1 + rng() % 5;
    REQUIRE(exponent_floor(q, g, s, k) < base);
  }
}

TEST_CASE("qk bound") {
  const std::uint64_t k2[1] = {2};
  const auto b = qk_bound(100, 1, k2);
  CHECK(b.U == doctest::Approx(30.25));
  CHECK(b.V == doctest::Approx(28.5));
  CHECK(b.bound == doctest::Approx(862.125));
  const std::uint64_t ones[3] = {1, 1, 1};
  double prev = 0;
  for (double x = 10; x < 1e7; x *= 1.7) {
    const double v = qk_bound(x, 2, ones).bound;
    REQUIRE(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(qk_bound(100, 2, k2), ArgumentError);
}

TEST_CASE("K-set membership") {
  const std::uint64_t k10[1] = {10};
  const auto m = k_set_membership(1e4, 0.005, 1, k10);
  CHECK(m.interval_lo == doctest::Approx(std::pow(10.0, 0.94)));
  CHECK(m.interval_hi == doctest::Approx(std::pow(10.0, 1.06)));
  CHECK(!m.outside_interval);
  CHECK(!m.in_K);
  const std::uint64_t k100[1] = {100};
  const auto n = k_set_membership(1e4, 0.005, 1, k100);
  CHECK(n.outside_interval);
  CHECK(n.weighted_g);
  CHECK(n.weighted_2g);
  CHECK(n.in_K);
  CHECK_THROWS_AS(k_set_membership(1e4, 0.01, 1, k10), ArgumentError);
  CHECK_THROWS_AS(k_set_membership(1e4, 0.001, 2, k10), ArgumentError);
}
