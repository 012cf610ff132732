#include <doctest.h>

#include <cmath>
#include <random>

#include "jacexp/divisor_stats.hpp"
#include "jacexp/errors.hpp"
#include "oracles.hpp"

using namespace jacexp;
using namespace jacexp::divisors;

TEST_CASE("H on small windows") {
  CHECK(count_H({100, 2, 4}) == 50);  // multiples of 3 or 4
  CHECK(count_H({100, 5, 5}) == 0);
  CHECK(count_H({30, 2, 4}) == oracle::brute_H(30, 2, 4));
  CHECK(count_H_shifted({30, 2, 4}, -1) == 6);  // p - 1 in {4, 6, 12, 16, 18, 28}
  CHECK_THROWS_AS(count_H_shifted({30, 2, 4}, 0), ArgumentError);
  CHECK_THROWS_AS(count_H({10, 0, 4}), ArgumentError);
  CHECK_THROWS_AS(count_H({10, 5, 4}), ArgumentError);
  CHECK_THROWS_AS(count_H({10, 2, 11}), ArgumentError);
}

TEST_CASE("H matches the trial-division oracle on random windows") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 60; ++t) {
    const std::uint64_t x = 1 + rng() % 2000;
    const double y = 0.5 + static_cast<double>(rng() % 4000) / 100.0;
    const double z = y + static_cast<double>(rng() % 6000) / 100.0;
    if (z > static_cast<double>(x)) continue;
    const DivisorWindow w{x, y, z};
    REQUIRE(count_H(w) == oracle::brute_H(x, y, z));
    REQUIRE(count_H(w, 3) == count_H(w, 1));
    for (const std::int64_t lambda : {-1, 1, -7, 12}) {
      REQUIRE(count_H_shifted(w, lambda) == oracle::brute_H_shifted(x, y, z, lambda));
    }
  }
}

TEST_CASE("H is monotone in x and bounded by x") {
  std::uint64_t prev = 0;
  for (std::uint64_t x = 50; x <= 5000; x += 50) {
    const auto h = count_H({x, 10, 20});
    CHECK(h >= prev);
    CHECK(h <= x);
    prev = h;
  }
}

TEST_CASE("large window spans several segments") {
  const DivisorWindow w{20'000'000, 1000, 2000};
  CHECK(count_H(w, 1) == count_H(w, 4));
}

TEST_CASE("Ford delta and estimate") {
  CHECK(ford_delta() == doctest::Approx(0.086071).epsilon(1e-6));
  CHECK(std::fabs(ford_delta() - 0.086071) < 5e-7);
  const auto e1 = ford_upper_estimate({1'000'000, 100, 200});
  const auto e2 = ford_upper_estimate({2'000'000, 100, 200});
  CHECK(e2.value == doctest::Approx(2 * e1.value).epsilon(1e-12));
  CHECK(e1.u == doctest::Approx(std::log(200.0) / std::log(100.0) - 1));
  CHECK(e1.value == doctest::Approx(1e6 * std::pow(e1.u, ford_delta()) * std::pow(std::log(2 / e1.u), -1.5)));
}

TEST_CASE("estimate range conditions") {
  CHECK(DivisorWindow{1'000'000, 100, 200}.estimate_range_violation().empty());
  CHECK(DivisorWindow{1'000'000, 2, 4}.estimate_range_violation().find("3 <= y") != std::string::npos);
  CHECK(DivisorWindow{1'000'000, 2000, 4000}.estimate_range_violation().find("sqrt") != std::string::npos);
  CHECK(DivisorWindow{1'000'000, 100, 150}.estimate_range_violation().find("2y") != std::string::npos);
  CHECK(DivisorWindow{1'000'000, 10, 101}.estimate_range_violation().find("y^2") != std::string::npos);
  CHECK_THROWS_AS(ford_upper_estimate({1'000'000, 100, 150}), DomainError);
}

TEST_CASE("ratio sweep rows") {
  RatioSweepOptions opts;
  const auto rows = ratio_sweep(100'000, {50, 20, 100}, opts);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].y == 20);
  CHECK(rows[2].y == 100);
  for (const auto& r : rows) {
    CHECK(r.z == 2 * r.y);
    CHECK(r.H == count_H({100'000, r.y, r.z}));
    CHECK(r.ratio == doctest::Approx(static_cast<double>(r.H) / r.estimate));
    CHECK(r.ratio_shifted ==
          doctest::Approx(static_cast<double>(r.H_shifted) * std::log(1e5) / static_cast<double>(r.H)));
  }
  opts.rule = ZRule::kSquare;
  CHECK(ratio_sweep(100'000, {10}, opts).front().z == 100);
  opts.rule = ZRule::kFixed;
  opts.fixed_z = 90;
  CHECK(ratio_sweep(100'000, {30, 40}, opts).back().z == 90);
  opts.fixed_z = 50;
  CHECK_THROWS_AS(ratio_sweep(100'000, {30}, opts), DomainError);
}
