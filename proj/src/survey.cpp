#include "jacexp/survey.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "jacexp/attainability.hpp"
#include "jacexp/errors.hpp"
#include "jacexp/prime_engine.hpp"

namespace jacexp::survey {

namespace {

std::uint64_t floor_of(double v) { return v <= 0 ? 0 : static_cast<std::uint64_t>(std::floor(v)); }

std::uint64_t record_minimum(const PrimeSurveyRecord& r) { return r.exhaustive() ? r.min_exponent : r.oracle_min; }

attain::Structure record_structure(const PrimeSurveyRecord& r) {
  if (r.exhaustive()) return {r.witness_structure.m1, r.witness_structure.m2};
  return attain::min_exponent_oracle(r.q).structure;
}

std::map<std::uint64_t, const PrimeSurveyRecord*> index_records(std::uint64_t x,
                                                                 const std::vector<PrimeSurveyRecord>& records,
                                                                 const char* who) {
  std::map<std::uint64_t, const PrimeSurveyRecord*> by_q;
  for (const auto& r : records) by_q[r.q] = &r;
  if (x < 5) return by_q;
  const primes::PrimeSieve sieve(x);
  std::uint64_t missing = 0, first_missing = 0;
  sieve.for_each_prime(5, x, [&](std::uint64_t q) {
    if (!by_q.count(q)) {
      if (missing++ == 0) first_missing = q;
    }
  });
  if (missing > 0) {
    throw DependencyError(std::string(who) + ": " + std::to_string(missing) + " primes <= " + std::to_string(x) +
                          " have no survey record (first: " + std::to_string(first_missing) + ")");
  }
  return by_q;
}

struct ClassTable {
  std::vector<ec::WeierstrassCurve> reps;
  std::vector<std::uint64_t> orders;
};

ClassTable class_table(std::uint64_t q) {
  ClassTable t;
  const ec::PrimeField F(q, true);
  t.reps = ec::class_representatives(q);
  t.orders.reserve(t.reps.size());
  for (const auto& E : t.reps) t.orders.push_back(ec::point_count(E, F));
  return t;
}

}  // namespace

PrimeSurveyRecord survey_prime(std::uint64_t q, const SurveyOptions& opts) {
  if (q < 5 || !primes::is_prime_u64(q)) {
    throw ArgumentError("survey_prime: q=" + std::to_string(q) + " must be a prime >= 5");
  }
  PrimeSurveyRecord rec;
  rec.q = q;
  rec.mode = opts.mode;
  rec.oracle_min = attain::min_exponent_oracle(q).exponent;
  if (opts.mode == SurveyMode::kOracleOnly) return rec;
  if (q > opts.p_exhaustive) {
    throw CapacityError("survey_prime: q=" + std::to_string(q) + " exceeds the exhaustive threshold " +
                        std::to_string(opts.p_exhaustive));
  }

  const ec::PrimeField F(q, true);
  const ec::StructureOptions sopts{opts.p_exhaustive, opts.max_samples};
  const auto reps = ec::class_representatives(q);
  rec.class_count = reps.size();
  for (const auto& E : reps) {
    const std::uint64_t N = ec::point_count(E, F);
    if (N == q + 1) {
      const auto gs = ec::group_structure(E, F, N, sopts);
      if (!rec.supersingular_min || gs.m2 < *rec.supersingular_min) rec.supersingular_min = gs.m2;
      continue;
    }
    // m2 >= N / (largest admissible m1)
    if (rec.min_exponent != 0 && N / attain::max_first_factor(q, N) >= rec.min_exponent) continue;
    const auto gs = ec::group_structure(E, F, N, sopts);
    if (rec.min_exponent == 0 || gs.m2 < rec.min_exponent) {
      rec.min_exponent = gs.m2;
      rec.witness = E;
      rec.witness_structure = gs;
    }
  }
  return rec;
}

std::vector<PrimeSurveyRecord> survey_range(std::uint64_t x_lo, std::uint64_t x_hi, const SurveyOptions& opts,
                                            const RecordMap* cached, const RecordSink& on_computed) {
  if (opts.threads < 1) throw ArgumentError("survey_range: threads must be >= 1");
  const std::uint64_t lo = std::max<std::uint64_t>(x_lo, 5);
  if (x_hi < lo) return {};
  const primes::PrimeSieve sieve(x_hi);
  const auto qs = sieve.primes(lo, x_hi);

  std::vector<PrimeSurveyRecord> out(qs.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (cached) {
      const auto it = cached->find(qs[i]);
      if (it != cached->end() && it->second.mode == opts.mode) {
        out[i] = it->second;
        continue;
      }
    }
    todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = todo.size();
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= todo.size()) return;
      const std::size_t i = todo[t];
      try {
        out[i] = survey_prime(qs[i], opts);
        if (on_computed) {
          const std::lock_guard lock(mu);
          on_computed(out[i]);
        }
      } catch (...) {
        const std::lock_guard lock(mu);
        if (t < failed_at) {
          failed_at = t;
          failure = std::current_exception();
        }
        next.store(todo.size());
      }
    }
  };
  const unsigned n = std::min<std::size_t>(opts.threads, std::max<std::size_t>(todo.size(), 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// -----------------------------------------------------------------------------

double Threshold::value(std::uint64_t q) const {
  const double qd = static_cast<double>(q);
  switch (rule) {
    case ThresholdRule::kPower:
      return std::pow(qd, exponent);
    case ThresholdRule::kDukeLog:
      return std::pow(qd, 0.75) / std::log(qd);
    case ThresholdRule::kTrivial:
      return std::sqrt(qd) - 1.0;
  }
  return 0;
}

std::string Threshold::describe() const {
  switch (rule) {
    case ThresholdRule::kPower: {
      std::ostringstream os;
      os << "q^" << exponent;
      return os.str();
    }
    case ThresholdRule::kDukeLog:
      return "q^0.75/log q";
    case ThresholdRule::kTrivial:
      return "sqrt(q)-1";
  }
  return {};
}

bool m1_lower_bound_holds(std::uint64_t q, std::uint64_t m1) {
  // (sqrt q - 1)^8 = R + I sqrt q; compare against m1^4 q^3
  const auto surd = attain::sqrt_shift_power(q, -1, 8);
  __int128 lhs = 1;
  bool exact = surd.has_value();
  for (int i = 0; i < 4 && exact; ++i) exact = !__builtin_mul_overflow(lhs, static_cast<__int128>(m1), &lhs);
  for (int i = 0; i < 3 && exact; ++i) exact = !__builtin_mul_overflow(lhs, static_cast<__int128>(q), &lhs);
  if (exact) {
    // lhs - R >= I sqrt q
    const __int128 D = lhs - surd->rational;
    const __int128 I = surd->irrational;
    __int128 d2 = 0, i2q = 0;
    if (!__builtin_mul_overflow(D, D, &d2) && !__builtin_mul_overflow(I, I, &i2q) &&
        !__builtin_mul_overflow(i2q, static_cast<__int128>(q), &i2q)) {
      if (I <= 0) return D >= 0 || d2 <= i2q;
      return D >= 0 && d2 >= i2q;
    }
  }
  const long double r = std::sqrt(static_cast<long double>(q)) - 1.0L;
  return static_cast<long double>(m1) >= r * r / std::pow(static_cast<long double>(q), 0.75L);
}

namespace {

ExceptionRow classify(const PrimeSurveyRecord& r, double threshold) {
  ExceptionRow row;
  row.q = r.q;
  row.min_exponent = record_minimum(r);
  row.threshold = threshold;
  const auto s = record_structure(r);
  row.m1 = s.m1;
  row.m2 = s.m2;
  row.m1_divides = (r.q - 1) % s.m1 == 0;
  const auto m2 = static_cast<__int128>(s.m2);
  const auto q = static_cast<__int128>(r.q);
  row.below_three_quarters = m2 * m2 * m2 * m2 < q * q * q;
  row.m1_bound = m1_lower_bound_holds(r.q, s.m1);
  return row;
}

ThresholdReport run_threshold(std::uint64_t x, const std::vector<PrimeSurveyRecord>& records, const Threshold& th,
                              double eta, const char* who, const std::function<void(ExceptionRow&)>& flag) {
  const auto by_q = index_records(x, records, who);
  ThresholdReport rep;
  rep.x = x;
  rep.threshold = th;
  rep.eta = eta;
  for (const auto& [q, r] : by_q) {
    if (q > x) break;
    const double t = th.value(q);
    if (!(static_cast<double>(record_minimum(*r)) < t)) continue;
    ExceptionRow row = classify(*r, t);
    flag(row);
    if (!row.m1_divides || (row.below_three_quarters && !row.m1_bound)) ++rep.violations;
    rep.exceptions.push_back(row);
  }

  std::vector<std::uint64_t> xs;
  for (std::uint64_t xi = x; xi >= 5; xi /= 2) xs.push_back(xi);
  std::reverse(xs.begin(), xs.end());
  for (const std::uint64_t xi : xs) {
    GridPoint gp;
    gp.x = xi;
    for (const auto& [q, r] : by_q) {
      if (q > xi) break;
      ++gp.primes;
    }
    for (const auto& e : rep.exceptions) {
      if (e.q <= xi) ++gp.exceptions;
    }
    gp.fraction = gp.primes ? static_cast<double>(gp.exceptions) / static_cast<double>(gp.primes) : 0.0;
    rep.grid.push_back(gp);
  }
  return rep;
}

}  // namespace

ThresholdReport verify_thm1(std::uint64_t x, const std::vector<PrimeSurveyRecord>& records, const Threshold& threshold,
                            double eta) {
  if (!(eta > 0) || !(eta < 0.01)) throw ArgumentError("verify_thm1: eta must lie in (0, 1/100)");
  const double xd = static_cast<double>(x);
  const double lo = std::pow(xd, 0.25 - 3 * eta);
  const double hi = std::pow(xd, 0.25 + 3 * eta);
  return run_threshold(x, records, threshold, eta, "verify_thm1", [&](ExceptionRow& row) {
    row.divisor_window = primes::has_divisor_in(row.q - 1, lo, hi);
    const std::uint64_t k[1] = {row.m1};
    const auto km = attain::k_set_membership(std::max(xd, 2.0), eta, 1, k);
    row.k_outside = km.outside_interval;
    row.k_weighted_g = km.weighted_g;
    row.k_weighted_2g = km.weighted_2g;
  });
}

ThresholdReport verify_thm3(std::uint64_t x, const std::vector<PrimeSurveyRecord>& records, double epsilon) {
  if (!(epsilon >= 0) || !(epsilon < 0.25)) throw ArgumentError("verify_thm3: epsilon must lie in [0, 1/4)");
  const double eta = 2 * epsilon;
  const double xd = static_cast<double>(x);
  const double lo = std::pow(xd, 0.5 - 2 * eta);
  const double hi = std::pow(xd, 0.5 + 2 * eta);
  return run_threshold(x, records, {ThresholdRule::kPower, 0.5 + epsilon}, eta, "verify_thm3",
                       [&](ExceptionRow& row) { row.divisor_window = primes::has_divisor_in(row.q - 1, lo, hi); });
}

// -----------------------------------------------------------------------------

CensusReport qk_census(std::uint64_t x, std::uint64_t k1, std::uint64_t p_exhaustive, double bound_scale) {
  if (k1 < 1) throw ArgumentError("qk_census: k1 must be >= 1");
  if (x < 2) throw ArgumentError("qk_census: x must be >= 2");
  CensusReport rep;
  rep.x = x;
  rep.k1 = k1;
  const std::uint64_t k[1] = {k1};
  rep.bound = attain::qk_bound(static_cast<double>(x), 1, k).bound * bound_scale;

  const primes::PrimeSieve sieve(x);
  sieve.for_each_prime(x / 2 + 1, x, [&](std::uint64_t q) {
    if (q < 5 || (q - 1) % k1 != 0) return;
    const auto w = attain::hasse_window(q, 1);
    if (static_cast<unsigned __int128>(k1) * k1 > w.last) return;
    for (std::uint64_t N = w.first; N <= w.last; ++N) {
      if (N != q + 1 && N % (k1 * k1) == 0 && attain::max_first_factor(q, N) % k1 == 0) {
        ++rep.observed;
        return;
      }
    }
    // only m1 | gcd(q - 1, q + 1) = 2 can come from the supersingular class
    if (k1 > 2) return;
    if (q > p_exhaustive) {
      throw CapacityError("qk_census: q=" + std::to_string(q) + " needs a supersingular scan above the threshold " +
                          std::to_string(p_exhaustive));
    }
    const ec::PrimeField F(q, true);
    for (const auto& E : ec::class_representatives(q)) {
      if (ec::point_count(E, F) != q + 1) continue;
      if (ec::group_structure(E, F, q + 1, {p_exhaustive, 200}).m1 == k1) {
        ++rep.observed;
        return;
      }
    }
  });
  rep.exceeds = static_cast<double>(rep.observed) > rep.bound;
  return rep;
}

DukeReport duke_construct(std::uint64_t x, double epsilon, const DukeOptions& opts) {
  if (!(epsilon > 0) || !(epsilon <= 0.05)) throw ArgumentError("duke_construct: epsilon must lie in (0, 1/20]");
  if (x < 5) throw ArgumentError("duke_construct: x must be >= 5");
  DukeReport rep;
  const double xd = static_cast<double>(x);
  rep.y = std::pow(xd, 0.25 - epsilon);
  rep.z = std::pow(xd, 0.25 - epsilon / 2);
  const primes::PrimeSieve sieve(x);
  rep.pi_x = sieve.count_up_to(x);
  const auto small = sieve.primes(floor_of(rep.y) + 1, floor_of(rep.z));

  const auto q_lo = static_cast<std::uint64_t>(std::ceil(xd / std::log(xd)));
  sieve.for_each_prime(std::max<std::uint64_t>(q_lo, 5), x, [&](std::uint64_t q) {
    bool in_set = false;
    std::optional<ClassTable> classes;
    const auto w = attain::hasse_window(q, 1);
    const double threshold = std::pow(static_cast<double>(q), 0.75 + epsilon);
    for (const std::uint64_t p : small) {
      if ((q - 1) % p != 0) continue;
      in_set = true;
      const std::uint64_t p2 = p * p;
      for (std::uint64_t k = (w.first + p2 - 1) / p2 * p2; k <= w.last; k += p2) {
        if (k == q + 1) continue;
        if (attain::max_first_factor(q, k) % p != 0) continue;
        DukeFinding f;
        f.x = x;
        f.epsilon = epsilon;
        f.q = q;
        f.p_divisor = p;
        f.k_order = k;
        f.target_exponent = k / p;
        f.threshold = threshold;
        f.genus2_reported_bound = static_cast<double>(f.target_exponent) / 2.0;
        if (static_cast<double>(f.target_exponent) > threshold) {
          ++rep.over_threshold;
          continue;
        }
        if (opts.realize && q <= opts.p_exhaustive) {
          if (!classes) classes = class_table(q);
          const ec::PrimeField F(q, true);
          for (std::size_t i = 0; i < classes->reps.size(); ++i) {
            const auto& E = classes->reps[i];
            if (classes->orders[i] != k || E.a == 0 || E.b == 0) continue;
            const auto gs = ec::group_structure(E, F, k, {opts.p_exhaustive, 200});
            if (gs.m1 == p && gs.m2 == f.target_exponent) {
              f.realized_curve = E;
              break;
            }
          }
        }
        rep.findings.push_back(f);
      }
    }
    if (in_set) ++rep.prime_set;
  });
  std::sort(rep.findings.begin(), rep.findings.end(), [](const DukeFinding& l, const DukeFinding& r) {
    return std::tie(l.q, l.p_divisor, l.k_order) < std::tie(r.q, r.p_divisor, r.k_order);
  });
  rep.density = rep.pi_x ? static_cast<double>(rep.prime_set) / static_cast<double>(rep.pi_x) : 0.0;
  return rep;
}

MertensReport mertens_check(std::uint64_t x, double epsilon) {
  if (!(epsilon >= 0) || !(epsilon <= 0.05)) throw ArgumentError("mertens_check: epsilon must lie in [0, 1/20]");
  if (x < 2) throw ArgumentError("mertens_check: x must be >= 2");
  MertensReport rep;
  rep.x = x;
  rep.epsilon = epsilon;
  const double xd = static_cast<double>(x);
  rep.y = std::pow(xd, 0.25 - epsilon);
  rep.z = std::pow(xd, 0.25 - epsilon / 2);
  rep.sum = primes::mertens_sum(rep.y, rep.z);
  rep.target = std::log((1 - 2 * epsilon) / (1 - 4 * epsilon));
  rep.gap = std::fabs(rep.sum - rep.target);
  return rep;
}

BvReport bv_check(std::uint64_t x, double y, double z) {
  if (x < 2) throw ArgumentError("bv_check: x must be >= 2");
  if (!(y >= 0) || !(y <= z)) throw ArgumentError("bv_check: need 0 <= y <= z");
  BvReport rep;
  rep.x = x;
  rep.y = y;
  rep.z = z;
  const std::uint64_t zf = floor_of(z);
  const primes::PrimeSieve sieve(std::max(x, std::max<std::uint64_t>(zf, 2)));
  const double pi_x = static_cast<double>(sieve.count_up_to(x));
  long double sum = 0;
  sieve.for_each_prime(floor_of(y) + 1, zf, [&](std::uint64_t p) {
    std::uint64_t in_class = 0;
    for (std::uint64_t n = p + 1; n <= x; n += p) {
      if (sieve.is_prime(n)) ++in_class;
    }
    sum += std::fabs(static_cast<long double>(in_class) - pi_x / static_cast<long double>(p - 1));
  });
  rep.error_sum = static_cast<double>(sum);
  const double lx = std::log(static_cast<double>(x));
  rep.normalized = rep.error_sum / (static_cast<double>(x) / (lx * lx));
  return rep;
}

}  // namespace jacexp::survey
