#include "jacexp/elliptic_core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <random>
#include <string>

#include "jacexp/attainability.hpp"
#include "jacexp/errors.hpp"

namespace jacexp::ec {

namespace {

// Jacobian coordinates: (X, Y, Z) ~ (X/Z^2, Y/Z^3); Z == 0 is the identity.
struct Jacobian {
  std::uint64_t X = 1, Y = 1, Z = 0;
  bool is_identity() const { return Z == 0; }
};

class CurveArith {
 public:
  CurveArith(const WeierstrassCurve& E, const PrimeField& F) : F_(F), a_(E.a) {}

  Jacobian dbl(const Jacobian& P) const {
    if (P.Z == 0 || P.Y == 0) return {};
    const std::uint64_t XX = F_.sqr(P.X);
    const std::uint64_t YY = F_.sqr(P.Y);
    const std::uint64_t YYYY = F_.sqr(YY);
    const std::uint64_t ZZ = F_.sqr(P.Z);
    const std::uint64_t S = F_.mul(4 % F_.p(), F_.mul(P.X, YY));
    const std::uint64_t M = F_.add(F_.mul(3, XX), F_.mul(a_, F_.sqr(ZZ)));
    Jacobian R;
    R.X = F_.sub(F_.sqr(M), F_.add(S, S));
    R.Y = F_.sub(F_.mul(M, F_.sub(S, R.X)), F_.mul(8 % F_.p(), YYYY));
    R.Z = F_.mul(F_.add(P.Y, P.Y), P.Z);
    return R;
  }

  // P + (x2, y2) with the second operand affine
  Jacobian add_affine(const Jacobian& P, std::uint64_t x2, std::uint64_t y2) const {
    if (P.Z == 0) return {x2, y2, 1};
    const std::uint64_t Z1Z1 = F_.sqr(P.Z);
    const std::uint64_t U2 = F_.mul(x2, Z1Z1);
    const std::uint64_t S2 = F_.mul(y2, F_.mul(P.Z, Z1Z1));
    const std::uint64_t H = F_.sub(U2, P.X);
    const std::uint64_t r = F_.sub(S2, P.Y);
    if (H == 0) return r == 0 ? dbl(P) : Jacobian{};
    const std::uint64_t HH = F_.sqr(H);
    const std::uint64_t HHH = F_.mul(H, HH);
    const std::uint64_t V = F_.mul(P.X, HH);
    Jacobian R;
    R.X = F_.sub(F_.sub(F_.sqr(r), HHH), F_.add(V, V));
    R.Y = F_.sub(F_.mul(r, F_.sub(V, R.X)), F_.mul(P.Y, HHH));
    R.Z = F_.mul(P.Z, H);
    return R;
  }

  Jacobian mul(std::uint64_t n, std::uint64_t x, std::uint64_t y) const {
    Jacobian R;
    if (n == 0) return R;
    for (int bit = 63 - std::countl_zero(n); bit >= 0; --bit) {
      R = dbl(R);
      if ((n >> bit) & 1) R = add_affine(R, x, y);
    }
    return R;
  }

  bool kills(std::uint64_t n, const CurvePoint& P) const {
    return P.infinity || mul(n, P.x, P.y).is_identity();
  }

  CurvePoint to_affine(const Jacobian& P) const {
    if (P.Z == 0) return CurvePoint::at_infinity();
    const std::uint64_t zi = F_.inv(P.Z);
    const std::uint64_t zi2 = F_.sqr(zi);
    return CurvePoint::affine(F_.mul(P.X, zi2), F_.mul(P.Y, F_.mul(zi2, zi)));
  }

 private:
  const PrimeField& F_;
  std::uint64_t a_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CurvePoint random_point(const WeierstrassCurve& E, const PrimeField& F, std::mt19937_64& rng) {
  for (;;) {
    const std::uint64_t x = rng() % E.p;
    const auto y = F.sqrt(rhs(E, F, x));
    if (!y) continue;
    return CurvePoint::affine(x, (rng() & 1) ? F.neg(*y) : *y);
  }
}

std::uint64_t order_with(const CurveArith& arith, const CurvePoint& P, const primes::Factorization& f) {
  if (P.infinity) return 1;
  std::uint64_t ord = f.n;
  for (const auto& [ell, e] : f.factors) {
    for (unsigned i = 0; i < e; ++i) {
      if (!arith.kills(ord / ell, P)) break;
      ord /= ell;
    }
  }
  return ord;
}

std::uint64_t valuation(std::uint64_t n, std::uint64_t ell) {
  std::uint64_t v = 0;
  while (n % ell == 0) {
    n /= ell;
    ++v;
  }
  return v;
}

void require_on_curve(const WeierstrassCurve& E, const CurvePoint& P, const char* who) {
  if (!on_curve(E, P)) throw ArgumentError(std::string(who) + ": point is not on the curve");
}

// Polynomials over F_p modulo the monic cubic x^3 + ax + b, low coefficient first.
using Quadratic = std::array<std::uint64_t, 3>;

Quadratic mul_mod_cubic(const Quadratic& u, const Quadratic& v, const WeierstrassCurve& E,
                        const PrimeField& F) {
  std::array<std::uint64_t, 5> prod{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) prod[i + j] = F.add(prod[i + j], F.mul(u[i], v[j]));
  // x^k = x^(k-3) * (-a x - b)
  for (int k = 4; k >= 3; --k) {
    const std::uint64_t c = prod[k];
    if (c == 0) continue;
    prod[k] = 0;
    prod[k - 2] = F.sub(prod[k - 2], F.mul(c, E.a));
    prod[k - 3] = F.sub(prod[k - 3], F.mul(c, E.b));
  }
  return {prod[0], prod[1], prod[2]};
}

int degree(const std::vector<std::uint64_t>& poly) {
  for (int i = static_cast<int>(poly.size()) - 1; i >= 0; --i)
    if (poly[i] != 0) return i;
  return -1;
}

}  // namespace

// -----------------------------------------------------------------------------

bool is_nonsingular(std::uint64_t p, std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 a3 = static_cast<unsigned __int128>(a) * a % p * a % p;
  const unsigned __int128 b2 = static_cast<unsigned __int128>(b) * b % p;
  return (4 * a3 + 27 * b2) % p != 0;
}

WeierstrassCurve::WeierstrassCurve(std::uint64_t p_, std::uint64_t a_, std::uint64_t b_)
    : p(p_), a(a_), b(b_) {
  const PrimeField check(p_);  // validates p
  if (a_ >= p_ || b_ >= p_) throw ArgumentError("curve coefficients must lie in [0, p)");
  if (!is_nonsingular(p_, a_, b_)) {
    throw ArgumentError("singular curve: 4a^3 + 27b^2 = 0 mod " + std::to_string(p_) + " for (a,b)=(" +
                        std::to_string(a_) + "," + std::to_string(b_) + ")");
  }
}

int legendre(std::int64_t a, std::uint64_t p) {
  const auto sp = static_cast<std::int64_t>(p);
  const auto r = static_cast<std::uint64_t>(((a % sp) + sp) % sp);
  if (r == 0) return 0;
  return primes::pow_mod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

std::uint64_t rhs(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t x) {
  return F.add(F.mul(F.add(F.sqr(x), E.a), x), E.b);
}

bool on_curve(const WeierstrassCurve& E, const CurvePoint& P) {
  if (P.infinity) return true;
  if (P.x >= E.p || P.y >= E.p) return false;
  const PrimeField F(E.p);
  return F.sqr(P.y) == rhs(E, F, P.x);
}

std::uint64_t point_count(const WeierstrassCurve& E, const PrimeField& F) {
  const std::uint64_t p = E.p;
  std::int64_t sum = 0;
  if (F.has_tables()) {
    // f(x+1) - f(x) = 3x^2 + 3x + 1 + a, whose own difference is 6x + 6
    std::uint64_t f = E.b;
    std::uint64_t d1 = F.add(1, E.a);
    std::uint64_t d2 = 6 % p;
    const std::uint64_t six = 6 % p;
    for (std::uint64_t x = 0; x < p; ++x) {
      sum += F.legendre(f);
      f = F.add(f, d1);
      d1 = F.add(d1, d2);
      d2 = F.add(d2, six);
    }
  } else {
    for (std::uint64_t x = 0; x < p; ++x) sum += F.legendre_by_power(rhs(E, F, x));
  }
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(p + 1) + sum);
}

std::uint64_t point_count(const WeierstrassCurve& E) {
  const PrimeField F(E.p, true);
  return point_count(E, F);
}

CurvePoint negate(const WeierstrassCurve& E, const CurvePoint& P) {
  require_on_curve(E, P, "negate");
  if (P.infinity) return P;
  return CurvePoint::affine(P.x, P.y == 0 ? 0 : E.p - P.y);
}

CurvePoint add(const WeierstrassCurve& E, const CurvePoint& P, const CurvePoint& Q) {
  require_on_curve(E, P, "add");
  require_on_curve(E, Q, "add");
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  const PrimeField F(E.p);
  std::uint64_t lambda = 0;
  if (P.x == Q.x) {
    if (F.add(P.y, Q.y) == 0) return CurvePoint::at_infinity();
    // tangent: (3x^2 + a) / 2y
    lambda = F.mul(F.add(F.mul(3, F.sqr(P.x)), E.a), F.inv(F.add(P.y, P.y)));
  } else {
    lambda = F.mul(F.sub(Q.y, P.y), F.inv(F.sub(Q.x, P.x)));
  }
  const std::uint64_t x3 = F.sub(F.sub(F.sqr(lambda), P.x), Q.x);
  const std::uint64_t y3 = F.sub(F.mul(lambda, F.sub(P.x, x3)), P.y);
  return CurvePoint::affine(x3, y3);
}

CurvePoint scalar_mul(const WeierstrassCurve& E, std::int64_t n, const CurvePoint& P) {
  require_on_curve(E, P, "scalar_mul");
  if (P.infinity || n == 0) return CurvePoint::at_infinity();
  const PrimeField F(E.p);
  const CurveArith arith(E, F);
  const std::uint64_t mag = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  const CurvePoint R = arith.to_affine(arith.mul(mag, P.x, P.y));
  return n < 0 ? negate(E, R) : R;
}

std::uint64_t point_order(const WeierstrassCurve& E, const CurvePoint& P,
                          const primes::Factorization& group_order) {
  require_on_curve(E, P, "point_order");
  const PrimeField F(E.p);
  return order_with(CurveArith(E, F), P, group_order);
}

unsigned cubic_root_count(const WeierstrassCurve& E, const PrimeField& F) {
  // deg gcd(x^p - x, x^3 + ax + b); the cubic is squarefree on a nonsingular curve
  Quadratic result{1, 0, 0};
  Quadratic base{0, 1, 0};
  for (std::uint64_t e = E.p; e > 0; e >>= 1) {
    if (e & 1) result = mul_mod_cubic(result, base, E, F);
    base = mul_mod_cubic(base, base, E, F);
  }
  result[1] = F.sub(result[1], 1);
  std::vector<std::uint64_t> u{E.b, E.a, 0, 1};
  std::vector<std::uint64_t> v{result[0], result[1], result[2]};
  while (degree(v) >= 0) {
    // u <- u mod v
    const int dv = degree(v);
    const std::uint64_t lead_inv = F.inv(v[dv]);
    for (int du = degree(u); du >= dv; du = degree(u)) {
      const std::uint64_t c = F.mul(u[du], lead_inv);
      for (int i = 0; i <= dv; ++i) u[du - dv + i] = F.sub(u[du - dv + i], F.mul(c, v[i]));
    }
    std::swap(u, v);
  }
  return static_cast<unsigned>(std::max(0, degree(u)));
}

std::uint64_t torsion_count(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t m) {
  if (m == 0) throw ArgumentError("torsion_count: m must be positive");
  if (m == 1) return 1;
  if (m == 2) return 1 + cubic_root_count(E, F);
  const CurveArith arith(E, F);
  std::uint64_t count = 1;
  for (std::uint64_t x = 0; x < E.p; ++x) {
    const std::uint64_t r = rhs(E, F, x);
    if (r == 0) {
      if (m % 2 == 0) ++count;  // order 2
      continue;
    }
    const auto y = F.sqrt(r);
    if (!y) continue;
    if (arith.mul(m, x, *y).is_identity()) count += 2;  // (x, y) and (x, -y)
  }
  return count;
}

GroupStructure group_structure(const WeierstrassCurve& E, const PrimeField& F, std::uint64_t N,
                               const StructureOptions& opts) {
  const std::uint64_t p = E.p;
  GroupStructure gs{p, N, 1, N};

  // m1 divides G: the largest d with d | p - 1 and d^2 | N
  const primes::Factorization fN = primes::factorize(N);
  std::uint64_t G = 1;
  for (const auto& [ell, e] : fN.factors) {
    const std::uint64_t take = std::min<std::uint64_t>(valuation(p - 1, ell), e / 2);
    for (std::uint64_t i = 0; i < take; ++i) G *= ell;
  }
  if (G == 1) return gs;

  const bool exhaustive = p <= opts.p_exhaustive;
  const CurveArith arith(E, F);
  std::mt19937_64 rng(splitmix64(p ^ splitmix64(E.a ^ splitmix64(E.b))));
  std::uint64_t L = 1;
  unsigned stable = 0;
  std::uint64_t rejected_m1 = 0;  // a candidate whose torsion count came up short
  for (unsigned sample = 0; sample < opts.max_samples; ++sample) {
    const std::uint64_t ord = order_with(arith, random_point(E, F, rng), fN);
    const std::uint64_t next = std::lcm(L, ord);
    stable = next == L ? stable + 1 : 0;
    L = next;
    if (L == N) return gs;

    const std::uint64_t M = N / L;
    // true m1 divides gcd(M, G); each such divisor d has d^2 | N
    const std::uint64_t g = std::gcd(M, G);
    if (g == 1) return gs;
    if (M != g || M == rejected_m1) continue;  // L is not yet the exponent
    if (exhaustive) {
      if (stable < 2 && sample + 1 < opts.max_samples) continue;
      if (torsion_count(E, F, M) == M * M) return {p, N, M, L};
      rejected_m1 = M;
    } else if (M == 2) {
      if (cubic_root_count(E, F) == 3) return {p, N, 2, L};
      rejected_m1 = M;
    }
  }

  if (!exhaustive) {
    throw UncertifiedError("group_structure: could not certify the structure of (a,b)=(" +
                           std::to_string(E.a) + "," + std::to_string(E.b) + ") over F_" +
                           std::to_string(p) + " above the exhaustive threshold " +
                           std::to_string(opts.p_exhaustive));
  }
  // Sylow-by-Sylow: the l-part of m1 is the largest l^t with #E[l^t] = l^(2t)
  std::uint64_t m1 = 1;
  for (const auto& [ell, e] : primes::factorize(G).factors) {
    std::uint64_t power = 1;
    for (unsigned t = 1; t <= e; ++t) {
      const std::uint64_t next = power * ell;
      if (torsion_count(E, F, next) != next * next) break;
      power = next;
    }
    m1 *= power;
  }
  return {p, N, m1, N / m1};
}

GroupStructure group_structure(const WeierstrassCurve& E, const StructureOptions& opts) {
  const PrimeField F(E.p, E.p <= std::max(opts.p_exhaustive, std::uint64_t{1} << 16));
  return group_structure(E, F, point_count(E, F), opts);
}

std::uint64_t exponent(const WeierstrassCurve& E, const StructureOptions& opts) {
  return group_structure(E, opts).m2;
}

bool is_supersingular(const WeierstrassCurve& E) {
  if (E.p < 5) throw UnsupportedFieldError("is_supersingular: need p >= 5");
  return point_count(E) == E.p + 1;
}

std::uint64_t j_invariant(const WeierstrassCurve& E) {
  const PrimeField F(E.p);
  const std::uint64_t a3_4 = F.mul(4, F.mul(E.a, F.sqr(E.a)));
  const std::uint64_t denom = F.add(a3_4, F.mul(27, F.sqr(E.b)));
  return F.mul(F.mul(1728 % E.p, a3_4), F.inv(denom));
}

WeierstrassCurve quadratic_twist(const WeierstrassCurve& E) {
  const PrimeField F(E.p);
  std::uint64_t d = 2;
  while (F.legendre_by_power(d) != -1) ++d;
  const std::uint64_t d2 = F.sqr(d);
  return {E.p, F.mul(E.a, d2), F.mul(E.b, F.mul(d2, d))};
}

std::vector<WeierstrassCurve> class_representatives(std::uint64_t p) {
  const PrimeField F(p);
  if (p > (std::uint64_t{1} << 14)) {
    throw CapacityError("class_representatives: p=" + std::to_string(p) + " too large for a full scan");
  }
  // discrete logs base a generator of F_p^*
  const std::uint64_t order = p - 1;
  const auto fo = primes::factorize(order);
  std::uint64_t gen = 2;
  for (;; ++gen) {
    bool ok = true;
    for (const auto& pp : fo.factors) {
      if (F.pow(gen, order / pp.prime) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) break;
  }
  std::vector<std::uint32_t> exp_table(order), log_table(p, 0);
  std::uint64_t v = 1;
  for (std::uint64_t t = 0; t < order; ++t) {
    exp_table[t] = static_cast<std::uint32_t>(v);
    log_table[v] = static_cast<std::uint32_t>(t);
    v = F.mul(v, gen);
  }

  std::vector<bool> seen(p * p, false);
  std::vector<WeierstrassCurve> reps;
  for (std::uint64_t a = 0; a < p; ++a) {
    for (std::uint64_t b = 0; b < p; ++b) {
      if (seen[a * p + b] || !is_nonsingular(p, a, b)) continue;
      WeierstrassCurve rep;
      rep.p = p;
      rep.a = a;
      rep.b = b;
      reps.push_back(rep);
      // orbit (u^4 a, u^6 b), u = gen^t
      const std::uint64_t la = a ? log_table[a] : 0;
      const std::uint64_t lb = b ? log_table[b] : 0;
      std::uint64_t ea = la, eb = lb;
      const std::uint64_t step_a = 4 % order, step_b = 6 % order;
      for (std::uint64_t t = 0; t < order; ++t) {
        const std::uint64_t oa = a ? exp_table[ea] : 0;
        const std::uint64_t ob = b ? exp_table[eb] : 0;
        seen[oa * p + ob] = true;
        ea += step_a;
        if (ea >= order) ea -= order;
        eb += step_b;
        if (eb >= order) eb -= order;
      }
    }
  }
  return reps;
}

std::optional<WeierstrassCurve> find_curve_with_order(std::uint64_t p, std::uint64_t N) {
  const auto kind = attain::waterhouse_attainable(p, N).kind;
  if (kind == attain::OrderKind::kNotAttainable) return std::nullopt;
  const PrimeField F(p, true);
  for (const auto& E : class_representatives(p)) {
    if (point_count(E, F) == N) return E;
  }
  throw ConsistencyError("find_curve_with_order: N=" + std::to_string(N) +
                         " is attainable but no curve over F_" + std::to_string(p) + " has it");
}

std::optional<WeierstrassCurve> find_curve_with_structure(std::uint64_t p, std::uint64_t m1,
                                                          std::uint64_t m2, const StructureOptions& opts,
                                                          const CurveFilter& filter) {
  if (m1 == 0 || m2 == 0) throw ArgumentError("find_curve_with_structure: m1, m2 must be positive");
  unsigned __int128 wide = static_cast<unsigned __int128>(m1) * m2;
  if (wide > UINT64_MAX) return std::nullopt;
  const auto N = static_cast<std::uint64_t>(wide);
  const auto kind = attain::waterhouse_attainable(p, N).kind;
  if (kind == attain::OrderKind::kNotAttainable) return std::nullopt;

  bool expected = false;
  if (kind == attain::OrderKind::kOrdinary) {
    const auto structures = attain::ruck_structures(p, N);
    expected = std::find(structures.begin(), structures.end(), attain::Structure{m1, m2}) != structures.end();
    if (!expected) return std::nullopt;
  }
  const PrimeField F(p, true);
  for (const auto& E : class_representatives(p)) {
    if (filter && !filter(E)) continue;
    if (point_count(E, F) != N) continue;
    const GroupStructure gs = group_structure(E, F, N, opts);
    if (gs.m1 == m1 && gs.m2 == m2) return E;
  }
  if (expected && !filter) {
    throw ConsistencyError("find_curve_with_structure: Z/" + std::to_string(m1) + " x Z/" +
                           std::to_string(m2) + " is attainable over F_" + std::to_string(p) +
                           " but the class scan did not realize it");
  }
  return std::nullopt;
}

}  // namespace jacexp::ec
