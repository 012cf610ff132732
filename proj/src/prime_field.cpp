#include "jacexp/prime_field.hpp"

#include <string>

#include "jacexp/errors.hpp"
#include "jacexp/prime_engine.hpp"

namespace jacexp::ec {

PrimeField::PrimeField(std::uint64_t p, bool with_tables) : p_(p), small_(p < (std::uint64_t{1} << 32)) {
  if (p == 2 || p == 3) {
    throw UnsupportedFieldError("characteristic " + std::to_string(p) + " is not supported (need p >= 5)");
  }
  if (p >= kMaxFieldPrime) {
    throw ArgumentError("field prime " + std::to_string(p) + " exceeds 2^61");
  }
  if (!primes::is_prime_u64(p)) throw ArgumentError("field modulus " + std::to_string(p) + " is not prime");
  if (with_tables && p <= kFieldTableLimit) {
    chi_.assign(p, -1);
    root_.assign(p, 0);
    chi_[0] = 0;
    for (std::uint64_t y = 1; y <= p / 2; ++y) {
      const std::uint64_t r = y * y % p;
      chi_[r] = 1;
      root_[r] = static_cast<std::uint32_t>(y);
    }
  }
}

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t exp) const noexcept {
  std::uint64_t result = 1;
  base %= p_;
  while (exp > 0) {
    if (exp & 1) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return result;
}

std::uint64_t PrimeField::inv(std::uint64_t a) const noexcept {
  // extended Euclid on signed 128-bit to avoid the cost of a^(p-2)
  __int128 t = 0, new_t = 1;
  __int128 r = p_, new_r = a;
  while (new_r != 0) {
    const __int128 q = r / new_r;
    const __int128 tmp_t = t - q * new_t;
    t = new_t;
    new_t = tmp_t;
    const __int128 tmp_r = r - q * new_r;
    r = new_r;
    new_r = tmp_r;
  }
  if (t < 0) t += p_;
  return static_cast<std::uint64_t>(t);
}

int PrimeField::legendre_by_power(std::uint64_t a) const noexcept {
  a %= p_;
  if (a == 0) return 0;
  return pow(a, (p_ - 1) / 2) == 1 ? 1 : -1;
}

std::optional<std::uint64_t> PrimeField::sqrt(std::uint64_t a) const {
  a %= p_;
  if (a == 0) return 0;
  if (!chi_.empty()) {
    if (chi_[a] < 0) return std::nullopt;
    return root_[a];
  }
  if (legendre_by_power(a) != 1) return std::nullopt;
  if (p_ % 4 == 3) return pow(a, (p_ + 1) / 4);

  // Tonelli-Shanks
  std::uint64_t q = p_ - 1;
  unsigned s = 0;
  while ((q & 1) == 0) {
    q >>= 1;
    ++s;
  }
  std::uint64_t z = 2;
  while (legendre_by_power(z) != -1) ++z;
  std::uint64_t m = s;
  std::uint64_t c = pow(z, q);
  std::uint64_t t = pow(a, q);
  std::uint64_t r = pow(a, (q + 1) / 2);
  while (t != 1) {
    std::uint64_t i = 0;
    std::uint64_t tt = t;
    while (tt != 1) {
      tt = mul(tt, tt);
      ++i;
    }
    std::uint64_t b = c;
    for (std::uint64_t j = 0; j + 1 < m - i; ++j) b = mul(b, b);
    m = i;
    c = mul(b, b);
    t = mul(t, c);
    r = mul(r, b);
  }
  return r;
}

}  // namespace jacexp::ec
