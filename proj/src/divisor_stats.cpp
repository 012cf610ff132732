#include "jacexp/divisor_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <thread>

#include "jacexp/errors.hpp"

namespace jacexp::divisors {

namespace {

constexpr std::uint64_t kSegmentBits = std::uint64_t{1} << 22;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Integers d with y < d <= z, keeping only those with no proper divisor in the
// same interval (their multiples are already covered).
class DivisorMarker {
 public:
  DivisorMarker(double y, double z) {
    const std::uint64_t lo = y < 0 ? 1 : static_cast<std::uint64_t>(std::floor(y)) + 1;
    const std::uint64_t hi = z < 1 ? 0 : static_cast<std::uint64_t>(std::floor(z));
    if (lo > hi) return;
    if (lo == 1) {
      everything_ = true;
      return;
    }
    std::vector<char> redundant(hi - lo + 1, 0);
    for (std::uint64_t d = lo; d <= hi; ++d) {
      if (redundant[d - lo]) continue;
      primitive_.push_back(d);
      for (std::uint64_t m = 2 * d; m <= hi; m += d) redundant[m - lo] = 1;
    }
  }

  bool empty() const { return !everything_ && primitive_.empty(); }

  // Sets bit (n - lo) of words for each n in [lo, hi) with a divisor in range.
  void mark(std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& words) const {
    const std::uint64_t len = hi - lo;
    words.assign((len + 63) / 64, 0);
    if (everything_) {
      for (std::uint64_t i = 0; i < len; ++i) words[i >> 6] |= std::uint64_t{1} << (i & 63);
      return;
    }
    for (std::uint64_t d : primitive_) {
      if (d >= hi) break;
      std::uint64_t m = (lo + d - 1) / d * d;
      for (; m < hi; m += d) {
        const std::uint64_t i = m - lo;
        words[i >> 6] |= std::uint64_t{1} << (i & 63);
      }
    }
  }

 private:
  bool everything_ = false;
  std::vector<std::uint64_t> primitive_;
};

std::uint64_t popcount_words(const std::vector<std::uint64_t>& words) {
  std::uint64_t c = 0;
  for (auto w : words) c += std::popcount(w);
  return c;
}

}  // namespace

double ford_delta() { return 1.0 - (1.0 + std::log(std::log(2.0))) / std::log(2.0); }

void DivisorWindow::validate() const {
  if (x < 1) throw ArgumentError("divisor window: x must be positive");
  if (!(y > 0)) throw ArgumentError("divisor window: y must be positive (got " + fmt(y) + ")");
  if (!(z >= y)) {
    throw ArgumentError("divisor window: need y <= z (got y=" + fmt(y) + ", z=" + fmt(z) + ")");
  }
  if (z > static_cast<double>(x)) {
    throw ArgumentError("divisor window: need z <= x (got z=" + fmt(z) + ", x=" +
                        std::to_string(x) + ")");
  }
}

std::string DivisorWindow::estimate_range_violation() const {
  const double xd = static_cast<double>(x);
  if (!(y >= 3)) return "3 <= y violated (y=" + fmt(y) + ")";
  if (!(y * y <= xd)) return "y <= sqrt(x) violated (y=" + fmt(y) + ", x=" + std::to_string(x) + ")";
  if (!(z >= 2 * y)) return "2y <= z violated (y=" + fmt(y) + ", z=" + fmt(z) + ")";
  if (!(z <= y * y)) return "z <= y^2 violated (y=" + fmt(y) + ", z=" + fmt(z) + ")";
  return {};
}

std::uint64_t count_H(const DivisorWindow& w, unsigned threads) {
  w.validate();
  const DivisorMarker marker(w.y, w.z);
  if (marker.empty()) return 0;

  // n ranges over [1, x]
  const std::uint64_t segments = (w.x + kSegmentBits - 1) / kSegmentBits;
  std::vector<std::uint64_t> per_segment(segments, 0);
  auto work = [&](unsigned tid, unsigned nthreads) {
    std::vector<std::uint64_t> words;
    for (std::uint64_t s = tid; s < segments; s += nthreads) {
      const std::uint64_t lo = 1 + s * kSegmentBits;
      const std::uint64_t hi = std::min(w.x + 1, lo + kSegmentBits);
      marker.mark(lo, hi, words);
      per_segment[s] = popcount_words(words);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(segments)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::uint64_t total = 0;
  for (auto c : per_segment) total += c;  // index order
  return total;
}

std::uint64_t count_H_shifted(const DivisorWindow& w, std::int64_t lambda,
                              const primes::PrimeSieve& sieve) {
  w.validate();
  if (lambda == 0) throw ArgumentError("count_H_shifted: lambda must be nonzero");
  if (sieve.limit() < w.x) {
    throw CapacityError("count_H_shifted: sieve limit " + std::to_string(sieve.limit()) +
                        " does not cover x=" + std::to_string(w.x));
  }
  const DivisorMarker marker(w.y, w.z);
  if (marker.empty()) return 0;

  // n = p + lambda over primes p in [2, x]; only n >= 1 can have a divisor in (y, z]
  const std::int64_t n_lo_s = std::max<std::int64_t>(1, 2 + lambda);
  const std::int64_t n_hi_s = static_cast<std::int64_t>(w.x) + lambda;
  if (n_hi_s < n_lo_s) return 0;
  const auto n_lo = static_cast<std::uint64_t>(n_lo_s);
  const auto n_hi = static_cast<std::uint64_t>(n_hi_s);

  std::uint64_t count = 0;
  std::vector<std::uint64_t> words;
  for (std::uint64_t lo = n_lo; lo <= n_hi; lo += kSegmentBits) {
    const std::uint64_t hi = std::min(n_hi + 1, lo + kSegmentBits);
    marker.mark(lo, hi, words);
    const auto p_lo = static_cast<std::uint64_t>(static_cast<std::int64_t>(lo) - lambda);
    const auto p_hi = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi - 1) - lambda);
    sieve.for_each_prime(p_lo, p_hi, [&](std::uint64_t p) {
      const std::uint64_t i = static_cast<std::uint64_t>(static_cast<std::int64_t>(p) + lambda) - lo;
      if ((words[i >> 6] >> (i & 63)) & 1) ++count;
    });
  }
  return count;
}

std::uint64_t count_H_shifted(const DivisorWindow& w, std::int64_t lambda) {
  w.validate();
  const primes::PrimeSieve sieve(std::max<std::uint64_t>(2, w.x));
  return count_H_shifted(w, lambda, sieve);
}

FordEstimate ford_upper_estimate(const DivisorWindow& w) {
  if (auto why = w.estimate_range_violation(); !why.empty()) {
    throw DomainError("ford_upper_estimate: " + why);
  }
  FordEstimate e;
  e.delta = ford_delta();
  e.u = std::log(w.z) / std::log(w.y) - 1.0;
  e.value = static_cast<double>(w.x) * std::pow(e.u, e.delta) * std::pow(std::log(2.0 / e.u), -1.5);
  return e;
}

std::vector<RatioRow> ratio_sweep(std::uint64_t x, std::vector<double> y_list,
                                  const RatioSweepOptions& opts) {
  std::sort(y_list.begin(), y_list.end());
  std::vector<DivisorWindow> windows;
  for (double y : y_list) {
    double z = 0;
    switch (opts.rule) {
      case ZRule::kDouble: z = 2 * y; break;
      case ZRule::kSquare: z = y * y; break;
      case ZRule::kFixed: z = opts.fixed_z; break;
    }
    DivisorWindow w{x, y, z};
    w.validate();
    if (auto why = w.estimate_range_violation(); !why.empty()) {
      throw DomainError("ratio_sweep: window y=" + fmt(y) + ": " + why);
    }
    windows.push_back(w);
  }
  std::vector<RatioRow> rows;
  if (windows.empty()) return rows;

  const primes::PrimeSieve sieve(std::max<std::uint64_t>(2, x));
  const double log_x = std::log(static_cast<double>(x));
  for (const auto& w : windows) {
    RatioRow r;
    r.y = w.y;
    r.z = w.z;
    const FordEstimate est = ford_upper_estimate(w);
    r.u = est.u;
    r.estimate = est.value;
    r.H = count_H(w, opts.threads);
    r.H_shifted = count_H_shifted(w, opts.lambda, sieve);
    r.ratio = static_cast<double>(r.H) / r.estimate;
    r.ratio_shifted = r.H == 0 ? std::nan("")
                               : static_cast<double>(r.H_shifted) * log_x / static_cast<double>(r.H);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace jacexp::divisors
