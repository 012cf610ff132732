#pragma once

/// @file survey.hpp
/// @brief Finite experiments over ranges of primes: minimum exponents, Q_k
/// census, the explicit small-exponent construction, and prime-sum checks.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jacexp/elliptic_core.hpp"

namespace jacexp::survey {

enum class SurveyMode { kExhaustive, kOracleOnly };

struct PrimeSurveyRecord {
  std::uint64_t q = 0;
  std::uint64_t oracle_min = 0;
  SurveyMode mode = SurveyMode::kOracleOnly;
  // filled in exhaustive mode only
  std::uint64_t min_exponent = 0;
  ec::WeierstrassCurve witness;
  ec::GroupStructure witness_structure;
  std::optional<std::uint64_t> supersingular_min;
  std::uint64_t class_count = 0;

  bool exhaustive() const { return mode == SurveyMode::kExhaustive; }
  friend bool operator==(const PrimeSurveyRecord&, const PrimeSurveyRecord&) = default;
};

struct SurveyOptions {
  SurveyMode mode = SurveyMode::kExhaustive;
  std::uint64_t p_exhaustive = ec::kDefaultExhaustiveThreshold;
  unsigned max_samples = 200;
  unsigned threads = 1;
};

/// CapacityError for q > p_exhaustive in exhaustive mode.
PrimeSurveyRecord survey_prime(std::uint64_t q, const SurveyOptions& opts = {});

using RecordSink = std::function<void(const PrimeSurveyRecord&)>;
using RecordMap = std::map<std::uint64_t, PrimeSurveyRecord>;

/// Records for every prime q >= 5 in [x_lo, x_hi], ascending by q. Primes found
/// in `cached` (with the requested mode) are reused; `on_computed` sees each
/// freshly computed record, serialized across workers.
std::vector<PrimeSurveyRecord> survey_range(std::uint64_t x_lo, std::uint64_t x_hi, const SurveyOptions& opts = {},
                                            const RecordMap* cached = nullptr, const RecordSink& on_computed = {});

// -----------------------------------------------------------------------------
// Threshold verifiers
// -----------------------------------------------------------------------------

enum class ThresholdRule {
  kPower,    // q^exponent
  kDukeLog,  // q^(3/4) / log q
  kTrivial,  // sqrt(q) - 1
};

struct Threshold {
  ThresholdRule rule = ThresholdRule::kPower;
  double exponent = 0.75;

  double value(std::uint64_t q) const;
  std::string describe() const;
};

struct ExceptionRow {
  std::uint64_t q = 0;
  std::uint64_t min_exponent = 0;
  double threshold = 0;
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  bool m1_divides = false;        // m1 | q - 1
  bool below_three_quarters = false;  // m2 < q^(3/4), exact
  bool m1_bound = false;          // m1 >= (sqrt q - 1)^2 / q^(3/4), exact
  // classification by the condition each exception trips
  bool divisor_window = false;
  bool k_outside = false;
  bool k_weighted_g = false;
  bool k_weighted_2g = false;
};

struct GridPoint {
  std::uint64_t x = 0;
  std::uint64_t primes = 0;
  std::uint64_t exceptions = 0;
  double fraction = 0;
};

struct ThresholdReport {
  std::uint64_t x = 0;
  Threshold threshold;
  double eta = 0;
  std::vector<ExceptionRow> exceptions;
  std::vector<GridPoint> grid;  // x, x/2, x/4, ... down to the first prime
  std::uint64_t violations = 0;  // m1 not dividing q - 1, or an implied m1 bound failing
};

/// Every prime 5 <= q <= x must have a record (DependencyError otherwise).
/// divisor_window: q - 1 has a divisor in (x^(1/4 - 3 eta), x^(1/4 + 3 eta)];
/// k flags: K-set membership of (m1) at genus 1.
ThresholdReport verify_thm1(std::uint64_t x, const std::vector<PrimeSurveyRecord>& records, const Threshold& threshold,
                            double eta);

/// Threshold q^(1/2 + epsilon); divisor_window uses (x^(1/2 - 2 eta), x^(1/2 + 2 eta)] with eta = 2 epsilon.
ThresholdReport verify_thm3(std::uint64_t x, const std::vector<PrimeSurveyRecord>& records, double epsilon);

/// m1^4 q^3 >= (sqrt q - 1)^8, in exact arithmetic.
bool m1_lower_bound_holds(std::uint64_t q, std::uint64_t m1);

// -----------------------------------------------------------------------------
// Census, construction, prime sums
// -----------------------------------------------------------------------------

struct CensusReport {
  std::uint64_t x = 0;
  unsigned g = 1;
  std::uint64_t k1 = 0;
  std::uint64_t observed = 0;
  double bound = 0;
  bool exceeds = false;
};

/// Primes q in (x/2, x] with some curve over F_q having m1 = k1. Ordinary
/// membership comes from the attainability oracle; the supersingular class is
/// scanned when needed, which requires q <= p_exhaustive (CapacityError).
CensusReport qk_census(std::uint64_t x, std::uint64_t k1, std::uint64_t p_exhaustive = ec::kDefaultExhaustiveThreshold,
                       double bound_scale = 1.0);

struct DukeFinding {
  std::uint64_t x = 0;
  double epsilon = 0;
  std::uint64_t q = 0;
  std::uint64_t p_divisor = 0;
  std::uint64_t k_order = 0;
  std::uint64_t target_exponent = 0;  // k / p
  double threshold = 0;               // q^(3/4 + epsilon)
  std::optional<ec::WeierstrassCurve> realized_curve;
  double genus2_reported_bound = 0;   // target / 2, as asserted for the genus-2 step
};

struct DukeReport {
  double y = 0;
  double z = 0;
  std::vector<DukeFinding> findings;  // ascending (q, p, k)
  std::uint64_t over_threshold = 0;   // candidates dropped because k/p > q^(3/4 + epsilon)
  std::uint64_t prime_set = 0;        // q in the range with a prime divisor of q - 1 in (y, z]
  std::uint64_t pi_x = 0;
  double density = 0;                 // prime_set / pi_x
};

struct DukeOptions {
  std::uint64_t p_exhaustive = ec::kDefaultExhaustiveThreshold;
  bool realize = true;
};

/// 0 < epsilon <= 1/20.
DukeReport duke_construct(std::uint64_t x, double epsilon, const DukeOptions& opts = {});

struct MertensReport {
  std::uint64_t x = 0;
  double epsilon = 0;
  double y = 0;
  double z = 0;
  double sum = 0;
  double target = 0;  // log((1 - 2 eps) / (1 - 4 eps))
  double gap = 0;     // |sum - target|
};

/// 0 <= epsilon <= 1/20.
MertensReport mertens_check(std::uint64_t x, double epsilon);

struct BvReport {
  std::uint64_t x = 0;
  double y = 0;
  double z = 0;
  double error_sum = 0;
  double normalized = 0;  // error_sum / (x / log^2 x)
};

/// Sum over primes y < p <= z of |pi(x; p, 1) - pi(x) / (p - 1)|.
BvReport bv_check(std::uint64_t x, double y, double z);

}  // namespace jacexp::survey
