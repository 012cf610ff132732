#pragma once

/// @file cli.hpp
/// @brief Command-line configuration and dispatch.
///
/// Exit status: 0 success, 1 a checked invariant failed, 2 usage error,
/// 3 any other error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jacexp/report.hpp"

namespace jacexp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitError = 3;

/// Overrides the default cache directory when --cache-dir is not given.
inline constexpr const char* kCacheDirEnv = "JACEXP_CACHE_DIR";

struct RunConfig {
  std::string command;

  // numerics, kept as given until the dispatched command validates them
  std::optional<std::uint64_t> x;
  std::uint64_t x_lo = 5;
  std::optional<std::uint64_t> x_hi;
  std::optional<double> y;
  std::optional<double> z;
  std::optional<double> epsilon;
  double eta = 0.005;
  unsigned genus = 1;
  std::vector<std::uint64_t> k_tuple;
  std::optional<unsigned> s;
  std::optional<std::uint64_t> k1;
  std::uint64_t modulus = 1;
  std::int64_t residue = 0;
  std::int64_t lambda = -1;
  std::vector<double> y_list;
  std::string z_rule = "double";
  std::optional<double> z_fixed;
  std::string mode = "exhaustive";
  std::string variant = "power";
  std::string table = "exceptions";
  double bound_scale = 1.0;

  unsigned threads = 1;
  std::string cache_dir;
  report::Format format = report::Format::kCsv;
  bool resume = false;
  std::uint64_t p_exhaustive = 2000;
  std::string output;
};

/// Parses argv into a config. Throws UsageError on unknown commands or flags.
/// Returns nullopt after printing help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Runs one command; the report goes to `out` (or the configured file),
/// diagnostics and summaries to `err`.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with exceptions mapped to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jacexp::cli
