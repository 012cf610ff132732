#pragma once

/// @file report.hpp
/// @brief CSV / JSONL tables and the versioned survey cache.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "jacexp/survey.hpp"

namespace jacexp::report {

/// Empty, integer, real (6 significant digits), text or flag.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string, bool>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

enum class Format { kCsv, kJsonl };

std::string format_real(double v);
std::string format_cell(const Cell& c);

void write_csv(std::ostream& os, const Table& t);
void write_jsonl(std::ostream& os, const Table& t);
void write_table(std::ostream& os, const Table& t, Format f);

// -----------------------------------------------------------------------------
// Report tables with fixed headers
// -----------------------------------------------------------------------------

Table survey_table(const std::vector<survey::PrimeSurveyRecord>& records);
Table census_table(const std::vector<survey::CensusReport>& reports);
Table duke_table(const std::vector<survey::DukeFinding>& findings);
Table exceptions_table(const survey::ThresholdReport& r);
Table grid_table(const survey::ThresholdReport& r);

// -----------------------------------------------------------------------------
// Survey cache: one `v1|...` line per prime, sorted by q
// -----------------------------------------------------------------------------

inline constexpr int kCacheSchemaVersion = 1;

std::string encode_record(const survey::PrimeSurveyRecord& r);
/// CacheError (offset 0 relative to the line) on malformed or foreign-version input.
survey::PrimeSurveyRecord decode_record(const std::string& line);

class SurveyCache {
 public:
  explicit SurveyCache(std::filesystem::path dir);

  const std::filesystem::path& file() const { return file_; }

  /// Existing records; an absent file reads as empty. Leftover *.tmp files are
  /// ignored. CacheError names the byte offset of the first bad line.
  survey::RecordMap read() const;

  /// Merges `records` into the stored set and atomically replaces the file.
  void write(const survey::RecordMap& records) const;

 private:
  std::filesystem::path dir_;
  std::filesystem::path file_;
};

}  // namespace jacexp::report
