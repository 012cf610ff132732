#include "jacexp/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "jacexp/errors.hpp"

namespace jacexp::report {

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) {
    throw ConsistencyError("table row has " + std::to_string(row.size()) + " cells, header has " +
                           std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

nlohmann::ordered_json json_cell(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(std::uint64_t v) const { return v; }
    // same 6 significant digits as the CSV
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_real(v);
      return std::stod(format_real(v));
    }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << '\n';
  }
}

void write_jsonl(std::ostream& os, const Table& t) {
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.header[i]] = json_cell(row[i]);
    os << obj.dump() << '\n';
  }
}

void write_table(std::ostream& os, const Table& t, Format f) {
  if (f == Format::kCsv) {
    write_csv(os, t);
  } else {
    write_jsonl(os, t);
  }
}

// -----------------------------------------------------------------------------

Table survey_table(const std::vector<survey::PrimeSurveyRecord>& records) {
  Table t{{"q", "min_exponent", "a", "b", "m1", "m2", "oracle_min", "supersingular_min"}, {}};
  for (const auto& r : records) {
    Cell ss = r.supersingular_min ? Cell{*r.supersingular_min} : Cell{};
    if (r.exhaustive()) {
      t.add({r.q, r.min_exponent, r.witness.a, r.witness.b, r.witness_structure.m1, r.witness_structure.m2,
             r.oracle_min, ss});
    } else {
      t.add({r.q, {}, {}, {}, {}, {}, r.oracle_min, ss});
    }
  }
  return t;
}

Table census_table(const std::vector<survey::CensusReport>& reports) {
  Table t{{"x", "k1", "observed", "bound", "exceeds"}, {}};
  for (const auto& r : reports) t.add({r.x, r.k1, r.observed, r.bound, r.exceeds});
  return t;
}

Table duke_table(const std::vector<survey::DukeFinding>& findings) {
  Table t{{"x", "epsilon", "q", "p", "k", "exponent", "threshold", "a", "b", "genus2_bound"}, {}};
  for (const auto& f : findings) {
    Cell a, b;
    if (f.realized_curve) {
      a = f.realized_curve->a;
      b = f.realized_curve->b;
    }
    t.add({f.x, f.epsilon, f.q, f.p_divisor, f.k_order, f.target_exponent, f.threshold, a, b,
           f.genus2_reported_bound});
  }
  return t;
}

Table exceptions_table(const survey::ThresholdReport& r) {
  Table t{{"q", "min_exponent", "threshold", "m1", "m2", "m1_divides", "m1_bound", "divisor_window", "k_outside",
           "k_weighted_g", "k_weighted_2g"},
          {}};
  for (const auto& e : r.exceptions) {
    t.add({e.q, e.min_exponent, e.threshold, e.m1, e.m2, e.m1_divides, e.m1_bound, e.divisor_window, e.k_outside,
           e.k_weighted_g, e.k_weighted_2g});
  }
  return t;
}

Table grid_table(const survey::ThresholdReport& r) {
  Table t{{"x", "primes", "exceptions", "fraction"}, {}};
  for (const auto& g : r.grid) t.add({g.x, g.primes, g.exceptions, g.fraction});
  return t;
}

// -----------------------------------------------------------------------------
// v1|q|mode|oracle_min|min_exponent|a|b|N|m1|m2|supersingular_min|class_count
// mode E or O; '-' marks an absent field.

namespace {

struct LineError {
  std::string what;
};

std::uint64_t parse_u64(const std::string& s, const char* field) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw LineError{std::string("bad ") + field + " field '" + s + "'"};
  }
  return v;
}

std::string opt_field(bool present, std::uint64_t v) { return present ? std::to_string(v) : "-"; }

survey::PrimeSurveyRecord decode_line(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  for (;;) {
    const std::size_t bar = line.find('|', start);
    f.push_back(line.substr(start, bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  if (f.empty() || f[0].empty() || f[0][0] != 'v') throw LineError{"missing schema version"};
  if (f[0] != "v" + std::to_string(kCacheSchemaVersion)) {
    throw LineError{"schema version mismatch: found " + f[0] + ", expected v" + std::to_string(kCacheSchemaVersion)};
  }
  if (f.size() != 12) throw LineError{"expected 12 fields, found " + std::to_string(f.size())};
  survey::PrimeSurveyRecord r;
  r.q = parse_u64(f[1], "q");
  if (f[2] == "O") {
    r.mode = survey::SurveyMode::kOracleOnly;
  } else if (f[2] == "E") {
    r.mode = survey::SurveyMode::kExhaustive;
  } else {
    throw LineError{"bad mode field '" + f[2] + "'"};
  }
  r.oracle_min = parse_u64(f[3], "oracle_min");
  if (r.exhaustive()) {
    r.min_exponent = parse_u64(f[4], "min_exponent");
    r.witness.p = r.q;
    r.witness.a = parse_u64(f[5], "a");
    r.witness.b = parse_u64(f[6], "b");
    r.witness_structure.q = r.q;
    r.witness_structure.N = parse_u64(f[7], "N");
    r.witness_structure.m1 = parse_u64(f[8], "m1");
    r.witness_structure.m2 = parse_u64(f[9], "m2");
    r.class_count = parse_u64(f[11], "class_count");
  } else {
    for (const int i : {4, 5, 6, 7, 8, 9, 11}) {
      if (f[i] != "-") throw LineError{"oracle-only record carries exhaustive field " + std::to_string(i)};
    }
  }
  if (f[10] != "-") r.supersingular_min = parse_u64(f[10], "supersingular_min");
  return r;
}

}  // namespace

std::string encode_record(const survey::PrimeSurveyRecord& r) {
  const bool e = r.exhaustive();
  std::string s = "v" + std::to_string(kCacheSchemaVersion) + "|" + std::to_string(r.q) + "|" + (e ? "E" : "O") +
                  "|" + std::to_string(r.oracle_min);
  s += "|" + opt_field(e, r.min_exponent);
  s += "|" + opt_field(e, r.witness.a);
  s += "|" + opt_field(e, r.witness.b);
  s += "|" + opt_field(e, r.witness_structure.N);
  s += "|" + opt_field(e, r.witness_structure.m1);
  s += "|" + opt_field(e, r.witness_structure.m2);
  s += "|" + opt_field(r.supersingular_min.has_value(), r.supersingular_min.value_or(0));
  s += "|" + opt_field(e, r.class_count);
  return s;
}

survey::PrimeSurveyRecord decode_record(const std::string& line) {
  try {
    return decode_line(line);
  } catch (const LineError& e) {
    throw CacheError(e.what, 0);
  }
}

SurveyCache::SurveyCache(std::filesystem::path dir)
    : dir_(std::move(dir)), file_(dir_ / ("survey.v" + std::to_string(kCacheSchemaVersion) + ".cache")) {}

survey::RecordMap SurveyCache::read() const {
  survey::RecordMap out;
  std::ifstream in(file_, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    try {
      auto r = decode_line(line);
      out[r.q] = std::move(r);
    } catch (const LineError& e) {
      throw CacheError(file_.string() + ": " + e.what, line_start);
    }
  }
  return out;
}

void SurveyCache::write(const survey::RecordMap& records) const {
  std::filesystem::create_directories(dir_);
  survey::RecordMap merged = read();
  for (const auto& [q, r] : records) merged[q] = r;
  const std::filesystem::path tmp = file_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot open " + tmp.string() + " for writing", 0);
    for (const auto& [q, r] : merged) out << encode_record(r) << '\n';
    out.flush();
    if (!out) throw CacheError("short write to " + tmp.string(), 0);
  }
  std::filesystem::rename(tmp, file_);
}

}  // namespace jacexp::report
