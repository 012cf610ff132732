#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "jacexp/cli.hpp"
#include "jacexp/errors.hpp"
#include "jacexp/report.hpp"

using namespace jacexp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jacexp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("jacexp_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("cell formatting") {
  CHECK(report::format_real(862.125) == "862.125");
  CHECK(report::format_real(1.0 / 3) == "0.333333");
  CHECK(report::format_real(1234567.0) == "1.23457e+06");
  CHECK(report::format_cell(report::Cell{}).empty());
  CHECK(report::format_cell(report::Cell{std::uint64_t{18446744073709551615ULL}}) == "18446744073709551615");
  CHECK(report::format_cell(report::Cell{true}) == "true");
}

TEST_CASE("csv and jsonl carry the same fields") {
  report::Table t{{"a", "b", "c"}, {}};
  t.add({std::uint64_t{1}, 0.5, report::Cell{}});
  t.add({std::int64_t{-2}, 1.0 / 3, std::string("x,y")});
  CHECK_THROWS_AS(t.add({std::uint64_t{1}}), ConsistencyError);
  std::ostringstream csv, jsonl;
  report::write_csv(csv, t);
  report::write_jsonl(jsonl, t);
  CHECK(csv.str() == "a,b,c\n1,0.5,\n-2,0.333333,\"x,y\"\n");
  std::istringstream lines(jsonl.str());
  std::string line;
  std::getline(lines, line);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["a"] == 1);
  CHECK(j["c"].is_null());
  std::getline(lines, line);
  CHECK(nlohmann::json::parse(line)["b"] == 0.333333);
}

TEST_CASE("record encoding round-trips") {
  survey::SurveyOptions oracle_only;
  oracle_only.mode = survey::SurveyMode::kOracleOnly;
  for (const auto& r : survey::survey_range(5, 120)) CHECK(report::decode_record(report::encode_record(r)) == r);
  for (const auto& r : survey::survey_range(5, 120, oracle_only))
    CHECK(report::decode_record(report::encode_record(r)) == r);
  CHECK(report::encode_record(survey::survey_prime(5)) == "v1|5|E|2|2|1|0|4|2|2|6|12");
  CHECK_THROWS_AS(report::decode_record("v2|5|E|2|2|1|0|4|2|2|6|12"), CacheError);
  CHECK_THROWS_AS(report::decode_record("v1|5|E|2|2|1|0|4|2|2|6"), CacheError);
  CHECK_THROWS_AS(report::decode_record("v1|5|O|2|2|-|-|-|-|-|-|-"), CacheError);
  CHECK_THROWS_AS(report::decode_record("5|E"), CacheError);
}

TEST_CASE("cache files") {
  const auto dir = scratch("cache");
  const report::SurveyCache cache(dir);
  CHECK(cache.read().empty());

  survey::RecordMap first;
  for (const auto& r : survey::survey_range(5, 60)) first[r.q] = r;
  cache.write(first);
  CHECK(cache.read() == first);

  // leftover temp file from an interrupted write is ignored
  std::ofstream(cache.file().string() + ".tmp") << "garbage\n";
  CHECK(cache.read() == first);

  survey::RecordMap more;
  for (const auto& r : survey::survey_range(61, 90)) more[r.q] = r;
  cache.write(more);
  auto merged = first;
  merged.insert(more.begin(), more.end());
  CHECK(cache.read() == merged);

  // version mismatch names the byte offset of the offending line
  const std::string body = slurp(cache.file());
  const auto second_line = body.find('\n') + 1;
  std::string bad = body;
  bad.replace(second_line, 2, "v9");
  std::ofstream(cache.file(), std::ios::binary | std::ios::trunc) << bad;
  try {
    cache.read();
    FAIL("expected CacheError");
  } catch (const CacheError& e) {
    CHECK(e.byte_offset() == second_line);
    CHECK(std::string(e.what()).find("mismatch") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli examples") {
  auto s = run_cli({"survey", "--x-lo", "5", "--x-hi", "11"});
  CHECK(s.status == 0);
  CHECK(s.out ==
        "q,min_exponent,a,b,m1,m2,oracle_min,supersingular_min\n"
        "5,2,1,0,2,2,2,6\n"
        "7,2,0,6,2,2,2,4\n"
        "11,4,1,9,2,4,4,6\n");

  auto h = run_cli({"hxyz", "--x", "100", "--y", "2", "--z", "4"});
  CHECK(h.status == 0);
  CHECK(h.out == "x,y,z,H\n100,2,4,50\n");

  auto d = run_cli({"duke", "--x", "10000", "--epsilon", "0.05"});
  CHECK(d.status == 0);
  CHECK(d.out.rfind("x,epsilon,q,p,k,exponent,threshold,a,b,genus2_bound\n10000,0.05,1093,7,1029,147,", 0) == 0);

  auto c = run_cli({"census", "--x", "100", "--k1", "2"});
  CHECK(c.status == 0);
  CHECK(c.out == "x,k1,observed,bound,exceeds\n100,2,10,862.125,false\n");

  auto j = run_cli({"--format", "jsonl", "bv", "--x", "100", "--y", "3", "--z", "10"});
  CHECK(j.status == 0);
  CHECK(nlohmann::json::parse(j.out)["error_sum"] == 2.41667);

  auto f = run_cli({"ford-sweep", "--x", "1e5", "--y-list", "20,50"});
  CHECK(f.status == 0);
  CHECK(f.out.rfind("y,z,u,H,H_shifted,estimate,ratio,ratio_shifted\n", 0) == 0);

  CHECK(run_cli({"sieve", "--x", "1e6"}).out == "x,k,a,count\n1000000,1,0,78498\n");
  CHECK(run_cli({"mertens", "--x", "1e6"}).status == 0);
  CHECK(run_cli({"bounds", "--x", "101", "--k", "2"}).status == 0);
  CHECK(run_cli({"thm1", "--x", "200", "--variant", "duke-log"}).status == 0);
  CHECK(run_cli({"thm3", "--x", "200", "--table", "grid"}).status == 0);
  CHECK(run_cli({"hxyz-shifted", "--x", "30", "--y", "2", "--z", "4"}).out == "x,y,z,lambda,H_shifted\n30,2,4,-1,6\n");
}

TEST_CASE("cli usage errors name the precondition") {
  auto u = run_cli({"frobnicate"});
  CHECK(u.status == cli::kExitUsage);
  auto e = run_cli({"duke", "--x", "10000", "--epsilon", "0.2"});
  CHECK(e.status == cli::kExitUsage);
  CHECK(e.err.find("epsilon") != std::string::npos);
  auto w = run_cli({"hxyz", "--x", "100", "--y", "5", "--z", "4"});
  CHECK(w.status == cli::kExitUsage);
  CHECK(w.err.find("y <= z") != std::string::npos);
  CHECK(run_cli({"survey", "--x-hi", "3000"}).status == cli::kExitUsage);
  CHECK(run_cli({"hxyz-shifted", "--x", "30", "--y", "2", "--z", "4", "--lambda", "0"}).status == cli::kExitUsage);
  CHECK(run_cli({"sieve", "--x", "1.5"}).status == cli::kExitUsage);
  CHECK(run_cli({"--help"}).status == 0);
}

TEST_CASE("falsified census bound flips the exit status") {
  CHECK(run_cli({"census", "--x", "200"}).status == 0);
  const auto r = run_cli({"census", "--x", "200", "--bound-scale", "0.001"});
  CHECK(r.status == cli::kExitInvariant);
  CHECK(r.out.find("true") != std::string::npos);
}

TEST_CASE("survey output is scheduler independent and resumable") {
  const auto one = run_cli({"survey", "--x-hi", "300", "--threads", "1"});
  const auto four = run_cli({"survey", "--x-hi", "300", "--threads", "4"});
  CHECK(one.status == 0);
  CHECK(one.out == four.out);

  const auto dir = scratch("resume");
  const auto partial = run_cli({"survey", "--x-hi", "150", "--cache-dir", dir.string()});
  CHECK(partial.status == 0);
  std::ofstream((dir / "survey.v1.cache").string() + ".tmp") << "v1|151|E|truncated";
  const auto resumed = run_cli({"survey", "--x-hi", "300", "--cache-dir", dir.string(), "--resume"});
  CHECK(resumed.out == one.out);
  CHECK(resumed.err.find("reused") != std::string::npos);

  // environment override when no flag is given
  const auto env_dir = scratch("env");
  ::setenv(cli::kCacheDirEnv, env_dir.string().c_str(), 1);
  CHECK(run_cli({"survey", "--x-hi", "50"}).status == 0);
  ::unsetenv(cli::kCacheDirEnv);
  CHECK(fs::exists(env_dir / "survey.v1.cache"));
  fs::remove_all(dir);
  fs::remove_all(env_dir);
}
