#include "jacexp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "jacexp/attainability.hpp"
#include "jacexp/divisor_stats.hpp"
#include "jacexp/errors.hpp"
#include "jacexp/prime_engine.hpp"
#include "jacexp/survey.hpp"

namespace jacexp::cli {

namespace {

using report::Cell;
using report::Table;

// Plain digits, or a real in scientific notation whose value is an exact integer.
std::uint64_t parse_integer(const std::string& flag, const std::string& text) {
  if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return std::stoull(text);
    } catch (const std::out_of_range&) {
      throw UsageError(flag + " " + text + " is out of range");
    }
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !(v >= 0) || v >= 1.8e19 || std::floor(v) != v) {
    throw UsageError(flag + " expects a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

void add_integer(CLI::App* sub, const std::string& flag, std::optional<std::uint64_t>& target,
                 const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&target, flag](const std::string& s) { target = parse_integer(flag, s); }, help);
}

void add_integer(CLI::App* sub, const std::string& flag, std::uint64_t& target, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&target, flag](const std::string& s) { target = parse_integer(flag, s); }, help);
}

std::uint64_t need(const std::optional<std::uint64_t>& v, const char* flag, const std::string& cmd) {
  if (!v) throw UsageError(cmd + " requires " + flag);
  return *v;
}

double need(const std::optional<double>& v, const char* flag, const std::string& cmd) {
  if (!v) throw UsageError(cmd + " requires " + flag);
  return *v;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

// ---------------------------------------------------------------------------

struct Context {
  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;

  void emit(const Table& t) const { report::write_table(out, t, cfg.format); }
};

std::string resolved_cache_dir(const RunConfig& cfg) {
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
  return {};
}

std::vector<survey::PrimeSurveyRecord> cached_survey(const RunConfig& cfg, std::uint64_t lo, std::uint64_t hi,
                                                     survey::SurveyMode mode, std::ostream& err) {
  survey::SurveyOptions opts;
  opts.mode = mode;
  opts.p_exhaustive = cfg.p_exhaustive;
  opts.threads = cfg.threads;
  const std::string dir = resolved_cache_dir(cfg);
  if (dir.empty()) return survey::survey_range(lo, hi, opts);

  const report::SurveyCache cache(dir);
  survey::RecordMap known;
  if (cfg.resume) known = cache.read();
  survey::RecordMap pending;
  std::uint64_t computed = 0;
  auto sink = [&](const survey::PrimeSurveyRecord& r) {
    pending[r.q] = r;
    ++computed;
    if (pending.size() >= 16) {
      cache.write(pending);
      pending.clear();
    }
  };
  auto records = survey::survey_range(lo, hi, opts, &known, sink);
  cache.write(pending);
  err << "# cache " << cache.file().string() << ": " << computed << " computed, " << records.size() - computed
      << " reused\n";
  return records;
}

int cmd_sieve(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "sieve");
  require(x >= 2 && x <= primes::kSieveCeiling, "sieve: need 2 <= x <= 2^32");
  require(cfg.modulus >= 1, "sieve: --k must be >= 1");
  const primes::PrimeSieve sieve(x);
  Table t{{"x", "k", "a", "count"}, {}};
  t.add({x, cfg.modulus, cfg.residue, primes::prime_count(sieve, static_cast<double>(x), cfg.modulus, cfg.residue)});
  c.emit(t);
  return kExitOk;
}

divisors::DivisorWindow window_from(const RunConfig& cfg, const std::string& cmd) {
  divisors::DivisorWindow w{need(cfg.x, "--x", cmd), need(cfg.y, "--y", cmd), need(cfg.z, "--z", cmd)};
  require(w.y > 0 && w.y <= w.z && w.z <= static_cast<double>(w.x), cmd + ": need 0 < y <= z <= x");
  return w;
}

int cmd_hxyz(const Context& c) {
  const auto w = window_from(c.cfg, "hxyz");
  require(c.cfg.threads >= 1, "hxyz: --threads must be >= 1");
  Table t{{"x", "y", "z", "H"}, {}};
  t.add({w.x, w.y, w.z, divisors::count_H(w, c.cfg.threads)});
  c.emit(t);
  return kExitOk;
}

int cmd_hxyz_shifted(const Context& c) {
  const auto w = window_from(c.cfg, "hxyz-shifted");
  require(c.cfg.lambda != 0, "hxyz-shifted: --lambda must be nonzero");
  require(w.x >= 2 && w.x <= primes::kSieveCeiling, "hxyz-shifted: need 2 <= x <= 2^32");
  Table t{{"x", "y", "z", "lambda", "H_shifted"}, {}};
  t.add({w.x, w.y, w.z, c.cfg.lambda, divisors::count_H_shifted(w, c.cfg.lambda)});
  c.emit(t);
  return kExitOk;
}

int cmd_ford_sweep(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "ford-sweep");
  require(!cfg.y_list.empty(), "ford-sweep requires --y-list");
  divisors::RatioSweepOptions opts;
  if (cfg.z_rule == "double") {
    opts.rule = divisors::ZRule::kDouble;
  } else if (cfg.z_rule == "square") {
    opts.rule = divisors::ZRule::kSquare;
  } else {
    opts.rule = divisors::ZRule::kFixed;
    opts.fixed_z = need(cfg.z_fixed, "--z-fixed", "ford-sweep --z-rule fixed");
  }
  require(cfg.lambda != 0, "ford-sweep: --lambda must be nonzero");
  opts.lambda = cfg.lambda;
  opts.threads = cfg.threads;
  Table t{{"y", "z", "u", "H", "H_shifted", "estimate", "ratio", "ratio_shifted"}, {}};
  for (const auto& r : divisors::ratio_sweep(x, cfg.y_list, opts)) {
    t.add({r.y, r.z, r.u, r.H, r.H_shifted, r.estimate, r.ratio, r.ratio_shifted});
  }
  c.emit(t);
  return kExitOk;
}

int cmd_survey(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t hi = need(cfg.x_hi, "--x-hi", "survey");
  require(cfg.x_lo <= hi, "survey: need --x-lo <= --x-hi");
  require(cfg.threads >= 1, "survey: --threads must be >= 1");
  const bool exhaustive = cfg.mode == "exhaustive";
  require(!exhaustive || hi <= cfg.p_exhaustive,
          "survey: exhaustive mode needs --x-hi <= --p-exhaustive (" + std::to_string(cfg.p_exhaustive) + ")");
  const auto records = cached_survey(cfg, cfg.x_lo, hi,
                                     exhaustive ? survey::SurveyMode::kExhaustive : survey::SurveyMode::kOracleOnly,
                                     c.err);
  c.emit(report::survey_table(records));

  std::uint64_t violations = 0;
  for (const auto& r : records) {
    if (!r.exhaustive()) continue;
    const std::uint64_t m = r.min_exponent;
    // min = oracle, (min + 1)^2 >= q, witness exponent = min
    if (m != r.oracle_min || (m + 1) * (m + 1) < r.q || r.witness_structure.m2 != m) {
      ++violations;
      c.err << "# invariant violated at q=" << r.q << "\n";
    }
  }
  return violations ? kExitInvariant : kExitOk;
}

int cmd_census(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "census");
  require(x >= 2 && x <= primes::kSieveCeiling, "census: need 2 <= x <= 2^32");
  require(cfg.bound_scale > 0, "census: --bound-scale must be positive");
  std::vector<std::uint64_t> ks;
  if (cfg.k1) {
    require(*cfg.k1 >= 1, "census: --k1 must be >= 1");
    ks.push_back(*cfg.k1);
  } else {
    const auto top = static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(x)) + 1.0));
    for (std::uint64_t k = 1; k <= top; ++k) ks.push_back(k);
  }
  std::vector<survey::CensusReport> reps;
  for (const auto k : ks) reps.push_back(survey::qk_census(x, k, cfg.p_exhaustive, cfg.bound_scale));
  c.emit(report::census_table(reps));
  for (const auto& r : reps) {
    if (r.exceeds) return kExitInvariant;
  }
  return kExitOk;
}

bool duke_finding_ok(const survey::DukeFinding& f, double y, double z, std::uint64_t p_exhaustive) {
  const auto w = attain::hasse_window(f.q, 1);
  bool ok = (f.q - 1) % f.p_divisor == 0 && static_cast<double>(f.p_divisor) > y &&
            static_cast<double>(f.p_divisor) <= z && f.k_order % (f.p_divisor * f.p_divisor) == 0 &&
            w.contains(f.k_order) && static_cast<double>(f.target_exponent) <= f.threshold;
  if (ok && f.realized_curve) {
    const auto& E = *f.realized_curve;
    const auto gs = ec::group_structure(E, {p_exhaustive, 200});
    ok = gs.N == f.k_order && gs.m2 == f.target_exponent && !ec::is_supersingular(E) && ec::j_invariant(E) != 0 &&
         ec::j_invariant(E) != 1728 % E.p;
  }
  return ok;
}

int cmd_duke(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "duke");
  const double eps = cfg.epsilon.value_or(0.05);
  require(eps > 0 && eps <= 0.05, "duke: need 0 < epsilon <= 1/20");
  require(x >= 5 && x <= primes::kSieveCeiling, "duke: need 5 <= x <= 2^32");
  const auto rep = survey::duke_construct(x, eps, {cfg.p_exhaustive, true});
  c.emit(report::duke_table(rep.findings));
  c.err << "# y=" << report::format_real(rep.y) << " z=" << report::format_real(rep.z)
        << " prime_set=" << rep.prime_set << " pi_x=" << rep.pi_x << " density=" << report::format_real(rep.density)
        << " over_threshold=" << rep.over_threshold << "\n"
        << "# genus2_bound is the asserted genus-2 exponent bound target/2, not computed\n";
  for (const auto& f : rep.findings) {
    if (!duke_finding_ok(f, rep.y, rep.z, cfg.p_exhaustive)) {
      c.err << "# invariant violated at q=" << f.q << " k=" << f.k_order << "\n";
      return kExitInvariant;
    }
  }
  return kExitOk;
}

int cmd_mertens(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "mertens");
  const double eps = cfg.epsilon.value_or(0.05);
  require(eps >= 0 && eps <= 0.05, "mertens: need 0 <= epsilon <= 1/20");
  require(x >= 2, "mertens: need x >= 2");
  const auto r = survey::mertens_check(x, eps);
  Table t{{"x", "epsilon", "y", "z", "sum", "target", "gap"}, {}};
  t.add({r.x, r.epsilon, r.y, r.z, r.sum, r.target, r.gap});
  c.emit(t);
  return kExitOk;
}

int cmd_bv(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "bv");
  const double y = need(cfg.y, "--y", "bv");
  const double z = need(cfg.z, "--z", "bv");
  require(x >= 2 && x <= primes::kSieveCeiling, "bv: need 2 <= x <= 2^32");
  require(y >= 0 && y <= z, "bv: need 0 <= y <= z");
  const auto r = survey::bv_check(x, y, z);
  Table t{{"x", "y", "z", "error_sum", "normalized"}, {}};
  t.add({r.x, r.y, r.z, r.error_sum, r.normalized});
  c.emit(t);
  return kExitOk;
}

int cmd_bounds(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t q = need(cfg.x, "--x", "bounds");
  const unsigned g = cfg.genus;
  require(g >= 1, "bounds: --genus must be >= 1");
  require(q >= 2, "bounds: need x >= 2");
  const double qd = static_cast<double>(q);
  Table t{{"quantity", "value"}, {}};
  auto row = [&](const std::string& name, Cell v) { t.add({name, std::move(v)}); };
  if (q >= 5 && primes::is_prime_u64(q)) {
    const auto w = attain::hasse_window(q, g);
    row("hasse_lower", w.lower);
    row("hasse_upper", w.upper);
    row("hasse_first", w.first);
    row("hasse_last", w.last);
  }
  row("trivial_bound", attain::trivial_exponent_bound(qd, g));
  const auto& k = cfg.k_tuple;
  if (!k.empty()) {
    const unsigned s = cfg.s.value_or(static_cast<unsigned>(k.size()));
    if (s >= 1 && s <= 2 * g - 1 && k.size() >= s) {
      row("exponent_floor", attain::exponent_floor(qd, g, s, std::span(k).first(s)));
    }
    if (k.size() == 2 * g - 1) {
      const auto b = attain::qk_bound(qd, g, k);
      row("qk_U", b.U);
      row("qk_V", b.V);
      row("qk_bound", b.bound);
      require(cfg.eta > 0 && cfg.eta < 1.0 / (100.0 * g), "bounds: need 0 < eta < 1/(100 g)");
      const auto m = attain::k_set_membership(qd, cfg.eta, g, k);
      row("k_interval_lo", m.interval_lo);
      row("k_interval_hi", m.interval_hi);
      row("k_outside_interval", m.outside_interval);
      row("k_weighted_g", m.weighted_g);
      row("k_weighted_2g", m.weighted_2g);
      row("k_in_K", m.in_K);
    }
  }
  c.emit(t);
  return kExitOk;
}

std::vector<survey::PrimeSurveyRecord> threshold_records(const Context& c, std::uint64_t x) {
  const auto& cfg = c.cfg;
  auto records = cached_survey(cfg, 5, std::min(x, cfg.p_exhaustive), survey::SurveyMode::kExhaustive, c.err);
  if (x > cfg.p_exhaustive) {
    auto rest = cached_survey(cfg, cfg.p_exhaustive + 1, x, survey::SurveyMode::kOracleOnly, c.err);
    records.insert(records.end(), rest.begin(), rest.end());
  }
  return records;
}

int emit_threshold(const Context& c, const survey::ThresholdReport& rep) {
  c.emit(c.cfg.table == "grid" ? report::grid_table(rep) : report::exceptions_table(rep));
  c.err << "# threshold " << rep.threshold.describe() << ": " << rep.exceptions.size() << " exceptions, "
        << rep.violations << " violations\n";
  return rep.violations ? kExitInvariant : kExitOk;
}

int cmd_thm1(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "thm1");
  require(x >= 5 && x <= primes::kSieveCeiling, "thm1: need 5 <= x <= 2^32");
  require(cfg.eta > 0 && cfg.eta < 0.01, "thm1: need 0 < eta < 1/100");
  survey::Threshold th;
  if (cfg.variant == "duke-log") {
    th.rule = survey::ThresholdRule::kDukeLog;
  } else if (cfg.variant == "trivial") {
    th.rule = survey::ThresholdRule::kTrivial;
  } else {
    th.rule = survey::ThresholdRule::kPower;
    th.exponent = 0.75 + cfg.epsilon.value_or(0.0);
  }
  const auto records = threshold_records(c, x);
  return emit_threshold(c, survey::verify_thm1(x, records, th, cfg.eta));
}

int cmd_thm3(const Context& c) {
  const auto& cfg = c.cfg;
  const std::uint64_t x = need(cfg.x, "--x", "thm3");
  const double eps = cfg.epsilon.value_or(0.05);
  require(x >= 5 && x <= primes::kSieveCeiling, "thm3: need 5 <= x <= 2^32");
  require(eps >= 0 && eps < 0.25, "thm3: need 0 <= epsilon < 1/4");
  const auto records = threshold_records(c, x);
  return emit_threshold(c, survey::verify_thm3(x, records, eps));
}

const std::map<std::string, std::function<int(const Context&)>>& commands() {
  static const std::map<std::string, std::function<int(const Context&)>> table{
      {"sieve", cmd_sieve},     {"hxyz", cmd_hxyz},       {"hxyz-shifted", cmd_hxyz_shifted},
      {"ford-sweep", cmd_ford_sweep}, {"survey", cmd_survey}, {"census", cmd_census},
      {"duke", cmd_duke},       {"mertens", cmd_mertens}, {"bv", cmd_bv},
      {"bounds", cmd_bounds},   {"thm1", cmd_thm1},       {"thm3", cmd_thm3},
  };
  return table;
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  RunConfig cfg;
  CLI::App app{"Exponents of elliptic-curve groups over prime fields: surveys, bounds and divisor statistics"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string format = "csv";
  app.add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--output", cfg.output, "write the report to this file instead of stdout");
  app.add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", cfg.cache_dir, std::string("survey cache directory (default: $") + kCacheDirEnv + ")");
  app.add_flag("--resume", cfg.resume, "reuse cached survey records");
  add_integer(&app, "--p-exhaustive", cfg.p_exhaustive, "largest prime surveyed by full enumeration");

  auto* sieve = app.add_subcommand("sieve", "count primes <= x, optionally in a residue class");
  add_integer(sieve, "--x", cfg.x, "upper limit");
  add_integer(sieve, "--k", cfg.modulus, "modulus");
  sieve->add_option("--a", cfg.residue, "residue");

  for (const char* name : {"hxyz", "hxyz-shifted"}) {
    auto* sub = app.add_subcommand(name, name == std::string("hxyz") ? "H(x,y,z)" : "H(x,y,z) over shifted primes");
    add_integer(sub, "--x", cfg.x, "x");
    sub->add_option("--y", cfg.y, "y");
    sub->add_option("--z", cfg.z, "z");
    if (name == std::string("hxyz-shifted")) sub->add_option("--lambda", cfg.lambda, "shift (nonzero)");
  }

  auto* ford = app.add_subcommand("ford-sweep", "H against the upper estimate over a list of y");
  add_integer(ford, "--x", cfg.x, "x");
  ford->add_option("--y-list", cfg.y_list, "values of y")->delimiter(',');
  ford->add_option("--z-rule", cfg.z_rule, "double, square or fixed")
      ->check(CLI::IsMember({"double", "square", "fixed"}));
  ford->add_option("--z-fixed", cfg.z_fixed, "z for the fixed rule");
  ford->add_option("--lambda", cfg.lambda, "shift for the shifted-prime column");

  auto* surv = app.add_subcommand("survey", "minimum exponent per prime");
  add_integer(surv, "--x-lo", cfg.x_lo, "lower end");
  add_integer(surv, "--x-hi", cfg.x_hi, "upper end");
  surv->add_option("--mode", cfg.mode, "exhaustive or oracle")->check(CLI::IsMember({"exhaustive", "oracle"}));

  auto* census = app.add_subcommand("census", "primes in (x/2, x] admitting m1 = k1, against the bound");
  add_integer(census, "--x", cfg.x, "x");
  add_integer(census, "--k1", cfg.k1, "k1 (default: every k1 <= sqrt(x) + 1)");
  census->add_option("--bound-scale", cfg.bound_scale, "multiply the bound (fault injection)");

  auto* duke = app.add_subcommand("duke", "explicit small-exponent curves");
  add_integer(duke, "--x", cfg.x, "x");
  duke->add_option("--epsilon", cfg.epsilon, "0 < epsilon <= 1/20");

  auto* mertens = app.add_subcommand("mertens", "sum of 1/p over (y, z] against its limit");
  add_integer(mertens, "--x", cfg.x, "x");
  mertens->add_option("--epsilon", cfg.epsilon, "0 <= epsilon <= 1/20");

  auto* bv = app.add_subcommand("bv", "prime progression error sum");
  add_integer(bv, "--x", cfg.x, "x");
  bv->add_option("--y", cfg.y, "y");
  bv->add_option("--z", cfg.z, "z");

  auto* bounds = app.add_subcommand("bounds", "closed-form bounds at q");
  add_integer(bounds, "--x", cfg.x, "q");
  bounds->add_option("--genus", cfg.genus, "genus");
  bounds->add_option("--k", cfg.k_tuple, "k tuple")->delimiter(',');
  bounds->add_option("--s", cfg.s, "number of k values used by the exponent floor");
  bounds->add_option("--eta", cfg.eta, "eta");

  auto* thm1 = app.add_subcommand("thm1", "primes whose minimum exponent falls below q^(3/4 + epsilon)");
  add_integer(thm1, "--x", cfg.x, "x");
  thm1->add_option("--epsilon", cfg.epsilon, "threshold offset (power variant)");
  thm1->add_option("--variant", cfg.variant, "power, duke-log or trivial")
      ->check(CLI::IsMember({"power", "duke-log", "trivial"}));
  thm1->add_option("--eta", cfg.eta, "classification parameter");
  thm1->add_option("--table", cfg.table, "exceptions or grid")->check(CLI::IsMember({"exceptions", "grid"}));

  auto* thm3 = app.add_subcommand("thm3", "primes whose minimum exponent falls below q^(1/2 + epsilon)");
  add_integer(thm3, "--x", cfg.x, "x");
  thm3->add_option("--epsilon", cfg.epsilon, "threshold offset");
  thm3->add_option("--table", cfg.table, "exceptions or grid")->check(CLI::IsMember({"exceptions", "grid"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.format = format == "jsonl" ? report::Format::kJsonl : report::Format::kCsv;
  return cfg;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto it = commands().find(cfg.command);
  if (it == commands().end()) throw UsageError("unknown command '" + cfg.command + "'");
  if (cfg.output.empty()) return it->second(Context{cfg, out, err});
  std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open --output " + cfg.output);
  return it->second(Context{cfg, file, err});
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kExitOk;
    return dispatch(*cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace jacexp::cli
