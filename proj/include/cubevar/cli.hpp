#ifndef CUBEVAR_CLI_HPP
#define CUBEVAR_CLI_HPP

// Command dispatch for the cubevar tool. Argument parsing lives in
// tools/cubevar.cpp; everything here is callable from tests.
//
// Exit status: 0 success, 1 a verified property failed, 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cubevar/core.hpp"
#include "cubevar/experiments.hpp"
#include "cubevar/format.hpp"
#include "cubevar/krawtchouk.hpp"
#include "cubevar/operators.hpp"
#include "cubevar/random.hpp"
#include "cubevar/variation.hpp"

namespace cubevar::cli {

enum class ExitCode : int { ok = 0, failure = 1, usage = 2 };

/// Malformed config text or override; carries the offending line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class Format { json, csv, both };

struct RunSpec {
  std::string command;
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // applied after the file, in order
  std::string output_dir = ".";
  Format format = Format::both;
  std::string kind = "all-ones";  // counterexample flavour
  unsigned threads = 0;           // 0: CUBEVAR_THREADS, then hardware concurrency
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"verify",     "kraw-table", "counterexample", "parity-scan",
                                              "phi-psi",    "half-spectrum", "bench"};
  return names;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list element in '" + s + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  std::size_t used = 0;
  T v{};
  try {
    if constexpr (std::is_same_v<T, double>)
      v = std::stod(s, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      v = std::stoull(s, &used);
    else
      v = static_cast<T>(std::stol(s, &used));
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("trailing characters in number '" + s + "'");
  return v;
}

}  // namespace detail

/// Sets one key. Keys: n_list, r_list, q, rule, alpha, seed, trials.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string v = detail::trim(value);
  if (key == "n_list") {
    c.n_list.clear();
    for (const auto& s : detail::split_list(v)) c.n_list.push_back(detail::parse_number<int>(s));
  } else if (key == "r_list") {
    c.r_list.clear();
    for (const auto& s : detail::split_list(v)) c.r_list.push_back(detail::parse_number<double>(s));
  } else if (key == "q") {
    if (v.empty() || v == "none")
      c.q.reset();
    else
      c.q = detail::parse_number<int>(v);
  } else if (key == "rule") {
    if (v == "power")
      c.rule.kind = TruncationRule::Kind::power;
    else if (v == "log")
      c.rule.kind = TruncationRule::Kind::logarithmic;
    else if (v == "constant")
      c.rule.kind = TruncationRule::Kind::constant;
    else
      throw ConfigError("unknown truncation rule '" + v + "'");
  } else if (key == "alpha") {
    c.rule.alpha = detail::parse_number<double>(v);
  } else if (key == "seed") {
    c.seed = detail::parse_number<std::uint64_t>(v);
  } else if (key == "trials") {
    c.trials = detail::parse_number<long>(v);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

/// `key = value` per line, `#` starts a comment. Validates the result.
inline ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = detail::trim(line.substr(0, eq));
    try {
      apply_setting(base, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return base;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// File values first, then overrides in order; validated.
inline ExperimentConfig resolve_config(const RunSpec& spec) {
  ExperimentConfig c = spec.config_path ? parse_config(*spec.config_path) : ExperimentConfig{};
  for (const auto& [key, value] : spec.overrides) apply_setting(c, key, value);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CUBEVAR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  ExperimentReport report;
  bool ok = true;
  std::string table_csv;  // kraw-table only
  nlohmann::json extra;   // extra JSON payload
};

namespace detail {

struct Checker {
  ExperimentReport& rep;
  bool ok = true;

  void add(int n, double r, const std::string& metric, double value, bool pass, const std::string& note = {}) {
    std::string w = pass ? "pass" : "FAIL";
    if (!note.empty()) w += ";" + note;
    rep.records.push_back({rep.name, n, r, std::nullopt, metric, value, w});
    ok = ok && pass;
  }
};

inline double max_over_radii(const CubeFunction& f, const KrawtchoukTable& table) {
  double worst = 0.0;
  for (int k = 0; k <= f.n(); ++k)
    worst = std::max(worst, max_abs_diff(spherical_mean_direct(f, k), spherical_mean_multiplier(f, k, table)));
  return worst;
}

inline const std::vector<double>& noise_grid() {
  static const std::vector<double> grid{0.01, 0.1, 1.0, std::numbers::ln2, 5.0};
  return grid;
}

}  // namespace detail

inline SuiteResult run_verify(const ExperimentConfig& c, unsigned threads) {
  SuiteResult out;
  out.report.name = "verify";
  detail::Checker chk{out.report};
  constexpr double tol = 1e-10;
  const long trials = c.trials;
  Rng rng(c.seed);

  for (int n : c.n_list) {
    const CubeDim dim(n);
    const KrawtchoukTable table = build_table(n);

    const FactReport facts = check_facts(table);
    chk.add(n, 0, "kraw_fact_failures", static_cast<double>(facts.failures()), facts.failures() == 0);
    if (n >= 2) {
      const IdentityReport diff = check_difference_identity(table, build_table(n - 1));
      chk.add(n, 0, "kraw_difference_failures", static_cast<double>(diff.failures), diff.failures == 0);
      const BoundScanBC bc = bound_scan_b_c(table);
      chk.add(n, 0, "decay_constant", bc.c_b.value, std::isfinite(bc.c_b.value));
      chk.add(n, 0, "increment_constant", bc.c_c.value, std::isfinite(bc.c_c.value));
    }
    const ScanRecord a = bound_scan_a(table);
    chk.add(n, 0, "unit_deviation_ratio", a.value, *a.exact <= 2);

    const CubeFunction f = cubevar::detail::random_complex_function(dim, rng);
    const double direct_gap = detail::max_over_radii(f, table);
    chk.add(n, 0, "spherical_direct_vs_multiplier", direct_gap, direct_gap < tol);

    double noise_gap = 0.0;
    for (double t : detail::noise_grid())
      noise_gap = std::max(noise_gap, max_abs_diff(noise_binomial(f, t, table), noise_multiplier(f, t)));
    chk.add(n, 0, "noise_binomial_vs_multiplier", noise_gap, noise_gap < tol);

    const SemigroupReport semi =
        semigroup_axioms_check(n, detail::noise_grid(), static_cast<int>(std::min<long>(trials, 20)), rng());
    chk.add(n, 0, "semigroup_worst_violation", semi.worst(), semi.worst() <= tol);

    const double refl = reflection_identity_violation(f, table);
    chk.add(n, 0, "reflection_identity", refl, refl < tol);
    const AntipodalReport anti = antipodal_check(f);
    chk.add(n, 0, "antipodal_identity", anti.max_violation, anti.max_violation < tol);

    for (double r : c.r_list) {
      const CounterexampleOutcome o = counterexample_all_ones(table, r, threads);
      const double expect = 2.0 * std::pow(static_cast<double>(n), 1.0 / r);
      chk.add(n, r, "all_ones_ratio", o.ratio, std::abs(o.ratio - expect) <= 1e-9 * std::max(1.0, expect));
      for (int q = 0; q <= 1; ++q) {
        const LevelScan s = parity_character_scan(table, r, q);
        double asym = 0.0;
        for (int m = 0; m <= n; ++m) asym = std::max(asym, std::abs(s.values[m] - s.values[n - m]));
        chk.add(n, r, "parity_scan_mirror_q" + std::to_string(q), asym, asym <= 1e-12);
      }
    }
  }

  // Sequence-level suites do not depend on n.
  long mismatches = 0;
  double worst = 0.0;
  const double rs[] = {1.0, 1.5, 2.0, 3.0};
  for (long t = 0; t < trials; ++t) {
    VariationQuery q;
    q.r = rs[rng.uniform_int(0, 3)];
    q.values = cubevar::detail::random_sequence(rng, static_cast<std::size_t>(rng.uniform_int(1, 13)));
    const double e = vr_exact(q).value;
    const double b = vr_bruteforce(q);
    const double gap = std::abs(e - b) / std::max(1.0, b);
    worst = std::max(worst, gap);
    if (gap > 1e-12) ++mismatches;
  }
  chk.add(0, 0, "vr_exact_vs_bruteforce", worst, mismatches == 0);

  const PropertyReport props = check_variation_properties(trials, rng());
  for (const auto& s : props.stats) chk.add(0, 0, s.name + "_violations", static_cast<double>(s.violations), s.violations == 0);

  long chain_violations = 0;
  for (double s : {1.5, 2.0, 3.0})
    chain_violations += check_chain_lemma(6, 40, s, std::min<long>(trials, 100), rng()).violations;
  chk.add(0, 0, "chain_bound_violations", static_cast<double>(chain_violations), chain_violations == 0);

  long partition_failures = 0;
  for (int l = 0; l <= 8; ++l)
    for (long a = 0; a < (1L << l); ++a)
      for (long b = a + 1; b <= (1L << l); ++b)
        if (!check_partition(dyadic_partition(a, b, l)).ok()) ++partition_failures;
  chk.add(0, 0, "dyadic_partition_failures", static_cast<double>(partition_failures), partition_failures == 0);

  out.ok = chk.ok;
  return out;
}

inline SuiteResult run_kraw_table(const ExperimentConfig& c) {
  SuiteResult out;
  out.report.name = "kraw-table";
  std::ostringstream csv;
  nlohmann::json tables = nlohmann::json::array();
  nlohmann::json scans = nlohmann::json::array();
  bool header_written = false;
  for (int n : c.n_list) {
    const KrawtchoukTable t = build_table(n);
    std::ostringstream one;
    write_table_csv(one, t);
    std::string body = one.str();
    if (header_written) body.erase(0, body.find('\n') + 1);
    header_written = true;
    csv << body;
    tables.push_back(table_to_json(t));

    std::vector<ScanRecord> recs{bound_scan_a(t)};
    if (n >= 2) {
      const BoundScanBC bc = bound_scan_b_c(t);
      recs.push_back(bc.c_b);
      recs.push_back(bc.c_c);
    }
    for (const auto& s : recs) {
      scans.push_back(s);
      out.report.records.push_back({out.report.name, n, 0.0, std::nullopt, s.constant_name, s.value,
                                    "k=" + std::to_string(s.argmax_k) + ";x=" + std::to_string(s.argmax_x)});
    }
    if (!(*recs.front().exact <= 2)) out.ok = false;
  }
  out.table_csv = csv.str();
  out.extra = {{"tables", tables}, {"scans", scans}};
  return out;
}

inline SuiteResult run_counterexample(const ExperimentConfig& c, const std::string& kind, unsigned threads) {
  SuiteResult out;
  if (kind == "corollary") {
    out.report = corollary_truncation_scan(c, threads);
    for (const auto& rec : out.report.records)
      if (rec.metric == "holds" && rec.value != 1.0) out.ok = false;
    return out;
  }
  if (kind != "all-ones" && kind != "truncated") throw ConfigError("unknown counterexample kind '" + kind + "'");
  out.report.name = kind == "all-ones" ? "counterexample_all_ones" : "counterexample_truncated";
  for (int n : c.n_list) {
    const KrawtchoukTable table = build_table(n);
    for (double r : c.r_list) {
      const CounterexampleOutcome o = kind == "all-ones" ? counterexample_all_ones(table, r, threads)
                                                         : counterexample_truncated(table, r, c.rule.at(n), threads);
      for (auto& rec : to_records(out.report.name, o)) out.report.records.push_back(std::move(rec));
      out.ok = out.ok && o.holds();
    }
  }
  return out;
}

inline SuiteResult run_parity_scan(const ExperimentConfig& c) {
  SuiteResult out;
  out.report.name = "parity_scan";
  for (int n : c.n_list) {
    const KrawtchoukTable table = build_table(n);
    for (double r : c.r_list) {
      for (int q = 0; q <= 1; ++q) {
        if (c.q && *c.q != q) continue;
        const LevelScan s = parity_character_scan(table, r, q);
        out.report.records.push_back(
            {out.report.name, n, r, q, "parity_character_max", s.max, "level=" + std::to_string(s.argmax)});
      }
      const LevelScan full = full_character_scan(table, r);
      out.report.records.push_back(
          {out.report.name, n, r, std::nullopt, "full_character_max", full.max, "level=" + std::to_string(full.argmax)});
      out.report.records.push_back({out.report.name, n, r, std::nullopt, "two_n_pow_inv_r",
                                    2.0 * std::pow(static_cast<double>(n), 1.0 / r), "reference"});
    }
  }
  return out;
}

inline SuiteResult run_phi_psi(const ExperimentConfig& c) {
  SuiteResult out;
  out.report.name = "phi_psi";
  for (int n : c.n_list) {
    if (n < 2) throw ConfigError("phi-psi needs n >= 2");
    const KrawtchoukTable table = build_table(n);
    const LevelScan phi = phi_scan(table);
    const LevelScan psi = psi_scan(table);
    auto& recs = out.report.records;
    recs.push_back({out.report.name, n, 0.0, std::nullopt, "phi_max", phi.max, "x=" + std::to_string(phi.argmax)});
    recs.push_back({out.report.name, n, 0.0, std::nullopt, "psi_max", psi.max, "x=" + std::to_string(psi.argmax)});
    recs.push_back({out.report.name, n, 0.0, std::nullopt, "phi_at_0", phi.values[0], "x=0"});
    recs.push_back({out.report.name, n, 0.0, std::nullopt, "psi_at_0", psi.values[0], "x=0"});
    out.ok = out.ok && phi.values[0] == 0.0 && psi.values[0] == 0.0 && std::isfinite(phi.max) &&
             std::isfinite(psi.max);
  }
  return out;
}

inline SuiteResult run_half_spectrum(const ExperimentConfig& c, unsigned threads) {
  SuiteResult out;
  out.report.name = "half_spectrum";
  for (int n : c.n_list) {
    if (n < 2) throw ConfigError("half-spectrum needs n >= 2");
    const KrawtchoukTable table = build_table(n);
    for (double r : c.r_list) {
      const HalfSpectrumScan s = proposition_halfspectrum_scan(table, r, c.trials, c.seed, threads);
      out.report.records.push_back({out.report.name, n, r, std::nullopt, "max_ratio_lower_bound", s.max_ratio,
                                    "trial=" + std::to_string(s.argmax_trial)});
      out.ok = out.ok && std::isfinite(s.max_ratio);
    }
  }
  return out;
}

inline SuiteResult run_bench(const ExperimentConfig& c, unsigned threads) {
  using clock = std::chrono::steady_clock;
  const auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  SuiteResult out;
  out.report.name = "bench";
  const double r = c.r_list.front();
  for (int n : c.n_list) {
    const CubeDim dim(n);
    Rng rng(c.seed);
    CubeFunction f(dim);
    for (auto& v : f.values()) v = rng.complex_normal();
    auto& recs = out.report.records;
    const double points = static_cast<double>(dim.size());

    auto t0 = clock::now();
    const CubeFunction F = fourier(f);
    auto t1 = clock::now();
    const double fwht_s = seconds(t0, t1);
    recs.push_back({out.report.name, n, r, std::nullopt, "fwht_seconds", fwht_s, "points=" + format_double(points)});

    // The full sweep holds n+1 functions of 2^n complex values.
    const double bytes = (n + 1.0) * points * sizeof(complex);
    if (bytes > 4.0 * (1u << 30)) {
      out.report.notes.push_back("n=" + std::to_string(n) + ": sweep skipped, needs " + format_double(bytes) +
                                 " bytes");
      continue;
    }
    const KrawtchoukTable table = build_table(n);
    const RadiusSet all = RadiusSet::full(n);
    t0 = clock::now();
    const std::vector<CubeFunction> family = spherical_mean_family(f, all.indices(), table);
    t1 = clock::now();
    recs.push_back(
        {out.report.name, n, r, std::nullopt, "sweep_seconds", seconds(t0, t1), "radii=" + std::to_string(n + 1)});
    t0 = clock::now();
    const CubeFunction v = vr_pointwise(family, r, threads);
    t1 = clock::now();
    const double vr_s = seconds(t0, t1);
    recs.push_back({out.report.name, n, r, std::nullopt, "vr_pointwise_seconds", vr_s,
                    "points_per_second=" + format_double(vr_s > 0 ? points / vr_s : 0.0)});
    (void)F;
    (void)v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entry point

inline std::string summary_line(const Record& rec) {
  std::ostringstream os;
  os << rec.experiment << " n=" << rec.n << " r=" << format_double(rec.r);
  if (rec.q) os << " q=" << *rec.q;
  os << ' ' << rec.metric << '=' << format_double(rec.value);
  if (!rec.witness.empty()) os << " [" << rec.witness << ']';
  return os.str();
}

inline SuiteResult dispatch(const RunSpec& spec, const ExperimentConfig& config, unsigned threads) {
  if (spec.command == "verify") return run_verify(config, threads);
  if (spec.command == "kraw-table") return run_kraw_table(config);
  if (spec.command == "counterexample") return run_counterexample(config, spec.kind, threads);
  if (spec.command == "parity-scan") return run_parity_scan(config);
  if (spec.command == "phi-psi") return run_phi_psi(config);
  if (spec.command == "half-spectrum") return run_half_spectrum(config, threads);
  if (spec.command == "bench") return run_bench(config, threads);
  throw ConfigError("unknown command '" + spec.command + "'");
}

/// Runs one command, writes <out>/<command>.{json,csv}, prints one line per
/// record to `out`.
inline int run(const RunSpec& spec, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (std::find(commands().begin(), commands().end(), spec.command) == commands().end()) {
    err << "error: unknown command '" << spec.command << "'\n";
    return static_cast<int>(ExitCode::usage);
  }
  ExperimentConfig config;
  try {
    config = resolve_config(spec);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  }
  const unsigned threads = resolve_threads(spec.threads);

  SuiteResult result;
  const std::string started = utc_timestamp();
  try {
    result = dispatch(spec, config, threads);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  }
  ExperimentReport& rep = result.report;
  if (rep.started.empty()) rep.started = started;
  rep.finished = utc_timestamp();
  rep.parameters = config_to_json(config);
  rep.parameters["command"] = spec.command;
  if (spec.command == "counterexample") rep.parameters["kind"] = spec.kind;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << spec.output_dir << "': " << ec.message() << '\n';
    return static_cast<int>(ExitCode::usage);
  }
  const fs::path base = fs::path(spec.output_dir) / spec.command;
  const auto write = [&](const fs::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write " + p.string());
  };
  try {
    if (spec.format != Format::csv) {
      nlohmann::json j = rep;
      if (!result.extra.is_null()) j["data"] = result.extra;
      write(base.string() + ".json", j.dump(2) + "\n");
    }
    if (spec.format != Format::json) {
      if (spec.command == "kraw-table") {
        write(base.string() + ".csv", result.table_csv);
      } else {
        std::ostringstream csv;
        write_records_csv(csv, rep);
        write(base.string() + ".csv", csv.str());
      }
    }
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  }

  for (const auto& rec : rep.records) out << summary_line(rec) << '\n';
  for (const auto& note : rep.notes) out << "note: " << note << '\n';
  if (!result.ok) err << spec.command << ": at least one check failed\n";
  return static_cast<int>(result.ok ? ExitCode::ok : ExitCode::failure);
}

}  // namespace cubevar::cli

#endif  // CUBEVAR_CLI_HPP
