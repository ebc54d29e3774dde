// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cubevar/cli.hpp"
#include "cubevar/experiments.hpp"
#include "cubevar/krawtchouk.hpp"
#include "cubevar/operators.hpp"
#include "cubevar/variation.hpp"

using namespace cubevar;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

CubeFunction random_function(CubeDim dim, Rng& rng) {
  CubeFunction f(dim);
  for (auto& v : f.values()) v = rng.complex_normal();
  return f;
}

const std::vector<double> kNoiseGrid{0.01, 0.1, 1.0, std::numbers::ln2, 5.0};

Outcome c01_kraw_identities() {
  const auto t0 = clock_type::now();
  long fact_failures = 0, diff_failures = 0, checked = 0;
  KrawtchoukTable prev = build_table(1);
  fact_failures += check_facts(prev).failures();
  for (int n = 2; n <= 30; ++n) {
    KrawtchoukTable cur = build_table(n);
    const FactReport f = check_facts(cur);
    const IdentityReport d = check_difference_identity(cur, prev);
    fact_failures += f.failures();
    diff_failures += d.failures;
    checked += f.checked + d.checked;
    prev = std::move(cur);
  }
  const double s = since(t0);
  return {fact_failures == 0 && diff_failures == 0 && s < 30.0,
          "n<=30 checked=" + std::to_string(checked) + " fact_failures=" + std::to_string(fact_failures) +
              " difference_failures=" + std::to_string(diff_failures) + " time=" + format_double(s) + "s"};
}

Outcome c02_unit_deviation() {
  Rational best = -1;
  int at_n = 0;
  bool attained = false;
  for (int n = 1; n <= 24; ++n) {
    const ScanRecord rec = bound_scan_a(n);
    if (*rec.exact > best) {
      best = *rec.exact;
      at_n = n;
    }
    attained = attained || *rec.exact == 2;
  }
  return {best <= 2 && attained,
          "max=" + best.str() + " first attained at n=" + std::to_string(at_n) + " (exact rational)"};
}

Outcome c03_operator_cross() {
  const auto t0 = clock_type::now();
  Rng rng(3);
  double sph = 0.0, noise = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const CubeDim dim(n);
    const KrawtchoukTable table = build_table(n);
    for (int trial = 0; trial < 50; ++trial) {
      const CubeFunction f = random_function(dim, rng);
      for (int k = 0; k <= n; ++k)
        sph = std::max(sph, max_abs_diff(spherical_mean_direct(f, k), spherical_mean_multiplier(f, k, table)));
      for (double t : kNoiseGrid)
        noise = std::max(noise, max_abs_diff(noise_binomial(f, t, table), noise_multiplier(f, t)));
    }
  }
  const double s = since(t0);
  return {sph <= 1e-10 && noise <= 1e-10 && s < 120.0,
          "max|S_direct-S_mult|=" + format_double(sph) + " max|M_t-N_t|=" + format_double(noise) +
              " time=" + format_double(s) + "s"};
}

Outcome c04_semigroup() {
  double worst = 0.0;
  for (int n = 1; n <= 12; ++n) worst = std::max(worst, semigroup_axioms_check(n, kNoiseGrid, 100, 40 + n).worst());
  return {worst <= 1e-10, "n<=12 trials=100 worst_violation=" + format_double(worst)};
}

Outcome c05_vr_dp() {
  Rng rng(5);
  const double rs[] = {1.0, 1.5, 2.0, 3.0};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    VariationQuery q;
    q.r = rs[trial % 4];
    q.values = cubevar::detail::random_sequence(rng, static_cast<std::size_t>(rng.uniform_int(1, 13)));
    worst = std::max(worst, std::abs(vr_exact(q).value - vr_bruteforce(q)));
  }
  return {worst <= 1e-12, "1000 sequences J<=12 max|exact-brute|=" + format_double(worst)};
}

Outcome c06_counterexample_all_ones() {
  double worst = 0.0, worst_chain = 0.0;
  for (int n = 1; n <= 14; ++n) {
    const KrawtchoukTable table = build_table(n);
    for (double r : {1.0, 2.0, 3.0}) {
      const CounterexampleOutcome o = counterexample_all_ones(table, r);
      worst = std::max(worst, std::abs(o.ratio - o.bound));
      if (n <= 8) {
        VariationQuery q;
        q.r = r;
        for (int k = 0; k <= n; ++k) q.values.emplace_back(table.value(k, n));
        worst_chain = std::max(worst_chain, std::abs(vr_bruteforce(q) - o.bound));
      }
    }
  }
  return {worst <= 1e-9 && worst_chain <= 1e-9,
          "n<=14 max|ratio-2n^(1/r)|=" + format_double(worst) + " brute_force(n<=8)=" + format_double(worst_chain)};
}

Outcome c07_counterexample_truncated() {
  long violations = 0, checked = 0;
  double min_margin = 1e300;
  for (int n = 6; n <= 20; ++n) {
    const KrawtchoukTable table = build_table(n);
    for (double r : {1.0, 2.0, 3.0}) {
      const CounterexampleOutcome o = counterexample_truncated(table, r, std::sqrt(n));
      ++checked;
      if (!(o.ratio >= o.bound)) ++violations;
      min_margin = std::min(min_margin, o.ratio - o.bound);
    }
  }
  return {violations == 0, "checked=" + std::to_string(checked) + " violations=" + std::to_string(violations) +
                               " min(ratio-bound)=" + format_double(min_margin)};
}

Outcome c08_inequalities() {
  const PropertyReport rep = check_variation_properties(10000, 8);
  long chain_violations = 0, chain_checked = 0;
  const double ss[] = {1.0, 1.5, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    const InequalityStat st = check_chain_lemma(6, 40 + 8 * i, ss[i], 2500, 80 + i);
    chain_violations += st.violations;
    chain_checked += st.checked;
  }
  std::ostringstream os;
  for (const auto& s : rep.stats) os << s.name << '=' << s.violations << '/' << s.checked << ' ';
  os << "chain_bound=" << chain_violations << '/' << chain_checked
     << " tightest_lr_bound=" << format_double(rep.stat("lr_bound_2").tightest_constant)
     << " tightest_dyadic_split=" << format_double(rep.stat("dyadic_split_3").tightest_constant);
  return {rep.violations() == 0 && chain_violations == 0, os.str()};
}

Outcome c09_dyadic_partition() {
  long failures = 0, checked = 0;
  for (int l = 0; l <= 8; ++l)
    for (long a = 0; a < (1L << l); ++a)
      for (long b = a + 1; b <= (1L << l); ++b) {
        ++checked;
        if (!check_partition(dyadic_partition(a, b, l)).ok()) ++failures;
      }
  return {failures == 0, "partitions=" + std::to_string(checked) + " failures=" + std::to_string(failures)};
}

Outcome c10_parity_vs_full() {
  ExperimentReport rep;
  rep.name = "parity_vs_full";
  const double r = 3.0;
  std::vector<std::vector<double>> parity_max(2);
  std::vector<double> full_max;
  for (int n = 4; n <= 24; ++n) {
    const KrawtchoukTable table = build_table(n);
    for (int q = 0; q <= 1; ++q) {
      const LevelScan s = parity_character_scan(table, r, q);
      parity_max[q].push_back(s.max);
      rep.records.push_back({rep.name, n, r, q, "parity_character_max", s.max, "level=" + std::to_string(s.argmax)});
    }
    const LevelScan full = full_character_scan(table, r);
    full_max.push_back(full.max);
    rep.records.push_back(
        {rep.name, n, r, std::nullopt, "full_character_max", full.max, "level=" + std::to_string(full.argmax)});
  }
  std::ofstream("acceptance_parity_vs_full.csv") << [&] {
    std::ostringstream os;
    write_records_csv(os, rep);
    return os.str();
  }();

  bool pass = true;
  std::ostringstream os;
  for (int q = 0; q <= 1; ++q) {
    const double ref = parity_max[q][12 - 4];
    double top = 0.0;
    for (double v : parity_max[q]) top = std::max(top, v);
    pass = pass && top < 1.25 * ref;
    os << "q=" << q << " max=" << format_double(top) << " cap=" << format_double(1.25 * ref) << ' ';
  }
  double worst_growth = 1e300;
  for (int n = 4; n <= 24; ++n) {
    const double target = 2.0 * std::cbrt(static_cast<double>(n));
    worst_growth = std::min(worst_growth, full_max[n - 4] / target);
    pass = pass && full_max[n - 4] >= target * (1.0 - 1e-12);
  }
  os << "min full/(2n^(1/3))=" << format_double(worst_growth) << " report=acceptance_parity_vs_full.csv";
  return {pass, os.str()};
}

Outcome c11_phi_psi() {
  double phi_top = 0.0, psi_top = 0.0;
  bool zero_at_origin = true;
  for (int n = 4; n <= 24; ++n) {
    const KrawtchoukTable table = build_table(n);
    const LevelScan phi = phi_scan(table), psi = psi_scan(table);
    phi_top = std::max(phi_top, phi.max);
    psi_top = std::max(psi_top, psi.max);
    zero_at_origin = zero_at_origin && phi.values[0] == 0.0 && psi.values[0] == 0.0;
  }
  return {zero_at_origin && std::isfinite(phi_top) && std::isfinite(psi_top),
          "n in 4..24 max Phi=" + format_double(phi_top) + " max Psi=" + format_double(psi_top) +
              " Phi(0)=Psi(0)=0:" + (zero_at_origin ? "yes" : "no")};
}

Outcome c12_performance() {
  Rng rng(12);
  CubeFunction big = random_function(CubeDim(20), rng);
  auto t0 = clock_type::now();
  fwht_inplace(big.values());
  const double fwht_s = since(t0);

  const int n = 14;
  const KrawtchoukTable table = build_table(n);
  const CubeFunction f = random_function(CubeDim(n), rng);
  t0 = clock_type::now();
  const RadiusSet all = RadiusSet::full(n);
  const auto family = spherical_mean_family(f, all.indices(), table);
  const double norm = norm2(vr_pointwise(family, 2.0, cli::resolve_threads(0)));
  const double full_s = since(t0);
  return {fwht_s < 1.0 && full_s < 60.0 && std::isfinite(norm),
          "fwht(n=20)=" + format_double(fwht_s) + "s full_range_norm(n=14,r=2)=" + format_double(full_s) + "s"};
}

Outcome c13_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "cubevar_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> cmds{"verify", "counterexample", "parity-scan", "phi-psi", "half-spectrum"};
  long compared = 0, differing = 0;
  for (const auto& cmd : cmds) {
    std::string bodies[2];
    for (int run = 0; run < 2; ++run) {
      cli::RunSpec spec;
      spec.command = cmd;
      spec.format = cli::Format::csv;
      spec.output_dir = (root / std::to_string(run)).string();
      spec.overrides = {{"n_list", "6,9"}, {"r_list", "1,2"}, {"seed", "2024"}, {"trials", "30"}};
      spec.threads = run == 0 ? 1 : 4;
      std::ostringstream out, err;
      if (cli::run(spec, out, err) != 0) return {false, cmd + " failed: " + err.str()};
      std::ifstream in(fs::path(spec.output_dir) / (cmd + ".csv"), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      bodies[run] = ss.str();
    }
    ++compared;
    if (bodies[0] != bodies[1] || bodies[0].empty()) ++differing;
  }
  fs::remove_all(root);
  return {differing == 0, "commands=" + std::to_string(compared) + " differing_csv=" + std::to_string(differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"01 exact Krawtchouk identities", c01_kraw_identities},
      {"02 sharp |kappa-1| <= 2kx/n", c02_unit_deviation},
      {"03 operator cross-validation", c03_operator_cross},
      {"04 diffusion semigroup axioms", c04_semigroup},
      {"05 variation DP vs brute force", c05_vr_dp},
      {"06 all-ones counterexample", c06_counterexample_all_ones},
      {"07 truncated counterexample", c07_counterexample_truncated},
      {"08 variation inequality suite", c08_inequalities},
      {"09 dyadic partition", c09_dyadic_partition},
      {"10 parity scan bounded, full scan grows", c10_parity_vs_full},
      {"11 Phi/Psi boundedness", c11_phi_psi},
      {"12 performance", c12_performance},
      {"13 determinism", c13_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = clock_type::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-42s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
