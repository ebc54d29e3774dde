#ifndef CUBEVAR_EXPERIMENTS_HPP
#define CUBEVAR_EXPERIMENTS_HPP

// Counterexamples, multiplier-sum scans and the fixed-parity probes.
//
// For a character, S_k chi_y = kappa_k(|y|) chi_y and |chi_y| = 1, so the
// pointwise variation V_r(S_k chi_y(x) : k in Z) equals V_r(kappa_k(|y|) : k in Z)
// at every x. The ratio ||V_r(S_k chi_y)||_2 / ||chi_y||_2 is therefore a
// function of the level m = |y| alone ("level route"). Up to
// kMaterializeMaxDim the experiments instead build every S_k f on the cube
// and take the pointwise variation ("cube route").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubevar/core.hpp"
#include "cubevar/format.hpp"
#include "cubevar/krawtchouk.hpp"
#include "cubevar/operators.hpp"
#include "cubevar/random.hpp"
#include "cubevar/variation.hpp"

namespace cubevar {

inline constexpr int kMaterializeMaxDim = 14;

// ---------------------------------------------------------------------------
// Configuration and reports

/// Rule for the truncation sequence b_n (or a_n).
struct TruncationRule {
  enum class Kind { power, logarithmic, constant };
  Kind kind = Kind::power;
  double alpha = 0.5;  // exponent for power, scale for logarithmic, value for constant

  double at(int n) const {
    switch (kind) {
      case Kind::power: return std::pow(static_cast<double>(n), alpha);
      case Kind::logarithmic: return alpha * std::log(static_cast<double>(n) + 1.0);
      case Kind::constant: return alpha;
    }
    return alpha;
  }

  std::string name() const {
    switch (kind) {
      case Kind::power: return "power";
      case Kind::logarithmic: return "log";
      case Kind::constant: return "constant";
    }
    return "?";
  }

  /// n / b_n must be unbounded and b_n positive.
  void validate() const {
    if (kind == Kind::power && !(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("power rule needs alpha in (0, 1), got " + format_double(alpha));
    if (kind != Kind::power && !(alpha > 0.0))
      throw std::invalid_argument(name() + " rule needs a positive parameter");
  }
};

struct ExperimentConfig {
  std::vector<int> n_list{8};
  std::vector<double> r_list{2.0};
  std::optional<int> q;
  TruncationRule rule;
  std::uint64_t seed = 0;
  long trials = 100;

  void validate() const {
    if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
    for (int n : n_list)
      if (n < 1) throw std::invalid_argument("every n must be >= 1");
    if (r_list.empty()) throw std::invalid_argument("r_list must not be empty");
    for (double r : r_list)
      if (!(r >= 1.0) || std::isinf(r)) throw std::invalid_argument("every r must satisfy 1 <= r < inf");
    if (q && *q != 0 && *q != 1) throw std::invalid_argument("q must be 0 or 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    rule.validate();
  }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j{{"n_list", c.n_list},
                   {"r_list", c.r_list},
                   {"rule", c.rule.name()},
                   {"alpha", c.rule.alpha},
                   {"seed", c.seed},
                   {"trials", c.trials}};
  j["q"] = c.q ? nlohmann::json(*c.q) : nlohmann::json(nullptr);
  return j;
}

struct Record {
  std::string experiment;
  int n = 0;
  double r = 0.0;
  std::optional<int> q;
  std::string metric;
  double value = 0.0;
  std::string witness;
};

inline void to_json(nlohmann::json& j, const Record& rec) {
  j = nlohmann::json{{"experiment", rec.experiment}, {"n", rec.n},         {"r", rec.r},
                     {"metric", rec.metric},         {"value", rec.value}, {"witness", rec.witness}};
  j["q"] = rec.q ? nlohmann::json(*rec.q) : nlohmann::json(nullptr);
}

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<Record> records;
  std::vector<std::string> notes;
  std::string started;
  std::string finished;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline void to_json(nlohmann::json& j, const ExperimentReport& rep) {
  j = nlohmann::json{{"name", rep.name},       {"parameters", rep.parameters},
                     {"records", rep.records}, {"notes", rep.notes},
                     {"timestamps", {{"started", rep.started}, {"finished", rep.finished}}}};
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

/// Records only; header "experiment,n,r,q,metric,value,witness".
inline void write_records_csv(std::ostream& os, const ExperimentReport& rep) {
  os << "experiment,n,r,q,metric,value,witness\n";
  for (const auto& rec : rep.records) {
    os << detail::csv_field(rec.experiment) << ',' << rec.n << ',' << format_double(rec.r) << ','
       << (rec.q ? std::to_string(*rec.q) : std::string()) << ',' << detail::csv_field(rec.metric) << ','
       << format_double(rec.value) << ',' << detail::csv_field(rec.witness) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Building blocks

/// V_r(kappa_k(m) : k in radii), labelled by k.
inline VariationResult level_variation(const KrawtchoukTable& table, int m, const RadiusSet& radii, double r) {
  VariationQuery q;
  q.r = r;
  for (int k : radii.indices()) {
    q.values.emplace_back(table.value(k, m));
    q.labels.push_back(k);
  }
  return vr_exact(q);
}

/// v(m) for every level m in {0..n}.
inline std::vector<double> character_scan(const KrawtchoukTable& table, const RadiusSet& radii, double r) {
  std::vector<double> v(static_cast<std::size_t>(table.n()) + 1);
  for (int m = 0; m <= table.n(); ++m) v[m] = level_variation(table, m, radii, r).value;
  return v;
}

/// ||V_r(S_k f : k in radii)||_2 / ||f||_2 with every S_k f materialized.
inline double materialized_ratio(const CubeFunction& f, const RadiusSet& radii, const KrawtchoukTable& table,
                                 double r, unsigned threads = 1) {
  const double fn = norm2(f);
  if (fn == 0.0) throw std::invalid_argument("ratio undefined for the zero function");
  const std::vector<CubeFunction> family = spherical_mean_family(f, radii.indices(), table);
  return norm2(vr_pointwise(family, r, threads)) / fn;
}

/// y = (1,...,1,0,...,0) with m ones.
inline PointIndex leading_ones(int m) { return m == 0 ? 0u : static_cast<PointIndex>((std::uint64_t{1} << m) - 1); }

/// Ratio for chi_y with |y| = m over the full radius range; cube route when
/// n <= kMaterializeMaxDim, level route otherwise.
struct CharacterRatio {
  double ratio = 0.0;
  std::string route;
};

inline CharacterRatio character_ratio(const KrawtchoukTable& table, int m, double r, unsigned threads = 1) {
  const int n = table.n();
  const RadiusSet radii = RadiusSet::full(n);
  if (n <= kMaterializeMaxDim) {
    const CubeFunction chi = character(CubeDim(n), leading_ones(m));
    return {materialized_ratio(chi, radii, table, r, threads), "cube"};
  }
  return {level_variation(table, m, radii, r).value, "level"};
}

// ---------------------------------------------------------------------------
// Counterexamples

struct CounterexampleOutcome {
  int n = 0;
  double r = 0.0;
  int level = 0;  // |y|
  double ratio = 0.0;
  double bound = 0.0;
  std::string route;

  bool holds() const { return ratio >= bound * (1.0 - 1e-12) - 1e-12; }
};

/// ||V_r(S_k chi_{1_n} : k in {0..n})||_2 / ||chi_{1_n}||_2 against 2 n^{1/r}.
inline CounterexampleOutcome counterexample_all_ones(const KrawtchoukTable& table, double r, unsigned threads = 1) {
  detail::require_r(r);
  const int n = table.n();
  const CharacterRatio cr = character_ratio(table, n, r, threads);
  return {n, r, n, cr.ratio, 2.0 * std::pow(static_cast<double>(n), 1.0 / r), cr.route};
}

inline CounterexampleOutcome counterexample_all_ones(int n, double r, unsigned threads = 1) {
  return counterexample_all_ones(build_table(n), r, threads);
}

/// (2/3) floor(n / (3 a))^{1/r}
inline double truncated_bound(int n, double a, double r) {
  const double fl = std::floor(n / (3.0 * a));
  return fl <= 0.0 ? 0.0 : 2.0 / 3.0 * std::pow(fl, 1.0 / r);
}

/// The witness |y| = n - 1, the largest admissible level below n; requires
/// a_n >= 1 so that n - 1 >= n - a_n.
inline CounterexampleOutcome counterexample_truncated(const KrawtchoukTable& table, double r, double a_n,
                                                      unsigned threads = 1) {
  detail::require_r(r);
  const int n = table.n();
  if (!(a_n >= 1.0 / 3.0)) throw std::invalid_argument("counterexample_truncated: a_n must be >= 1/3");
  const int level = n - 1;
  if (level < n - a_n) throw std::invalid_argument("counterexample_truncated: no admissible y with |y| < n");
  const CharacterRatio cr = character_ratio(table, level, r, threads);
  return {n, r, level, cr.ratio, truncated_bound(n, a_n, r), cr.route};
}

inline CounterexampleOutcome counterexample_truncated(int n, double r, double a_n, unsigned threads = 1) {
  return counterexample_truncated(build_table(n), r, a_n, threads);
}

inline std::vector<Record> to_records(const std::string& experiment, const CounterexampleOutcome& o) {
  const std::string w = "level=" + std::to_string(o.level) + ";route=" + o.route;
  return {{experiment, o.n, o.r, std::nullopt, "ratio", o.ratio, w},
          {experiment, o.n, o.r, std::nullopt, "lower_bound", o.bound, w},
          {experiment, o.n, o.r, std::nullopt, "holds", o.holds() ? 1.0 : 0.0, w}};
}

/// Witness of the truncation corollary at one n: d = max(1/9, b_n),
/// a = sqrt(n d), |y| = ceil(n - d) - 1.
struct CorollaryPoint {
  int n = 0;
  double b = 0.0;
  double d = 0.0;
  double a = 0.0;
  int level = 0;
  bool excluded = false;    // |y| < n - d, i.e. y outside E_n
  bool admissible = false;  // |y| >= n - a
  double bound = 0.0;
  double ratio = 0.0;
  std::string route;
};

inline std::optional<CorollaryPoint> corollary_witness(int n, const TruncationRule& rule) {
  CorollaryPoint p;
  p.n = n;
  p.b = rule.at(n);
  p.d = std::max(1.0 / 9.0, p.b);
  p.a = std::sqrt(n * p.d);
  p.level = static_cast<int>(std::ceil(n - p.d)) - 1;
  if (p.level < 0) return std::nullopt;
  p.excluded = p.level < n - p.d;
  p.admissible = p.level >= n - p.a;
  return p;
}

inline ExperimentReport corollary_truncation_scan(const ExperimentConfig& config, unsigned threads = 1) {
  config.validate();
  ExperimentReport rep;
  rep.name = "corollary_truncation";
  rep.parameters = config_to_json(config);
  rep.started = utc_timestamp();
  for (int n : config.n_list) {
    auto point = corollary_witness(n, config.rule);
    if (!point || !point->admissible || !point->excluded) {
      rep.notes.push_back("n=" + std::to_string(n) + ": witness construction impossible, skipped");
      continue;
    }
    const KrawtchoukTable table = build_table(n);
    for (double r : config.r_list) {
      const CharacterRatio cr = character_ratio(table, point->level, r, threads);
      point->ratio = cr.ratio;
      point->bound = truncated_bound(n, point->a, r);
      const std::string w = "level=" + std::to_string(point->level) + ";d=" + format_double(point->d) +
                            ";a=" + format_double(point->a) + ";route=" + cr.route;
      rep.records.push_back({rep.name, n, r, std::nullopt, "ratio", point->ratio, w});
      rep.records.push_back({rep.name, n, r, std::nullopt, "lower_bound", point->bound, w});
      rep.records.push_back({rep.name, n, r, std::nullopt, "excluded_from_E", point->excluded ? 1.0 : 0.0, w});
      rep.records.push_back(
          {rep.name, n, r, std::nullopt, "holds", point->ratio >= point->bound * (1 - 1e-12) ? 1.0 : 0.0, w});
    }
  }
  rep.finished = utc_timestamp();
  return rep;
}

// ---------------------------------------------------------------------------
// Fixed-parity probes

struct LevelScan {
  std::vector<double> values;  // v(m), m = 0..n
  double max = 0.0;
  int argmax = 0;
};

inline LevelScan summarize(std::vector<double> v) {
  LevelScan s;
  s.values = std::move(v);
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    if (s.values[m] > s.max) {
      s.max = s.values[m];
      s.argmax = static_cast<int>(m);
    }
  }
  return s;
}

/// v(m) = V_r(kappa_k(m) : k in (2Z + q) cap {0..n}); max_m v(m) is the
/// ratio maximized over characters, a lower bound for the operator norm.
inline LevelScan parity_character_scan(const KrawtchoukTable& table, double r, int q) {
  return summarize(character_scan(table, RadiusSet::parity(table.n(), q), r));
}

/// Same scan with no parity restriction.
inline LevelScan full_character_scan(const KrawtchoukTable& table, double r) {
  return summarize(character_scan(table, RadiusSet::full(table.n()), r));
}

struct NormComparison {
  double full_ratio = 0.0;
  double parity_ratio[2] = {0.0, 0.0};
};

/// ||V_r(S_k f : k in Z)||_2 / ||f||_2 for Z the full range and each parity
/// class (or just `q` when given). Materializes the whole family once.
inline NormComparison full_vs_parity_norm(const CubeFunction& f, double r, const KrawtchoukTable& table,
                                          std::optional<int> q = std::nullopt, unsigned threads = 1) {
  detail::require_r(r);
  const double fn = norm2(f);
  if (fn == 0.0) throw std::invalid_argument("full_vs_parity_norm: f must be nonzero");
  const int n = f.n();
  const RadiusSet all = RadiusSet::full(n);
  const std::vector<CubeFunction> family = spherical_mean_family(f, all.indices(), table);
  NormComparison out;
  out.full_ratio = norm2(vr_pointwise(family, r, threads)) / fn;
  for (int parity = 0; parity <= 1; ++parity) {
    if (q && *q != parity) continue;
    std::vector<CubeFunction> sub;
    for (int k = parity; k <= n; k += 2) sub.push_back(family[k]);
    out.parity_ratio[parity] = norm2(vr_pointwise(sub, r, threads)) / fn;
  }
  return out;
}

/// Random f with fhat supported on {|y| <= n/2}: independent standard
/// complex Gaussian coefficients, normalized to ||f||_2 = 1.
inline CubeFunction random_half_spectrum_function(CubeDim dim, Rng& rng) {
  CubeFunction F(dim, Side::spectral);
  double s = 0.0;
  for (PointIndex y = 0; y < dim.size(); ++y) {
    if (2 * length(y) <= dim.n()) {
      F[y] = rng.complex_normal();
      s += std::norm(F[y]);
    }
  }
  const double inv = 1.0 / std::sqrt(s);
  for (auto& v : F.values()) v *= inv;
  return inverse_fourier(std::move(F));
}

struct HalfSpectrumScan {
  int n = 0;
  double r = 0.0;
  long trials = 0;
  double max_ratio = 0.0;
  long argmax_trial = -1;
};

/// Full-range ratios over random half-spectrum functions; records the max.
inline HalfSpectrumScan proposition_halfspectrum_scan(const KrawtchoukTable& table, double r, long trials,
                                                      std::uint64_t seed, unsigned threads = 1) {
  const int n = table.n();
  if (n < 2) throw std::invalid_argument("proposition_halfspectrum_scan: n must be >= 2");
  detail::require_r(r);
  const CubeDim dim(n);
  const RadiusSet all = RadiusSet::full(n);
  Rng rng(seed);
  HalfSpectrumScan s{n, r, trials, 0.0, -1};
  for (long t = 0; t < trials; ++t) {
    const CubeFunction f = random_half_spectrum_function(dim, rng);
    const double ratio = materialized_ratio(f, all, table, r, threads);
    if (ratio > s.max_ratio) {
      s.max_ratio = ratio;
      s.argmax_trial = t;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Multiplier sums from the dimension-free argument

/// Phi(x) = sum over dyadic k in {1..floor(n/2)} of |kappa_k(x) - e^{-kx/n}|^2,
/// for x in {0..floor(n/2)}.
inline LevelScan phi_scan(const KrawtchoukTable& table) {
  const int n = table.n();
  if (n < 2) throw std::invalid_argument("phi_scan: n must be >= 2");
  const int half = n / 2;
  std::vector<double> phi(static_cast<std::size_t>(half) + 1, 0.0);
  for (int x = 0; x <= half; ++x) {
    for (int k = 1; k <= half; k *= 2) {
      const double d = table.value(k, x) - std::exp(-static_cast<double>(k) * x / n);
      phi[x] += d * d;
    }
  }
  return summarize(std::move(phi));
}

/// Psi(x) = sum_{l>=0} sum_{g=0}^{l} 2^{g/2}
///          sum_{h in {1..2^g}, h 2^{l-g} + 2^l <= floor(n/2)}
///          |kappa_{(h-1) 2^{l-g} + 2^l}(x) - kappa_{h 2^{l-g} + 2^l}(x)|^2.
/// Every index is > 2^l, so the l-sum stops once 2^l >= floor(n/2).
inline LevelScan psi_scan(const KrawtchoukTable& table) {
  const int n = table.n();
  if (n < 2) throw std::invalid_argument("psi_scan: n must be >= 2");
  const long half = n / 2;
  std::vector<double> psi(static_cast<std::size_t>(half) + 1, 0.0);
  for (int x = 0; x <= half; ++x) {
    for (int l = 0; (1L << l) < half; ++l) {
      const long base = 1L << l;
      for (int g = 0; g <= l; ++g) {
        const long step = 1L << (l - g);
        const double weight = std::pow(2.0, 0.5 * g);
        for (long h = 1; h <= (1L << g) && h * step + base <= half; ++h) {
          const double d = table.value(static_cast<int>((h - 1) * step + base), x) -
                           table.value(static_cast<int>(h * step + base), x);
          psi[x] += weight * d * d;
        }
      }
    }
  }
  return summarize(std::move(psi));
}

}  // namespace cubevar

#endif  // CUBEVAR_EXPERIMENTS_HPP
