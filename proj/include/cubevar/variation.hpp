#ifndef CUBEVAR_VARIATION_HPP
#define CUBEVAR_VARIATION_HPP

// r-variation seminorms of finite sequences
//
//   V_r(a_t : t in Z) = sup over t_0 < ... < t_J in Z of (sum_j |a_{t_{j-1}} - a_{t_j}|^r)^{1/r},
//
// plus the dyadic machinery used to bound them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubevar/core.hpp"
#include "cubevar/random.hpp"

namespace cubevar {

// ---------------------------------------------------------------------------
// Radius sets

enum class RadiusKind { full, parity, dyadic, interval };

/// Strictly increasing subset of {0..n}.
class RadiusSet {
 public:
  static RadiusSet full(int n) { return interval(n, 0, n, RadiusKind::full); }

  /// (2Z + q) intersected with {0..n}.
  static RadiusSet parity(int n, int q) {
    if (q != 0 && q != 1) throw std::invalid_argument("parity class q must be 0 or 1");
    RadiusSet s(n, RadiusKind::parity);
    s.q_ = q;
    for (int k = q; k <= n; k += 2) s.indices_.push_back(k);
    return s;
  }

  /// Powers of two in [1, limit], limit <= n.
  static RadiusSet dyadic(int n, int limit) {
    if (limit > n) throw std::invalid_argument("dyadic limit exceeds n");
    RadiusSet s(n, RadiusKind::dyadic);
    for (long k = 1; k <= limit; k *= 2) s.indices_.push_back(static_cast<int>(k));
    return s;
  }

  static RadiusSet dyadic(int n) { return dyadic(n, n); }

  /// {a..b} (inclusive).
  static RadiusSet interval(int n, int a, int b) { return interval(n, a, b, RadiusKind::interval); }

  int n() const noexcept { return n_; }
  RadiusKind kind() const noexcept { return kind_; }
  int q() const noexcept { return q_; }
  std::span<const int> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

 private:
  RadiusSet(int n, RadiusKind kind) : n_(n), kind_(kind) {
    if (n < 0) throw std::invalid_argument("RadiusSet: n must be >= 0");
  }

  static RadiusSet interval(int n, int a, int b, RadiusKind kind) {
    if (a < 0 || b > n || a > b) throw std::invalid_argument("RadiusSet: interval outside [0, n]");
    RadiusSet s(n, kind);
    for (int k = a; k <= b; ++k) s.indices_.push_back(k);
    return s;
  }

  int n_;
  RadiusKind kind_;
  int q_ = -1;
  std::vector<int> indices_;
};

// ---------------------------------------------------------------------------
// Exact V_r

struct VariationResult {
  double r = 1.0;
  double value = 0.0;
  std::vector<int> chain;  // labels of one maximizing chain
};

inline void to_json(nlohmann::json& j, const VariationResult& v) {
  j = nlohmann::json{{"r", v.r}, {"value", v.value}, {"chain", v.chain}};
}

namespace detail {

inline void require_r(double r) {
  if (!(r >= 1.0) || std::isinf(r)) throw std::invalid_argument("variation exponent r must satisfy 1 <= r < inf");
}

/// Sum of |a_i - a_j|^r, picking the cheap path for r in {1, 2}.
inline double powered_gap(complex a, complex b, double r) {
  if (r == 1.0) return std::abs(a - b);
  if (r == 2.0) return std::norm(a - b);
  return std::pow(std::abs(a - b), r);
}

}  // namespace detail

/// sum_j |a_{k_{j-1}} - a_{k_j}|^r maximized over chains, by longest path on
/// the index DAG. tail[i] is the best r-th power sum of a chain starting at
/// position i; position 0 always starts a maximizer.
///
/// Returns the r-th power (no root) and fills `chain` (positions) with the
/// lexicographically smallest maximizer, treating sums within 1e-12
/// relative as ties.
inline double vr_power_sum(std::span<const complex> a, double r, std::vector<int>* chain = nullptr) {
  const std::size_t len = a.size();
  if (len == 0) throw std::invalid_argument("variation of an empty sequence");
  std::vector<double> tail(len, 0.0);
  for (std::size_t i = len - 1; i-- > 0;) {
    double best = 0.0;
    for (std::size_t j = i + 1; j < len; ++j) best = std::max(best, detail::powered_gap(a[i], a[j], r) + tail[j]);
    tail[i] = best;
  }
  if (chain) {
    chain->assign(1, 0);
    std::size_t i = 0;
    const double eps = 1e-12 * std::max(tail[0], 1e-300);
    while (tail[i] > eps) {
      std::size_t next = len;
      for (std::size_t j = i + 1; j < len; ++j) {
        if (detail::powered_gap(a[i], a[j], r) + tail[j] >= tail[i] - eps) {
          next = j;
          break;
        }
      }
      if (next == len) break;
      chain->push_back(static_cast<int>(next));
      i = next;
    }
  }
  return tail[0];
}

/// V_r of a plain sequence (positions are the labels).
inline double vr_value(std::span<const complex> a, double r) {
  detail::require_r(r);
  return std::pow(vr_power_sum(a, r), 1.0 / r);
}

inline double vr_value(std::span<const double> a, double r) {
  std::vector<complex> c(a.begin(), a.end());
  return vr_value(std::span<const complex>(c), r);
}

/// A sequence a_{t_0}, ..., a_{t_J} with strictly increasing labels.
struct VariationQuery {
  double r = 2.0;
  std::vector<complex> values;
  std::vector<int> labels;  // empty means 0..J

  void validate() const {
    detail::require_r(r);
    if (values.empty()) throw std::invalid_argument("variation of an empty sequence");
    if (!labels.empty()) {
      if (labels.size() != values.size()) throw std::invalid_argument("labels and values differ in length");
      for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] <= labels[i - 1]) throw std::invalid_argument("labels must be strictly increasing");
    }
  }

  int label(std::size_t pos) const { return labels.empty() ? static_cast<int>(pos) : labels[pos]; }
};

/// Exact V_r in O(J^2), with a maximizing chain.
inline VariationResult vr_exact(const VariationQuery& q) {
  q.validate();
  std::vector<int> positions;
  const double power = vr_power_sum(q.values, q.r, &positions);
  VariationResult res;
  res.r = q.r;
  res.value = std::pow(power, 1.0 / q.r);
  res.chain.reserve(positions.size());
  for (int p : positions) res.chain.push_back(q.label(static_cast<std::size_t>(p)));
  return res;
}

inline constexpr std::size_t kBruteForceMaxLength = 17;

/// Exhaustive maximum over every subset taken as a chain (J <= 16).
inline double vr_bruteforce(const VariationQuery& q) {
  q.validate();
  const std::size_t len = q.values.size();
  if (len > kBruteForceMaxLength) throw std::invalid_argument("vr_bruteforce: sequence too long");
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << len); ++mask) {
    double s = 0.0;
    int prev = -1;
    for (std::size_t i = 0; i < len; ++i) {
      if (!(mask >> i & 1u)) continue;
      if (prev >= 0) s += std::pow(std::abs(q.values[prev] - q.values[i]), q.r);
      prev = static_cast<int>(i);
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / q.r);
}

// ---------------------------------------------------------------------------
// Dyadic tools

/// Largest power of two <= t.
inline double dyadic_floor(double t) {
  if (!(t > 0.0) || std::isinf(t)) throw std::invalid_argument("dyadic_floor: t must be positive and finite");
  int e = 0;
  std::frexp(t, &e);  // t = m 2^e, m in [1/2, 1)
  return std::ldexp(1.0, e - 1);
}

/// [(h-1) 2^g, h 2^g)
struct DyadicInterval {
  int g = 0;
  long h = 1;

  long begin() const { return (h - 1) << g; }
  long end() const { return h << g; }
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

struct DyadicPartition {
  long a = 0;
  long b = 0;
  int l = 0;
  std::vector<DyadicInterval> intervals;  // in increasing position
};

/// Splits [a, b) into aligned dyadic intervals, at most two per scale, by
/// always taking the longest aligned block that starts at the cursor.
inline DyadicPartition dyadic_partition(long a, long b, int l) {
  if (l < 0 || l > 40) throw std::invalid_argument("dyadic_partition: l out of range");
  if (a < 0 || a >= b || b > (1L << l)) throw std::invalid_argument("dyadic_partition: need 0 <= a < b <= 2^l");
  DyadicPartition p{a, b, l, {}};
  long cur = a;
  while (cur < b) {
    int g = l;
    while (g > 0 && ((cur & ((1L << g) - 1)) != 0 || cur + (1L << g) > b)) --g;
    p.intervals.push_back({g, (cur >> g) + 1});
    cur += 1L << g;
  }
  return p;
}

struct PartitionCheck {
  bool disjoint = true;
  bool covers = true;
  bool at_most_two_per_scale = true;
  bool aligned = true;

  bool ok() const { return disjoint && covers && at_most_two_per_scale && aligned; }
};

/// Verifies the structural invariants of a partition independently of how
/// it was built.
inline PartitionCheck check_partition(const DyadicPartition& p) {
  PartitionCheck c;
  std::vector<int> hits(static_cast<std::size_t>(p.b - p.a), 0);
  std::vector<int> per_scale(static_cast<std::size_t>(p.l) + 1, 0);
  for (const auto& iv : p.intervals) {
    if (iv.g < 0 || iv.g > p.l || iv.h < 1 || iv.h > (1L << (p.l - iv.g))) {
      c.aligned = false;
      continue;
    }
    ++per_scale[iv.g];
    for (long t = iv.begin(); t < iv.end(); ++t) {
      if (t < p.a || t >= p.b) {
        c.covers = false;
        continue;
      }
      ++hits[t - p.a];
    }
  }
  for (int h : hits) {
    if (h > 1) c.disjoint = false;
    if (h == 0) c.covers = false;
  }
  for (int s : per_scale)
    if (s > 2) c.at_most_two_per_scale = false;
  return c;
}

// ---------------------------------------------------------------------------
// Inequality suites

/// Worst slack (rhs - lhs, normalized by max(1, rhs)) and violation count
/// for one inequality.
struct InequalityStat {
  std::string name;
  long checked = 0;
  long violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double tightest_constant = 0.0;  // empirical constant, reported only

  void record(double lhs, double rhs) {
    ++checked;
    const double slack = (rhs - lhs) / std::max(1.0, std::abs(rhs));
    worst_slack = std::min(worst_slack, slack);
    if (lhs > rhs * (1.0 + 1e-12) + 1e-12) ++violations;
  }
};

struct PropertyReport {
  long trials = 0;
  std::vector<InequalityStat> stats;

  long violations() const {
    long v = 0;
    for (const auto& s : stats) v += s.violations;
    return v;
  }

  const InequalityStat& stat(const std::string& name) const {
    for (const auto& s : stats)
      if (s.name == name) return s;
    throw std::out_of_range("no inequality named " + name);
  }
};

namespace detail {

inline std::vector<complex> random_sequence(Rng& rng, std::size_t len) {
  std::vector<complex> a(len);
  const int style = static_cast<int>(rng.uniform_int(0, 2));
  for (auto& v : a) {
    switch (style) {
      case 0: v = rng.complex_normal(); break;
      case 1: v = rng.normal(); break;
      default: v = rng.uniform() < 0.5 ? -1.0 : 1.0; break;  // many exact ties
    }
  }
  return a;
}

inline double lr_norm(std::span<const complex> a, double r) {
  double s = 0.0;
  for (auto v : a) s += std::pow(std::abs(v), r);
  return std::pow(s, 1.0 / r);
}

}  // namespace detail

/// Randomized check of the standard V_r properties:
///   monotone in r, monotone under subsets, invariant under nondecreasing
///   reparametrization, triangle inequality, V_r <= 2 ||a||_r, and the
///   dyadic splitting bound with constant 3:
///     V_r(Z) <= 3 (sum_k V_r([k,2k) cap Z)^r)^{1/r} + V_r(D cap Z)
///   for Z closed under the dyadic floor.
inline PropertyReport check_variation_properties(long trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_variation_properties: trials must be >= 1");
  Rng rng(seed);
  PropertyReport rep;
  rep.trials = trials;
  InequalityStat mono_r{"monotone_in_r"}, subset{"subset_monotone"}, reparam{"reparametrization"},
      triangle{"triangle"}, lr_bound{"lr_bound_2"}, dyadic{"dyadic_split_3"};
  const double rs[] = {1.0, 1.5, 2.0, 3.0};

  for (long trial = 0; trial < trials; ++trial) {
    const double r = rs[rng.uniform_int(0, 3)];
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 14));
    const std::vector<complex> a = detail::random_sequence(rng, len);
    const double va = vr_value(a, r);

    for (double r2 : rs)
      if (r2 >= r) mono_r.record(vr_value(a, r2), va);

    std::vector<complex> sub;
    for (auto v : a)
      if (rng.uniform() < 0.6) sub.push_back(v);
    if (!sub.empty()) subset.record(vr_value(sub, r), va);

    // a_{phi(s)} over a nondecreasing phi onto a random image set: repeats
    // must not change V_r. Checked in both directions.
    std::vector<complex> image, repeated;
    for (auto v : a) {
      if (rng.uniform() < 0.3) continue;
      image.push_back(v);
      const auto copies = rng.uniform_int(1, 3);
      for (long c = 0; c < copies; ++c) repeated.push_back(v);
    }
    if (!image.empty()) {
      const double vi = vr_value(image, r);
      const double vrep = vr_value(repeated, r);
      reparam.record(vrep, vi);
      reparam.record(vi, vrep);
    }

    const std::vector<complex> b = detail::random_sequence(rng, len);
    std::vector<complex> sum(len);
    for (std::size_t i = 0; i < len; ++i) sum[i] = a[i] + b[i];
    triangle.record(vr_value(sum, r), va + vr_value(b, r));

    const double lr = detail::lr_norm(a, r);
    lr_bound.record(va, 2.0 * lr);
    if (lr > 0.0) lr_bound.tightest_constant = std::max(lr_bound.tightest_constant, va / lr);

    // Random Z subset of (0, inf): a few reals with their dyadic floors added.
    std::vector<double> z;
    const auto pts = rng.uniform_int(1, 10);
    for (long i = 0; i < pts; ++i) {
      const double t = std::exp(rng.uniform(std::log(0.2), std::log(64.0)));
      z.push_back(t);
      z.push_back(dyadic_floor(t));
    }
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    std::vector<complex> az(z.size());
    for (auto& v : az) v = rng.complex_normal();

    std::vector<complex> on_dyadic;
    double blocks = 0.0;
    for (std::size_t i = 0; i < z.size();) {
      const double k = dyadic_floor(z[i]);
      std::vector<complex> block;
      while (i < z.size() && dyadic_floor(z[i]) == k) block.push_back(az[i++]);
      blocks += vr_power_sum(block, r);
    }
    for (std::size_t i = 0; i < z.size(); ++i)
      if (dyadic_floor(z[i]) == z[i]) on_dyadic.push_back(az[i]);
    const double block_term = std::pow(blocks, 1.0 / r);
    const double dyadic_term = on_dyadic.empty() ? 0.0 : vr_value(on_dyadic, r);
    const double vz = vr_value(az, r);
    dyadic.record(vz, 3.0 * block_term + dyadic_term);
    if (block_term > 0.0)
      dyadic.tightest_constant = std::max(dyadic.tightest_constant, (vz - dyadic_term) / block_term);
  }
  rep.stats = {mono_r, subset, reparam, triangle, lr_bound, dyadic};
  return rep;
}

/// Right-hand side of the chaining bound:
///   2^{1-1/s} sum_{g=0}^{l} (sum_{h <= 2^{l-g}, h 2^g <= M} |a_{(h-1)2^g} - a_{h 2^g}|^s)^{1/s}
/// for a defined on {0..min(M, 2^l)}.
inline double chain_lemma_rhs(std::span<const complex> a, int l, long M, double s) {
  double total = 0.0;
  for (int g = 0; g <= l; ++g) {
    double inner_sum = 0.0;
    for (long h = 1; h <= (1L << (l - g)) && (h << g) <= M; ++h)
      inner_sum += std::pow(std::abs(a[(h - 1) << g] - a[h << g]), s);
    total += std::pow(inner_sum, 1.0 / s);
  }
  return std::pow(2.0, 1.0 - 1.0 / s) * total;
}

/// Randomized check of V_s(a_k : k in {0..2^l}, k <= M) <= chain_lemma_rhs.
inline InequalityStat check_chain_lemma(int l, long M, double s, long trials, std::uint64_t seed) {
  detail::require_r(s);
  if (l < 0 || l > 10) throw std::invalid_argument("check_chain_lemma: l must lie in [0, 10]");
  if (M < 0) throw std::invalid_argument("check_chain_lemma: M must be >= 0");
  Rng rng(seed);
  InequalityStat stat{"chain_lemma"};
  const long top = std::min(M, 1L << l);
  for (long trial = 0; trial < trials; ++trial) {
    std::vector<complex> a = detail::random_sequence(rng, static_cast<std::size_t>(top) + 1);
    stat.record(vr_value(a, s), chain_lemma_rhs(a, l, M, s));
  }
  return stat;
}

// ---------------------------------------------------------------------------
// Pointwise variation of a family of cube functions

/// x -> V_r(F_0(x), ..., F_J(x)), a real-valued physical-side function.
/// The family is taken in the given order (e.g. the order of a RadiusSet).
inline CubeFunction vr_pointwise(std::span<const CubeFunction> family, double r, unsigned threads = 1) {
  detail::require_r(r);
  if (family.empty()) throw std::invalid_argument("vr_pointwise: empty family");
  const CubeDim dim = family.front().dim();
  for (const auto& f : family) {
    if (f.dim() != dim) throw std::invalid_argument("vr_pointwise: dimension mismatch");
    detail::require_side(f, Side::physical, "vr_pointwise");
  }
  CubeFunction out(dim);
  const std::size_t len = family.size();
  parallel_for(dim.size(), threads, [&](std::size_t x) {
    std::vector<complex> column(len);
    for (std::size_t j = 0; j < len; ++j) column[j] = family[j][static_cast<PointIndex>(x)];
    out[static_cast<PointIndex>(x)] = std::pow(vr_power_sum(column, r), 1.0 / r);
  });
  return out;
}

}  // namespace cubevar

#endif  // CUBEVAR_VARIATION_HPP
