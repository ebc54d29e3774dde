#ifndef CUBEVAR_KRAWTCHOUK_HPP
#define CUBEVAR_KRAWTCHOUK_HPP

// Normalized Krawtchouk polynomials
//
//   kappa^(n)_k(x) = C(n,k)^{-1} sum_j (-1)^j C(x,j) C(n-x,k-j),
//
// which are the eigenvalues of the spherical mean S_k on the spectral level
// |y| = x. Values are computed exactly in rational arithmetic from the
// truncated sum max(0, x+k-n) <= j <= min(k, x); the double table is a
// rounding of the exact one. The alternating sum cancels catastrophically in
// floating point, so there is no independent float path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "cubevar/format.hpp"

namespace cubevar {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxExactDim = 64;

/// Pascal's triangle of arbitrary-precision binomials, rows 0..max_n.
class BinomialTable {
 public:
  explicit BinomialTable(int max_n) : max_n_(max_n) {
    if (max_n < 0) throw std::invalid_argument("BinomialTable: negative size");
    rows_.resize(static_cast<std::size_t>(max_n) + 1);
    for (int m = 0; m <= max_n; ++m) {
      auto& row = rows_[m];
      row.resize(static_cast<std::size_t>(m) + 1);
      row[0] = row[m] = 1;
      for (int k = 1; k < m; ++k) row[k] = rows_[m - 1][k - 1] + rows_[m - 1][k];
    }
  }

  int max_n() const noexcept { return max_n_; }

  /// C(m, k); zero outside 0 <= k <= m.
  const BigInt& operator()(int m, int k) const {
    static const BigInt zero = 0;
    if (m < 0 || m > max_n_) throw std::out_of_range("BinomialTable: row out of range");
    if (k < 0 || k > m) return zero;
    return rows_[m][k];
  }

 private:
  int max_n_;
  std::vector<std::vector<BigInt>> rows_;
};

namespace detail {

inline void require_kraw_args(int n, int k, int x) {
  if (n < 1) throw std::invalid_argument("krawtchouk: n must be >= 1");
  if (k < 0 || k > n || x < 0 || x > n)
    throw std::out_of_range("krawtchouk: k and x must lie in [0, n]");
}

inline Rational kraw_from_binomials(const BinomialTable& binom, int n, int k, int x) {
  BigInt sum = 0;
  const int lo = std::max(0, x + k - n);
  const int hi = std::min(k, x);
  for (int j = lo; j <= hi; ++j) {
    BigInt term = binom(x, j) * binom(n - x, k - j);
    if (j & 1)
      sum -= term;
    else
      sum += term;
  }
  return Rational(sum, binom(n, k));
}

}  // namespace detail

/// Exact kappa^(n)_k(x).
inline Rational kraw_exact(int n, int k, int x) {
  detail::require_kraw_args(n, k, x);
  const BinomialTable binom(n);
  return detail::kraw_from_binomials(binom, n, k, x);
}

/// (n+1) x (n+1) table of kappa^(n)_k(x), exact and rounded to double.
class KrawtchoukTable {
 public:
  KrawtchoukTable(int n, std::vector<Rational> exact)
      : n_(n), exact_(std::move(exact)), float_(exact_.size()) {
    const std::size_t side = static_cast<std::size_t>(n) + 1;
    if (exact_.size() != side * side) throw std::invalid_argument("KrawtchoukTable: wrong size");
    for (std::size_t i = 0; i < exact_.size(); ++i) float_[i] = exact_[i].convert_to<double>();
  }

  int n() const noexcept { return n_; }

  const Rational& exact(int k, int x) const { return exact_[index(k, x)]; }
  double value(int k, int x) const { return float_[index(k, x)]; }

 private:
  std::size_t index(int k, int x) const {
    if (k < 0 || k > n_ || x < 0 || x > n_) throw std::out_of_range("KrawtchoukTable: index out of range");
    return static_cast<std::size_t>(k) * (static_cast<std::size_t>(n_) + 1) + static_cast<std::size_t>(x);
  }

  int n_;
  std::vector<Rational> exact_;
  std::vector<double> float_;
};

/// O(n^3) exact tabulation; 1 <= n <= 64.
inline KrawtchoukTable build_table(int n) {
  if (n < 1 || n > kMaxExactDim)
    throw std::out_of_range("build_table: n must lie in [1, 64], got " + std::to_string(n));
  const BinomialTable binom(n);
  std::vector<Rational> exact;
  exact.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int k = 0; k <= n; ++k)
    for (int x = 0; x <= n; ++x) exact.push_back(detail::kraw_from_binomials(binom, n, k, x));
  return KrawtchoukTable(n, std::move(exact));
}

// ---------------------------------------------------------------------------
// Identity and bound checks

struct FactReport {
  int n = 0;
  long checked = 0;
  long bounded_failures = 0;     // |kappa_k(x)| <= 1
  long origin_failures = 0;      // kappa_k(0) = 1
  long symmetry_failures = 0;    // kappa_k(x) = kappa_x(k)
  long reflection_failures = 0;  // kappa_k(x) = (-1)^k kappa_k(n-x)

  long failures() const {
    return bounded_failures + origin_failures + symmetry_failures + reflection_failures;
  }
};

/// The four elementary properties, checked exactly for every (k, x).
inline FactReport check_facts(const KrawtchoukTable& t) {
  FactReport r;
  r.n = t.n();
  const int n = t.n();
  for (int k = 0; k <= n; ++k) {
    if (t.exact(k, 0) != 1) ++r.origin_failures;
    for (int x = 0; x <= n; ++x) {
      ++r.checked;
      const Rational& v = t.exact(k, x);
      if (abs(v) > 1) ++r.bounded_failures;
      if (v != t.exact(x, k)) ++r.symmetry_failures;
      const Rational mirrored = (k & 1) ? Rational(-t.exact(k, n - x)) : t.exact(k, n - x);
      if (v != mirrored) ++r.reflection_failures;
    }
  }
  return r;
}

struct IdentityReport {
  int n = 0;
  long checked = 0;
  long failures = 0;
};

/// kappa^(n)_k(x) - kappa^(n)_k(x-1) = -(2k/n) kappa^(n-1)_{k-1}(x-1)
/// for all k, x in [1, n], exactly.
inline IdentityReport check_difference_identity(const KrawtchoukTable& upper, const KrawtchoukTable& lower) {
  const int n = upper.n();
  if (n < 2) throw std::invalid_argument("difference identity needs n >= 2");
  if (lower.n() != n - 1) throw std::invalid_argument("difference identity: lower table must have dimension n-1");
  IdentityReport r;
  r.n = n;
  for (int k = 1; k <= n; ++k) {
    const Rational coeff(-2 * k, n);
    for (int x = 1; x <= n; ++x) {
      ++r.checked;
      if (upper.exact(k, x) - upper.exact(k, x - 1) != coeff * lower.exact(k - 1, x - 1)) ++r.failures;
    }
  }
  return r;
}

inline IdentityReport check_difference_identity(int n) {
  if (n < 2) throw std::invalid_argument("difference identity needs n >= 2");
  return check_difference_identity(build_table(n), build_table(n - 1));
}

/// One scanned constant with the grid point where it was attained.
struct ScanRecord {
  int n = 0;
  std::string constant_name;
  double value = 0.0;
  int argmax_k = -1;
  int argmax_x = -1;
  std::optional<Rational> exact;
};

inline void to_json(nlohmann::json& j, const ScanRecord& s) {
  j = nlohmann::json{{"n", s.n},
                     {"constant_name", s.constant_name},
                     {"value", s.value},
                     {"argmax", {{"k", s.argmax_k}, {"x", s.argmax_x}}}};
  if (s.exact) j["exact"] = s.exact->str();
}

/// max over k, x with kx > 0 of |kappa - 1| * n / (kx), exactly. The bound
/// |kappa_k(x) - 1| <= 2kx/n holds iff the result is <= 2.
inline ScanRecord bound_scan_a(const KrawtchoukTable& t) {
  const int n = t.n();
  ScanRecord rec;
  rec.n = n;
  rec.constant_name = "unit_deviation_ratio";
  Rational best = -1;
  for (int k = 1; k <= n; ++k) {
    for (int x = 1; x <= n; ++x) {
      const Rational ratio = abs(t.exact(k, x) - 1) * n / (k * x);
      if (ratio > best) {
        best = ratio;
        rec.argmax_k = k;
        rec.argmax_x = x;
      }
    }
  }
  rec.exact = best;
  rec.value = best.convert_to<double>();
  return rec;
}

inline ScanRecord bound_scan_a(int n) { return bound_scan_a(build_table(n)); }

struct BoundScanBC {
  ScanRecord c_b;  // max |kappa_k(x)| kx/n,            1 <= k, x <= n/2
  ScanRecord c_c;  // max |kappa_k(x) - kappa_{k-1}(x)| k, 1 <= k <= n/2, 0 <= x <= n/2
};

inline BoundScanBC bound_scan_b_c(const KrawtchoukTable& t) {
  const int n = t.n();
  if (n < 2) throw std::invalid_argument("bound_scan_b_c: n must be >= 2");
  const int half = n / 2;
  BoundScanBC out;
  out.c_b.n = out.c_c.n = n;
  out.c_b.constant_name = "decay_constant";
  out.c_c.constant_name = "increment_constant";
  Rational best_b = -1, best_c = -1;
  for (int k = 1; k <= half; ++k) {
    for (int x = 0; x <= half; ++x) {
      if (x >= 1) {
        const Rational b = abs(t.exact(k, x)) * (k * x) / n;
        if (b > best_b) {
          best_b = b;
          out.c_b.argmax_k = k;
          out.c_b.argmax_x = x;
        }
      }
      const Rational c = abs(t.exact(k, x) - t.exact(k - 1, x)) * k;
      if (c > best_c) {
        best_c = c;
        out.c_c.argmax_k = k;
        out.c_c.argmax_x = x;
      }
    }
  }
  out.c_b.exact = best_b;
  out.c_b.value = best_b.convert_to<double>();
  out.c_c.exact = best_c;
  out.c_c.value = best_c.convert_to<double>();
  return out;
}

inline BoundScanBC bound_scan_b_c(int n) { return bound_scan_b_c(build_table(n)); }

/// Largest c with |kappa^(m)_k(x)| <= exp(-c kx/m) for all 2 <= m <= n_max and
/// 1 <= k, x <= m/2, i.e. the minimum of -m ln|kappa| / (kx). Zero entries
/// satisfy every c and are skipped. rec.n holds the minimizing dimension.
inline ScanRecord estimate_exp_constant(int n_max) {
  if (n_max < 2) throw std::invalid_argument("estimate_exp_constant: n_max must be >= 2");
  ScanRecord rec;
  rec.constant_name = "exp_decay_c";
  rec.value = std::numeric_limits<double>::infinity();
  for (int m = 2; m <= n_max; ++m) {
    const KrawtchoukTable t = build_table(m);
    for (int k = 1; k <= m / 2; ++k) {
      for (int x = 1; x <= m / 2; ++x) {
        if (t.exact(k, x) == 0) continue;
        const double c = -m * std::log(std::abs(t.value(k, x))) / (k * x);
        if (c < rec.value) {
          rec.value = c;
          rec.n = m;
          rec.argmax_k = k;
          rec.argmax_x = x;
        }
      }
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Export

inline void write_table_csv(std::ostream& os, const KrawtchoukTable& t) {
  os << "n,k,x,numerator,denominator,float\n";
  for (int k = 0; k <= t.n(); ++k) {
    for (int x = 0; x <= t.n(); ++x) {
      const Rational& v = t.exact(k, x);
      os << t.n() << ',' << k << ',' << x << ',' << numerator(v) << ',' << denominator(v) << ','
         << format_double(t.value(k, x)) << '\n';
    }
  }
}

inline nlohmann::json table_to_json(const KrawtchoukTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k <= t.n(); ++k) {
    for (int x = 0; x <= t.n(); ++x) {
      const Rational& v = t.exact(k, x);
      rows.push_back({{"n", t.n()},
                      {"k", k},
                      {"x", x},
                      {"numerator", numerator(v).str()},
                      {"denominator", denominator(v).str()},
                      {"float", t.value(k, x)}});
    }
  }
  return rows;
}

}  // namespace cubevar

#endif  // CUBEVAR_KRAWTCHOUK_HPP
