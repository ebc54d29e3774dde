#ifndef CUBEVAR_OPERATORS_HPP
#define CUBEVAR_OPERATORS_HPP

// Spherical means S_k, the noise semigroup N_t and the reflection theta.
// Each operator has a physical-side route (enumeration or convolution) and a
// spectral route (Krawtchouk / exponential multipliers); the two are
// cross-checked in the tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubevar/core.hpp"
#include "cubevar/krawtchouk.hpp"
#include "cubevar/random.hpp"

namespace cubevar {

/// t >= 0 and u_t = (1 - e^{-t}) / 2.
class NoiseParams {
 public:
  explicit NoiseParams(double t) : t_(t) {
    if (!(t >= 0.0)) throw std::invalid_argument("noise parameter t must be >= 0");
    u_ = -0.5 * std::expm1(-t);
  }

  double t() const noexcept { return t_; }
  double u() const noexcept { return u_; }

 private:
  double t_;
  double u_;
};

namespace detail {

inline void require_radius(const CubeFunction& f, int k) {
  if (k < 0 || k > f.n())
    throw std::out_of_range("radius k=" + std::to_string(k) + " outside [0, " + std::to_string(f.n()) + "]");
}

inline void require_table(const CubeFunction& f, const KrawtchoukTable& table) {
  if (table.n() != f.n()) throw std::invalid_argument("Krawtchouk table dimension mismatch");
}

inline double binomial_double(int n, int k) {
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

/// Next integer with the same popcount (Gosper).
inline std::uint64_t next_same_weight(std::uint64_t v) {
  const std::uint64_t c = v & (~v + 1);
  const std::uint64_t r = v + c;
  return (((r ^ v) >> 2) / c) | r;
}

}  // namespace detail

/// Normalized indicator of the sphere R_k = {|x| = k}.
inline CubeFunction sphere_measure(CubeDim dim, int k) {
  if (k < 0 || k > dim.n()) throw std::out_of_range("sphere_measure: radius out of range");
  CubeFunction mu(dim);
  const double w = 1.0 / detail::binomial_double(dim.n(), k);
  for (PointIndex x = 0; x < dim.size(); ++x)
    if (length(x) == k) mu[x] = w;
  return mu;
}

/// Average of f over the Hamming sphere of radius k around each point.
/// Enumerates weight-k masks while C(n,k) <= 4n, otherwise convolves with
/// the sphere measure.
inline CubeFunction spherical_mean_direct(const CubeFunction& f, int k) {
  detail::require_side(f, Side::physical, "spherical_mean_direct");
  detail::require_radius(f, k);
  const int n = f.n();
  const double count = detail::binomial_double(n, k);
  if (count > 4.0 * n) return convolve(f, sphere_measure(f.dim(), k));

  std::vector<PointIndex> masks;
  masks.reserve(static_cast<std::size_t>(count));
  if (k == 0) {
    masks.push_back(0);
  } else {
    const std::uint64_t limit = std::uint64_t{1} << n;
    for (std::uint64_t m = (std::uint64_t{1} << k) - 1; m < limit; m = detail::next_same_weight(m))
      masks.push_back(static_cast<PointIndex>(m));
  }
  CubeFunction out(f.dim());
  const double inv = 1.0 / static_cast<double>(masks.size());
  for (PointIndex x = 0; x < f.size(); ++x) {
    complex s = 0.0;
    for (PointIndex m : masks) s += f[x ^ m];
    out[x] = s * inv;
  }
  return out;
}

/// Multiplies a spectral-side function by m(|y|) in place.
template <class LevelMultiplier>
void apply_level_multiplier(CubeFunction& F, LevelMultiplier&& m) {
  detail::require_side(F, Side::spectral, "apply_level_multiplier");
  for (PointIndex y = 0; y < F.size(); ++y) F[y] *= m(length(y));
}

/// S_k f via S_k chi_y = kappa_k(|y|) chi_y.
inline CubeFunction spherical_mean_multiplier(const CubeFunction& f, int k, const KrawtchoukTable& table) {
  detail::require_side(f, Side::physical, "spherical_mean_multiplier");
  detail::require_radius(f, k);
  detail::require_table(f, table);
  CubeFunction F = fourier(f);
  apply_level_multiplier(F, [&](int level) { return table.value(k, level); });
  return inverse_fourier(std::move(F));
}

/// S_k f for every k in radii, sharing one forward transform.
inline std::vector<CubeFunction> spherical_mean_family(const CubeFunction& f, std::span<const int> radii,
                                                       const KrawtchoukTable& table) {
  detail::require_side(f, Side::physical, "spherical_mean_family");
  detail::require_table(f, table);
  for (int k : radii) detail::require_radius(f, k);
  const CubeFunction F = fourier(f);
  std::vector<CubeFunction> out;
  out.reserve(radii.size());
  for (int k : radii) {
    CubeFunction G = F;
    apply_level_multiplier(G, [&](int level) { return table.value(k, level); });
    out.push_back(inverse_fourier(std::move(G)));
  }
  return out;
}

/// N_t chi_y = e^{-t|y|} chi_y
inline CubeFunction noise_multiplier(const CubeFunction& f, double t) {
  detail::require_side(f, Side::physical, "noise_multiplier");
  const NoiseParams params(t);
  std::vector<double> level(static_cast<std::size_t>(f.n()) + 1);
  for (int m = 0; m <= f.n(); ++m) level[m] = std::exp(-params.t() * m);
  CubeFunction F = fourier(f);
  apply_level_multiplier(F, [&](int m) { return level[m]; });
  return inverse_fourier(std::move(F));
}

/// Binomial weights C(n,k) u^k (1-u)^{n-k}, evaluated in log space.
inline std::vector<double> binomial_weights(int n, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("binomial_weights: u must lie in [0, 1]");
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  if (u == 0.0) {
    w[0] = 1.0;
    return w;
  }
  if (u == 1.0) {
    w[n] = 1.0;
    return w;
  }
  const double lu = std::log(u);
  const double l1u = std::log1p(-u);
  for (int k = 0; k <= n; ++k) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    w[k] = std::exp(lc + k * lu + (n - k) * l1u);
  }
  return w;
}

/// M_t f = sum_k C(n,k) u_t^k (1-u_t)^{n-k} S_k f, the binomial mixture of
/// spherical means. Summed per spectral level in increasing k.
inline CubeFunction noise_binomial(const CubeFunction& f, double t, const KrawtchoukTable& table) {
  detail::require_side(f, Side::physical, "noise_binomial");
  detail::require_table(f, table);
  const NoiseParams params(t);
  const int n = f.n();
  const std::vector<double> w = binomial_weights(n, params.u());
  std::vector<double> level(static_cast<std::size_t>(n) + 1, 0.0);
  for (int m = 0; m <= n; ++m)
    for (int k = 0; k <= n; ++k) level[m] += w[k] * table.value(k, m);
  CubeFunction F = fourier(f);
  apply_level_multiplier(F, [&](int m) { return level[m]; });
  return inverse_fourier(std::move(F));
}

struct SemigroupReport {
  int n = 0;
  long trials = 0;
  double contraction_l1 = 0.0;    // max (||N_t f||_p - ||f||_p) / ||f||_p, clipped at 0
  double contraction_l2 = 0.0;
  double contraction_linf = 0.0;
  double symmetry = 0.0;          // max |<N_t f, g> - <f, N_t g>| / (||f|| ||g||)
  double positivity = 0.0;        // max (-min Re N_t f, |Im N_t f|) / ||f||_inf over f >= 0
  double conservation = 0.0;      // max |N_t 1 - 1|

  double worst() const {
    return std::max({contraction_l1, contraction_l2, contraction_linf, symmetry, positivity, conservation});
  }
};

namespace detail {

inline CubeFunction random_complex_function(CubeDim dim, Rng& rng) {
  CubeFunction f(dim);
  for (PointIndex x = 0; x < dim.size(); ++x) f[x] = rng.complex_normal();
  return f;
}

inline CubeFunction random_nonnegative_function(CubeDim dim, Rng& rng) {
  CubeFunction f(dim);
  for (PointIndex x = 0; x < dim.size(); ++x) f[x] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
  return f;
}

}  // namespace detail

/// Contraction on l^1, l^2, l^inf, self-adjointness, positivity and
/// conservation of N_t, on `trials` random inputs per grid value of t.
inline SemigroupReport semigroup_axioms_check(int n, std::span<const double> t_grid, int trials, std::uint64_t seed) {
  const CubeDim dim(n);
  Rng rng(seed);
  SemigroupReport rep;
  rep.n = n;
  const CubeFunction one = CubeFunction::constant(dim, 1.0);
  for (double t : t_grid) {
    const CubeFunction n_one = noise_multiplier(one, t);
    rep.conservation = std::max(rep.conservation, max_abs_diff(n_one, one));
    for (int trial = 0; trial < trials; ++trial) {
      ++rep.trials;
      const CubeFunction f = detail::random_complex_function(dim, rng);
      const CubeFunction g = detail::random_complex_function(dim, rng);
      const CubeFunction nf = noise_multiplier(f, t);
      const CubeFunction ng = noise_multiplier(g, t);

      const auto excess = [](double after, double before) { return std::max(0.0, (after - before) / before); };
      rep.contraction_l1 = std::max(rep.contraction_l1, excess(norm_p(nf, 1.0), norm_p(f, 1.0)));
      rep.contraction_l2 = std::max(rep.contraction_l2, excess(norm2(nf), norm2(f)));
      rep.contraction_linf = std::max(rep.contraction_linf, excess(norm_inf(nf), norm_inf(f)));

      const double sym = std::abs(inner(nf, g) - inner(f, ng)) / (norm2(f) * norm2(g));
      rep.symmetry = std::max(rep.symmetry, sym);

      const CubeFunction p = detail::random_nonnegative_function(dim, rng);
      const double scale = norm_inf(p);
      if (scale > 0.0) {
        const CubeFunction np = noise_multiplier(p, t);
        for (PointIndex x = 0; x < np.size(); ++x) {
          rep.positivity = std::max(rep.positivity, -np[x].real() / scale);
          rep.positivity = std::max(rep.positivity, std::abs(np[x].imag()) / scale);
        }
      }
    }
  }
  return rep;
}

/// theta chi_y = chi_{y ^ 1_n}, as a permutation of the spectrum.
inline CubeFunction reflect(const CubeFunction& f) {
  detail::require_side(f, Side::physical, "reflect");
  const CubeFunction F = fourier(f);
  CubeFunction G(f.dim(), Side::spectral);
  const PointIndex ones = f.dim().ones();
  for (PointIndex y = 0; y < F.size(); ++y) G[y ^ ones] = F[y];
  return inverse_fourier(std::move(G));
}

/// max over k, z of |S_k g(z) - (-1)^{k+|z|} S_k theta g(z)|.
inline double reflection_identity_violation(const CubeFunction& g, const KrawtchoukTable& table) {
  const CubeFunction tg = reflect(g);
  double worst = 0.0;
  for (int k = 0; k <= g.n(); ++k) {
    const CubeFunction lhs = spherical_mean_multiplier(g, k, table);
    const CubeFunction rhs = spherical_mean_multiplier(tg, k, table);
    for (PointIndex z = 0; z < g.size(); ++z) {
      const double sign = ((k + length(z)) & 1) ? -1.0 : 1.0;
      worst = std::max(worst, std::abs(lhs[z] - sign * rhs[z]));
    }
  }
  return worst;
}

struct AntipodalReport {
  int n = 0;
  long checked = 0;
  double max_violation = 0.0;
};

/// S_k f(x ^ 1_n) = S_{n-k} f(x) for all k, x, both sides by definition.
inline AntipodalReport antipodal_check(const CubeFunction& f) {
  detail::require_side(f, Side::physical, "antipodal_check");
  const int n = f.n();
  std::vector<CubeFunction> means;
  means.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) means.push_back(spherical_mean_direct(f, k));
  AntipodalReport rep;
  rep.n = n;
  const PointIndex ones = f.dim().ones();
  for (int k = 0; k <= n; ++k) {
    for (PointIndex x = 0; x < f.size(); ++x) {
      ++rep.checked;
      rep.max_violation = std::max(rep.max_violation, std::abs(means[k][x ^ ones] - means[n - k][x]));
    }
  }
  return rep;
}

}  // namespace cubevar

#endif  // CUBEVAR_OPERATORS_HPP
