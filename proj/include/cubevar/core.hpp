#ifndef CUBEVAR_CORE_HPP
#define CUBEVAR_CORE_HPP

// Functions on the Hamming cube {0,1}^n and their Walsh-Fourier transform.
// Points are machine integers: bit j holds coordinate j.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cubevar {

using complex = std::complex<double>;
using PointIndex = std::uint32_t;

inline constexpr int kMaxDim = 26;

/// Dimension of the cube. Always in [1, kMaxDim].
class CubeDim {
 public:
  explicit CubeDim(int n) : n_(n) {
    if (n < 1 || n > kMaxDim)
      throw std::invalid_argument("cube dimension must lie in [1, 26], got " + std::to_string(n));
  }

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return std::size_t{1} << n_; }
  /// The all-ones point 1_n.
  PointIndex ones() const noexcept { return static_cast<PointIndex>(size() - 1); }
  bool contains(PointIndex x) const noexcept { return x < size(); }

  friend bool operator==(CubeDim, CubeDim) = default;

 private:
  int n_;
};

/// Hamming length |x|.
constexpr int length(PointIndex x) noexcept { return std::popcount(x); }

/// (-1)^{x.y}
constexpr int character_sign(PointIndex x, PointIndex y) noexcept {
  return (std::popcount(x & y) & 1) ? -1 : 1;
}

enum class Side { physical, spectral };

inline const char* to_string(Side s) { return s == Side::physical ? "physical" : "spectral"; }

/// Dense complex-valued function on the cube, tagged with the side
/// (physical or spectral) it currently lives on.
class CubeFunction {
 public:
  explicit CubeFunction(CubeDim dim, Side side = Side::physical)
      : dim_(dim), side_(side), values_(dim.size()) {}

  CubeFunction(CubeDim dim, std::vector<complex> values, Side side = Side::physical)
      : dim_(dim), side_(side), values_(std::move(values)) {
    if (values_.size() != dim_.size())
      throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dim_.size()) +
                                  " values, got " + std::to_string(values_.size()));
  }

  static CubeFunction constant(CubeDim dim, complex c) {
    return CubeFunction(dim, std::vector<complex>(dim.size(), c));
  }

  static CubeFunction delta(CubeDim dim, PointIndex at, Side side = Side::physical) {
    if (!dim.contains(at)) throw std::out_of_range("point outside cube");
    CubeFunction f(dim, side);
    f[at] = 1.0;
    return f;
  }

  CubeDim dim() const noexcept { return dim_; }
  int n() const noexcept { return dim_.n(); }
  Side side() const noexcept { return side_; }
  std::size_t size() const noexcept { return values_.size(); }

  complex& operator[](PointIndex x) { return values_[x]; }
  const complex& operator[](PointIndex x) const { return values_[x]; }

  std::span<complex> values() noexcept { return values_; }
  std::span<const complex> values() const noexcept { return values_; }

  /// Re-tag without touching the values. Used by the transforms.
  void set_side(Side s) noexcept { side_ = s; }

 private:
  CubeDim dim_;
  Side side_;
  std::vector<complex> values_;
};

namespace detail {

inline void require_side(const CubeFunction& f, Side expected, const char* op) {
  if (f.side() != expected)
    throw std::invalid_argument(std::string(op) + ": expected " + to_string(expected) +
                                "-side function, got " + to_string(f.side()));
}

inline void require_same_dim(const CubeFunction& f, const CubeFunction& g, const char* op) {
  if (f.dim() != g.dim()) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

}  // namespace detail

/// Unnormalized in-place Walsh-Hadamard transform, radix-2 butterflies.
/// data.size() must be a power of two.
inline void fwht_inplace(std::span<complex> data) {
  const std::size_t len = data.size();
  if (len == 0 || !std::has_single_bit(len))
    throw std::invalid_argument("fwht: length must be a power of two");
  for (std::size_t half = 1; half < len; half <<= 1) {
    for (std::size_t block = 0; block < len; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const complex a = data[i];
        const complex b = data[i + half];
        data[i] = a + b;
        data[i + half] = a - b;
      }
    }
  }
}

namespace detail {

inline void scale(std::span<complex> data, double s) {
  for (auto& v : data) v *= s;
}

inline double fourier_scale(int n) { return std::ldexp(1.0, -n / 2) * ((n & 1) ? 1.0 / std::numbers::sqrt2 : 1.0); }

}  // namespace detail

/// chi_y(x) = (-1)^{x.y} as a physical-side function.
inline CubeFunction character(CubeDim dim, PointIndex y) {
  if (!dim.contains(y)) throw std::out_of_range("character: y outside cube");
  CubeFunction f(dim);
  for (PointIndex x = 0; x < dim.size(); ++x) f[x] = character_sign(x, y);
  return f;
}

/// chi_y / 2^{n/2}, the orthonormal basis element.
inline CubeFunction normalized_character(CubeDim dim, PointIndex y) {
  CubeFunction f = character(dim, y);
  detail::scale(f.values(), detail::fourier_scale(dim.n()));
  return f;
}

/// fhat(y) = 2^{-n/2} sum_x f(x) chi_y(x).
inline CubeFunction fourier(CubeFunction f) {
  detail::require_side(f, Side::physical, "fourier");
  fwht_inplace(f.values());
  detail::scale(f.values(), detail::fourier_scale(f.n()));
  f.set_side(Side::spectral);
  return f;
}

/// f = sum_y F(y) chi~_y. The normalized transform is its own inverse.
inline CubeFunction inverse_fourier(CubeFunction F) {
  detail::require_side(F, Side::spectral, "inverse_fourier");
  fwht_inplace(F.values());
  detail::scale(F.values(), detail::fourier_scale(F.n()));
  F.set_side(Side::physical);
  return F;
}

/// (f*g)(x) = sum_y f(x^y) g(y), via pointwise product of unnormalized
/// transforms.
inline CubeFunction convolve(const CubeFunction& f, const CubeFunction& g) {
  detail::require_same_dim(f, g, "convolve");
  detail::require_side(f, Side::physical, "convolve");
  detail::require_side(g, Side::physical, "convolve");
  CubeFunction a = f;
  CubeFunction b = g;
  fwht_inplace(a.values());
  fwht_inplace(b.values());
  for (PointIndex y = 0; y < a.size(); ++y) a[y] *= b[y];
  fwht_inplace(a.values());
  detail::scale(a.values(), std::ldexp(1.0, -f.n()));
  return a;
}

// Norms and inner product (counting measure on the cube).

inline double norm_p(const CubeFunction& f, double p) {
  if (p < 1.0) throw std::invalid_argument("norm_p: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (const auto& v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

inline double norm2(const CubeFunction& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s);
}

inline double norm_inf(const CubeFunction& f) { return norm_p(f, std::numeric_limits<double>::infinity()); }

/// <f, g> = sum_x f(x) conj(g(x))
inline complex inner(const CubeFunction& f, const CubeFunction& g) {
  detail::require_same_dim(f, g, "inner");
  complex s = 0.0;
  for (PointIndex x = 0; x < f.size(); ++x) s += f[x] * std::conj(g[x]);
  return s;
}

inline double max_abs_diff(const CubeFunction& f, const CubeFunction& g) {
  detail::require_same_dim(f, g, "max_abs_diff");
  double m = 0.0;
  for (PointIndex x = 0; x < f.size(); ++x) m = std::max(m, std::abs(f[x] - g[x]));
  return m;
}

// JSON: { "n": int, "side": "physical"|"spectral", "re": [...], "im": [...] }

inline void to_json(nlohmann::json& j, const CubeFunction& f) {
  std::vector<double> re(f.size()), im(f.size());
  for (PointIndex x = 0; x < f.size(); ++x) {
    re[x] = f[x].real();
    im[x] = f[x].imag();
  }
  j = nlohmann::json{{"n", f.n()}, {"side", to_string(f.side())}, {"re", re}, {"im", im}};
}

inline CubeFunction cube_function_from_json(const nlohmann::json& j) {
  const CubeDim dim(j.at("n").get<int>());
  const std::string side = j.at("side").get<std::string>();
  if (side != "physical" && side != "spectral")
    throw std::invalid_argument("unknown side marker: " + side);
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) throw std::invalid_argument("re/im length mismatch");
  std::vector<complex> values(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) values[i] = {re[i], im[i]};
  return CubeFunction(dim, std::move(values), side == "physical" ? Side::physical : Side::spectral);
}

/// Splits [0, count) into contiguous chunks, one per worker. Each index is
/// visited exactly once; body must only write to slots it owns.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads <= 1 || count < 2048) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace cubevar

#endif  // CUBEVAR_CORE_HPP
