#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cubevar/core.hpp"
#include "cubevar/format.hpp"
#include "cubevar/random.hpp"
#include "oracles.hpp"

using namespace cubevar;

namespace {

CubeFunction random_function(int n, std::uint64_t seed) {
  Rng rng(seed);
  CubeFunction f{CubeDim(n)};
  for (auto& v : f.values()) v = rng.complex_normal();
  return f;
}

std::vector<oracle::cd> as_vector(const CubeFunction& f) { return {f.values().begin(), f.values().end()}; }

double max_diff(const CubeFunction& f, const std::vector<oracle::cd>& g) {
  double m = 0.0;
  for (PointIndex x = 0; x < f.size(); ++x) m = std::max(m, std::abs(f[x] - g[x]));
  return m;
}

}  // namespace

TEST(CubeDim, RejectsOutOfRange) {
  EXPECT_THROW(CubeDim(0), std::invalid_argument);
  EXPECT_THROW(CubeDim(kMaxDim + 1), std::invalid_argument);
  const CubeDim d(5);
  EXPECT_EQ(d.size(), 32u);
  EXPECT_EQ(d.ones(), 31u);
  EXPECT_FALSE(d.contains(32));
}

TEST(CubeFunction, SizeMismatchThrows) {
  EXPECT_THROW(CubeFunction(CubeDim(3), std::vector<complex>(7)), std::invalid_argument);
}

TEST(Fourier, MatchesDirectSum) {
  for (int n = 1; n <= 8; ++n) {
    const CubeFunction f = random_function(n, 100 + n);
    EXPECT_LT(max_diff(fourier(f), oracle::fourier(as_vector(f))), 1e-12) << "n=" << n;
  }
}

TEST(Fourier, SelfInverseAndParseval) {
  for (int n : {1, 2, 5, 9, 12}) {
    const CubeFunction f = random_function(n, n);
    const CubeFunction F = fourier(f);
    EXPECT_EQ(F.side(), Side::spectral);
    EXPECT_NEAR(norm2(F), norm2(f), 1e-10 * norm2(f));
    EXPECT_LT(max_abs_diff(inverse_fourier(F), f), 1e-12);
  }
}

TEST(Fourier, SideIsEnforced) {
  const CubeFunction f = random_function(3, 1);
  EXPECT_THROW(inverse_fourier(f), std::invalid_argument);
  EXPECT_THROW(fourier(fourier(f)), std::invalid_argument);
}

TEST(Fourier, CharacterGoesToScaledDelta) {
  const CubeDim d(6);
  for (PointIndex y : {0u, 1u, 21u, 63u}) {
    const CubeFunction F = fourier(normalized_character(d, y));
    EXPECT_LT(max_abs_diff(F, CubeFunction::delta(d, y, Side::spectral)), 1e-13);
  }
}

TEST(Convolve, MatchesDirectSum) {
  for (int n = 1; n <= 7; ++n) {
    const CubeFunction f = random_function(n, 7 * n), g = random_function(n, 7 * n + 1);
    EXPECT_LT(max_diff(convolve(f, g), oracle::convolve(as_vector(f), as_vector(g))), 1e-11) << "n=" << n;
  }
  EXPECT_THROW(convolve(random_function(3, 0), random_function(4, 0)), std::invalid_argument);
}

TEST(Norms, Basic) {
  const CubeFunction one = CubeFunction::constant(CubeDim(4), 1.0);
  EXPECT_DOUBLE_EQ(norm_p(one, 1.0), 16.0);
  EXPECT_DOUBLE_EQ(norm2(one), 4.0);
  EXPECT_DOUBLE_EQ(norm_inf(one), 1.0);
  EXPECT_THROW(norm_p(one, 0.5), std::invalid_argument);
}

TEST(Json, RoundTrip) {
  const CubeFunction f = fourier(random_function(4, 9));
  const nlohmann::json j = f;
  const CubeFunction g = cube_function_from_json(j);
  EXPECT_EQ(g.side(), Side::spectral);
  EXPECT_EQ(max_abs_diff(f, g), 0.0);
}

TEST(Rng, Deterministic) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(Rng(42)(), Rng(43)());
  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    const auto k = u.uniform_int(-3, 3);
    EXPECT_GE(k, -3);
    EXPECT_LE(k, 3);
  }
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(-1.0 / 3.0), "-0.3333333333333333");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(5000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Rng, GoldenStream) {
  EXPECT_EQ(SplitMix64(0).next(), 0xe220a8397b1dcdafULL);
  Rng g(42);
  EXPECT_EQ(g(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(g(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(g(), 0xae17533239e499a1ULL);
}
