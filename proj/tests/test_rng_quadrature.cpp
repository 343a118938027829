#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nia/quadrature.hpp"
#include "nia/rng.hpp"

using namespace nia;

TEST(SplitMix, MatchesSequentialGenerator) {
  // Reference SplitMix64 (Vigna): state += golden; return mix(state).
  std::uint64_t state = 1234567;
  auto next = [&] {
    state += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state);
  };
  EXPECT_EQ(next(), 6457827717110365317ULL);
  EXPECT_EQ(next(), 3203168211198807973ULL);
}

TEST(CounterStream, RandomAccessAndIndependence) {
  const CounterStream a(5, 1), b(5, 2), c(6, 1);
  EXPECT_EQ(a.bits(10), CounterStream(5, 1).bits(10));
  EXPECT_NE(a.bits(10), b.bits(10));
  EXPECT_NE(a.bits(10), c.bits(10));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(i);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(CounterStream, NormalMoments) {
  const CounterStream s(99, stream_tag::kLatent);
  const int n = 400000;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal(i);
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(NormalQuantile, ReferenceValues) {
  // scipy.stats.norm.ppf
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-15);
  EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-15);
  EXPECT_NEAR(normal_quantile(0.8), 0.8416212335729143, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-13);
  EXPECT_NEAR(normal_quantile(1e-300), -37.0470962993612, 1e-11);
  EXPECT_NEAR(normal_quantile(0.999), 3.090232306167813, 1e-14);
}

TEST(NormalQuantile, InvertsErfc) {
  for (double p : {1e-8, 0.001, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999999}) {
    const double x = normal_quantile(p);
    EXPECT_NEAR(0.5 * std::erfc(-x / std::sqrt(2.0)), p, 1e-14 * std::max(1.0, p / 1e-8));
  }
}

TEST(GaussHermite, MomentsAndWeights) {
  for (std::size_t n : {1, 5, 20, 200}) {
    const GaussHermiteRule r(n);
    double sum = 0.0;
    for (double w : r.weights()) sum += w;
    EXPECT_NEAR(sum, std::sqrt(std::numbers::pi), 1e-12) << n;
    if (n >= 3) {
      EXPECT_NEAR(r.expect_normal([](double x) { return x * x; }), 1.0, 1e-12);
      EXPECT_NEAR(r.expect_normal([](double x) { return x * x * x * x; }), 3.0, 1e-11);
      EXPECT_NEAR(r.expect_normal([](double x) { return x * x; }, 2.5), 2.5, 1e-12);
    }
  }
  EXPECT_THROW(GaussHermiteRule(0), InvalidDimension);
}

TEST(GaussHermite, SmoothNonPolynomialIntegrand) {
  // E[cos X] = exp(-1/2) for X ~ N(0,1).
  const GaussHermiteRule r(200);
  EXPECT_NEAR(r.expect_normal([](double x) { return std::cos(x); }), std::exp(-0.5), 1e-14);
  EXPECT_NEAR(r.expect_normal2([](double x, double y) { return x * x * y * y; }, 2.0, 3.0), 6.0, 1e-11);
}

TEST(GaussHermite, NodesSymmetric) {
  const GaussHermiteRule r(7);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(r.nodes()[i], -r.nodes()[6 - i], 1e-14);
    EXPECT_NEAR(r.weights()[i], r.weights()[6 - i], 1e-15);
  }
}
