#include <gtest/gtest.h>

#include <random>

#include "clothccd/cubic.hpp"

using namespace clothccd;

namespace {

CubicPoly from_roots(double a, double r0, double r1, double r2) {
  return {a, -a * (r0 + r1 + r2), a * (r0 * r1 + r0 * r2 + r1 * r2), -a * r0 * r1 * r2};
}

}  // namespace

TEST(Cubic, ThreeRoots) {
  const auto r = solve_cubic_unit_interval(from_roots(1.0, 0.2, 0.5, 0.9));
  ASSERT_EQ(r.count, 3);
  EXPECT_NEAR(r.values[0], 0.2, 1e-12);
  EXPECT_NEAR(r.values[1], 0.5, 1e-12);
  EXPECT_NEAR(r.values[2], 0.9, 1e-12);
}

TEST(Cubic, LinearFallback) {
  const auto r = solve_cubic_unit_interval({0.0, 0.0, 1.0, -0.5});
  ASSERT_EQ(r.count, 1);
  EXPECT_DOUBLE_EQ(r.values[0], 0.5);
}

TEST(Cubic, QuadraticFallback) {
  // (t - 0.25)(t - 0.75)
  const auto r = solve_cubic_unit_interval({0.0, 1.0, -1.0, 0.1875});
  ASSERT_EQ(r.count, 2);
  EXPECT_NEAR(r.values[0], 0.25, 1e-12);
  EXPECT_NEAR(r.values[1], 0.75, 1e-12);
}

TEST(Cubic, RootOutsideInterval) {
  EXPECT_EQ(solve_cubic_unit_interval({1.0, 0.0, 0.0, 1.0}).count, 0);
}

TEST(Cubic, EndpointsAreReportable) {
  const auto r = solve_cubic_unit_interval(from_roots(2.0, 0.0, 1.0, 3.0));
  ASSERT_EQ(r.count, 2);
  EXPECT_EQ(r.values[0], 0.0);
  EXPECT_NEAR(r.values[1], 1.0, 1e-12);
}

TEST(Cubic, IdenticallyZero) {
  const auto r = solve_cubic_unit_interval({0.0, 0.0, 0.0, 0.0});
  EXPECT_TRUE(r.identically_zero);
}

TEST(Cubic, DoubleRootCountedOnce) {
  const auto r = solve_cubic_unit_interval(from_roots(1.0, 0.4, 0.4, 2.0));
  ASSERT_EQ(r.count, 1);
  EXPECT_NEAR(r.values[0], 0.4, 1e-6);
}

TEST(CubicProperty, CompletenessOnSeparatedRoots) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::array<double, 3> r{u(rng), u(rng), u(rng)};
    std::sort(r.begin(), r.end());
    if (r[1] - r[0] <= 1e-3 || r[2] - r[1] <= 1e-3) continue;
    const double a = u(rng) < 0.5 ? -(0.1 + 5 * u(rng)) : 0.1 + 5 * u(rng);
    const auto got = solve_cubic_unit_interval(from_roots(a, r[0], r[1], r[2]));
    ASSERT_EQ(got.count, 3) << r[0] << " " << r[1] << " " << r[2];
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(got.values[k], r[k], 1e-9);
  }
}

TEST(CubicProperty, AtMostOneRootPerMonotoneInterval) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const CubicPoly p{n(rng), n(rng), n(rng), n(rng)};
    const auto r = solve_cubic_unit_interval(p);
    for (int k = 0; k + 1 < r.count; ++k) {
      ASSERT_LT(r.values[k], r.values[k + 1]);
      // A sign change of P' lies strictly between consecutive roots.
      const double lo = p.derivative(r.values[k]), hi = p.derivative(r.values[k + 1]);
      bool turning = (lo < 0) != (hi < 0) || lo == 0.0 || hi == 0.0;
      for (int s = 1; s < 64 && !turning; ++s) {
        const double t = r.values[k] + (r.values[k + 1] - r.values[k]) * s / 64.0;
        turning = (p.derivative(t) < 0) != (lo < 0);
      }
      EXPECT_TRUE(turning);
    }
    for (int k = 0; k < r.count; ++k) {
      EXPECT_GE(r.values[k], 0.0);
      EXPECT_LE(r.values[k], 1.0);
    }
  }
}
