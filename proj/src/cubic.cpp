#include "clothccd/cubic.hpp"

#include <algorithm>
#include <limits>

namespace clothccd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Bound on the rounding error of a Horner evaluation at t in [0, 1].
double horner_error_bound(const CubicPoly& p, double t) {
  const double at = std::fabs(t);
  return 8.0 * kEps *
         (((std::fabs(p.a) * at + std::fabs(p.b)) * at + std::fabs(p.c)) * at +
          std::fabs(p.d));
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Roots of A t^2 + B t + C strictly inside (0, 1), ascending.
int quadratic_roots_open_unit(double A, double B, double C, double out[2]) {
  int n = 0;
  auto keep = [&](double t) {
    if (t > 0.0 && t < 1.0) out[n++] = t;
  };
  if (A == 0.0) {
    if (B != 0.0) keep(-C / B);
    return n;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return 0;
  if (disc == 0.0) {
    keep(-B / (2.0 * A));
    return n;
  }
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  double r0 = q / A;
  double r1 = q != 0.0 ? C / q : -r0;
  if (r0 > r1) std::swap(r0, r1);
  keep(r0);
  keep(r1);
  return n;
}

// Single root of a monotone piece with f(lo), f(hi) of opposite sign.
double polish_root(const CubicPoly& p, double lo, double hi, double flo,
                   double tol) {
  double x = lo - flo * (hi - lo) / (p(hi) - flo);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = p(x);
    if (fx == 0.0) return x;
    if (sign(fx) == sign(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double dfx = p.derivative(x);
    double next = dfx != 0.0 ? x - fx / dfx : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= tol * 1e-3 || hi - lo <= tol) break;
  }
  return x;
}

}  // namespace

UnitRoots solve_cubic_unit_interval(const CubicPoly& poly, double tol) {
  UnitRoots out;
  const double scale = poly.scale();
  if (scale == 0.0) {
    out.identically_zero = true;
    return out;
  }

  CubicPoly p = poly;
  const double cutoff = kLeadingCoefficientCutoff * scale;
  if (std::fabs(p.a) < cutoff) {
    p.a = 0.0;
    if (std::fabs(p.b) < cutoff) {
      p.b = 0.0;
      if (std::fabs(p.c) < cutoff) p.c = 0.0;
    }
  }

  double critical[2];
  const int ncrit = quadratic_roots_open_unit(3.0 * p.a, 2.0 * p.b, p.c, critical);

  std::array<double, 4> knots{};
  int nknots = 0;
  knots[nknots++] = 0.0;
  for (int i = 0; i < ncrit; ++i) {
    if (critical[i] > knots[nknots - 1]) knots[nknots++] = critical[i];
  }
  knots[nknots++] = 1.0;

  std::array<double, 4> values{};
  std::array<bool, 4> zero{};
  for (int i = 0; i < nknots; ++i) {
    values[i] = p(knots[i]);
    zero[i] = std::fabs(values[i]) <= horner_error_bound(p, knots[i]);
  }

  auto push = [&](double t) {
    t = std::clamp(t, 0.0, 1.0);
    if (out.count > 0 && t - out.values[out.count - 1] <= kRootMergeDistance) return;
    if (out.count < 3) out.values[out.count++] = t;
  };

  for (int i = 0; i < nknots; ++i) {
    if (zero[i]) push(knots[i]);
    if (i + 1 < nknots && !zero[i] && !zero[i + 1] &&
        sign(values[i]) != sign(values[i + 1])) {
      push(polish_root(p, knots[i], knots[i + 1], values[i], tol));
    }
  }
  return out;
}

}  // namespace clothccd
