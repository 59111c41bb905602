#pragma once

#include <array>
#include <cmath>
#include <span>

namespace clothccd {

/// P(t) = a t^3 + b t^2 + c t + d.
struct CubicPoly {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double t) const { return ((a * t + b) * t + c) * t + d; }
  double derivative(double t) const { return (3.0 * a * t + 2.0 * b) * t + c; }
  /// Largest coefficient magnitude.
  double scale() const {
    return std::fmax(std::fmax(std::fabs(a), std::fabs(b)),
                     std::fmax(std::fabs(c), std::fabs(d)));
  }
};

/// Real roots of a cubic inside the closed unit interval, ascending.
struct UnitRoots {
  std::array<double, 3> values{};
  int count = 0;
  /// Set when every coefficient is zero; `count` is 0 in that case.
  bool identically_zero = false;

  std::span<const double> roots() const {
    return std::span<const double>(values.data(), static_cast<std::size_t>(count));
  }
};

inline constexpr double kDefaultRootTolerance = 1e-10;
/// Leading coefficients below this fraction of P's scale are dropped,
/// demoting the cubic to a quadratic (and a quadratic to a linear).
inline constexpr double kLeadingCoefficientCutoff = 1e-12;
/// Roots closer than this are reported once.
inline constexpr double kRootMergeDistance = 1e-9;

/// Finds every root of `poly` in [0, 1].
///
/// The critical points of P (roots of P') split [0, 1] into monotone
/// pieces. A piece contains a root only if P changes sign across it, and
/// then exactly one, which is polished by Newton iteration safeguarded by
/// bisection until the step falls below `tol`. Piece boundaries where P
/// vanishes to working precision (tangencies, roots at 0 or 1) are
/// reported directly.
UnitRoots solve_cubic_unit_interval(const CubicPoly& poly,
                                    double tol = kDefaultRootTolerance);

}  // namespace clothccd
