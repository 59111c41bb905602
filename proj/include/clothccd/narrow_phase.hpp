#pragma once

#include <array>
#include <optional>

#include "clothccd/cubic.hpp"
#include "clothccd/geometry.hpp"

namespace clothccd {

struct KernelTolerances {
  /// Newton convergence in normalized time.
  double root = kDefaultRootTolerance;
  /// Barycentric / segment-parameter slack, and the relative distance
  /// accepted as touching.
  double inside = 1e-8;
};

/// Time of impact in [0, 1] plus contact parameters. For point-triangle
/// hits `params` holds the barycentric weights of the three triangle
/// vertices (summing to 1); for edge-edge hits it holds (s, u, 0), the
/// closest-point parameters along edge A and edge B.
struct NarrowPhaseHit {
  double t_c = 0.0;
  std::array<double, 3> params{};
};

using Triangle = std::array<Vec3, 3>;
using Segment = std::array<Vec3, 2>;

/// Coplanarity cubic of a point and a triangle moving linearly over [0, 1]:
/// (p(t) - v0(t)) . ((v1(t) - v0(t)) x (v2(t) - v0(t))).
CubicPoly point_triangle_cubic(const Vec3& p_start, const Vec3& p_end,
                               const Triangle& tri_start, const Triangle& tri_end);

/// Coplanarity cubic of two segments moving linearly over [0, 1]:
/// ((a1 - a0) x (b1 - b0)) . (b0 - a0).
CubicPoly edge_edge_cubic(const Segment& a_start, const Segment& a_end,
                          const Segment& b_start, const Segment& b_end);

/// Earliest time in [0, 1] at which the moving point lies in the moving
/// triangle, or nullopt. Roots at which the triangle is degenerate are
/// skipped.
std::optional<NarrowPhaseHit> point_triangle_ccd(const Vec3& p_start, const Vec3& p_end,
                                                 const Triangle& tri_start,
                                                 const Triangle& tri_end,
                                                 const KernelTolerances& tol = {});

/// Earliest time in [0, 1] at which the two moving segments touch, or
/// nullopt. Segments sharing an endpoint report t_c = 0.
std::optional<NarrowPhaseHit> edge_edge_ccd(const Segment& a_start, const Segment& a_end,
                                            const Segment& b_start, const Segment& b_end,
                                            const KernelTolerances& tol = {});

/// Barycentric weights of the projection of p onto the triangle's plane,
/// or nullopt for a degenerate triangle.
std::optional<std::array<double, 3>> barycentric(const Vec3& p, const Triangle& tri);

/// Closest-point parameters (s, u) of segments [p0, p1] and [q0, q1],
/// clamped to [0, 1], and the squared distance between those points.
/// Parallel segments are resolved by testing every endpoint against the
/// other segment.
struct SegmentClosest {
  double s = 0.0;
  double u = 0.0;
  double distance_sq = 0.0;
};
SegmentClosest closest_segment_points(const Vec3& p0, const Vec3& p1,
                                      const Vec3& q0, const Vec3& q1);

/// Closest point on a triangle to p (Voronoi-region walk).
Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri);

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + t * (b - a); }

template <std::size_t N>
std::array<Vec3, N> lerp(const std::array<Vec3, N>& a, const std::array<Vec3, N>& b, double t) {
  std::array<Vec3, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = lerp(a[i], b[i], t);
  return out;
}

}  // namespace clothccd
