#include "clothccd/narrow_phase.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace clothccd {

namespace {

// A cubic whose coefficients are all below this fraction of the product of
// the input magnitudes is numerically identically zero: the primitives
// stay coplanar for the whole step.
constexpr double kCoplanarCutoff = 1e-13;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double point_segment_param(const Vec3& p, const Vec3& q0, const Vec3& q1) {
  const Vec3 d = q1 - q0;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return 0.0;
  return clamp01((p - q0).dot(d) / len2);
}

int dominant_axis(const Vec3& n) {
  int axis = 0;
  n.cwiseAbs().maxCoeff(&axis);
  return axis;
}

Eigen::Vector2d drop_axis(const Vec3& v, int axis) {
  switch (axis) {
    case 0: return {v.y(), v.z()};
    case 1: return {v.z(), v.x()};
    default: return {v.x(), v.y()};
  }
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Times in [0, 1] at which moving point P is collinear with moving points
// A and B in the projection dropping `axis`.
void collinear_times(const Vec3& p0, const Vec3& p1, const Vec3& a0, const Vec3& a1,
                     const Vec3& b0, const Vec3& b1, int axis, double root_tol,
                     std::vector<double>& out) {
  const Eigen::Vector2d u0 = drop_axis(a0 - p0, axis);
  const Eigen::Vector2d du = drop_axis(a1 - p1, axis) - u0;
  const Eigen::Vector2d w0 = drop_axis(b0 - p0, axis);
  const Eigen::Vector2d dw = drop_axis(b1 - p1, axis) - w0;
  const CubicPoly g{0.0, cross2(du, dw), cross2(u0, dw) + cross2(du, w0), cross2(u0, w0)};
  const UnitRoots r = solve_cubic_unit_interval(g, root_tol);
  out.insert(out.end(), r.roots().begin(), r.roots().end());
}

void sort_unique(std::vector<double>& ts) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
}

double max_edge_length(const Triangle& t) {
  return std::max({(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()});
}

// Inside test at one instant: coplanar within tolerance and barycentric
// weights above -tol.
std::optional<std::array<double, 3>> point_in_triangle(const Vec3& p, const Triangle& tri,
                                                      double tol) {
  const auto w = barycentric(p, tri);
  if (!w) return std::nullopt;
  if (std::min({(*w)[0], (*w)[1], (*w)[2]}) < -tol) return std::nullopt;
  const Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalized();
  if (std::fabs((p - tri[0]).dot(n)) > tol * max_edge_length(tri)) return std::nullopt;
  return w;
}

std::optional<NarrowPhaseHit> segments_touch(const Segment& a, const Segment& b, double t,
                                             double tol) {
  const SegmentClosest c = closest_segment_points(a[0], a[1], b[0], b[1]);
  const double scale = std::max((a[1] - a[0]).norm(), (b[1] - b[0]).norm());
  if (scale == 0.0) return std::nullopt;
  const double limit = tol * scale;
  if (c.distance_sq > limit * limit) return std::nullopt;
  return NarrowPhaseHit{t, {c.s, c.u, 0.0}};
}

std::optional<NarrowPhaseHit> coplanar_point_triangle(const Vec3& p0, const Vec3& p1,
                                                      const Triangle& t0, const Triangle& t1,
                                                      const KernelTolerances& tol) {
  Vec3 n = Vec3::Zero();
  for (double s : {0.0, 0.5, 1.0}) {
    const Triangle tri = lerp(t0, t1, s);
    const Vec3 ns = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    if (ns.squaredNorm() > n.squaredNorm()) n = ns;
  }
  if (n.squaredNorm() == 0.0) return std::nullopt;
  const int axis = dominant_axis(n);

  std::vector<double> times{0.0, 1.0};
  for (int k = 0; k < 3; ++k) {
    const int j = (k + 1) % 3;
    collinear_times(p0, p1, t0[k], t1[k], t0[j], t1[j], axis, tol.root, times);
  }
  sort_unique(times);
  for (double t : times) {
    if (auto w = point_in_triangle(lerp(p0, p1, t), lerp(t0, t1, t), tol.inside)) {
      return NarrowPhaseHit{t, *w};
    }
  }
  return std::nullopt;
}

std::optional<NarrowPhaseHit> coplanar_edge_edge(const Segment& a0, const Segment& a1,
                                                 const Segment& b0, const Segment& b1,
                                                 const KernelTolerances& tol) {
  Vec3 n = Vec3::Zero();
  Vec3 dir = Vec3::Zero();
  for (double s : {0.0, 0.5, 1.0}) {
    const Segment a = lerp(a0, a1, s);
    const Segment b = lerp(b0, b1, s);
    const Vec3 ea = a[1] - a[0];
    const Vec3 eb = b[1] - b[0];
    for (const Vec3& cand : {ea.cross(eb), ea.cross(b[0] - a[0]), eb.cross(b[0] - a[0])}) {
      if (cand.squaredNorm() > n.squaredNorm()) n = cand;
    }
    for (const Vec3& cand : {ea, eb}) {
      if (cand.squaredNorm() > dir.squaredNorm()) dir = cand;
    }
  }

  std::vector<double> times{0.0, 1.0};
  if (n.squaredNorm() > 0.0) {
    const int axis = dominant_axis(n);
    for (int k = 0; k < 2; ++k) {
      collinear_times(a0[k], a1[k], b0[0], b1[0], b0[1], b1[1], axis, tol.root, times);
      collinear_times(b0[k], b1[k], a0[0], a1[0], a0[1], a1[1], axis, tol.root, times);
    }
  }
  if (dir.squaredNorm() > 0.0) {
    // endpoint coincidences along the common direction cover collinear motion
    const int axis = dominant_axis(dir);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double d0 = a0[i][axis] - b0[j][axis];
        const double d1 = a1[i][axis] - b1[j][axis];
        if (d0 != d1) {
          const double t = d0 / (d0 - d1);
          if (t >= 0.0 && t <= 1.0) times.push_back(t);
        }
      }
    }
  }
  sort_unique(times);
  for (double t : times) {
    if (auto hit = segments_touch(lerp(a0, a1, t), lerp(b0, b1, t), t, tol.inside)) return hit;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::array<double, 3>> barycentric(const Vec3& p, const Triangle& tri) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 n = e1.cross(e2);
  const double nn = n.squaredNorm();
  const double ref = e1.squaredNorm() * e2.squaredNorm();
  if (ref == 0.0 || nn <= 1e-20 * ref) return std::nullopt;
  const Vec3 r = p - tri[0];
  const double w1 = r.cross(e2).dot(n) / nn;
  const double w2 = e1.cross(r).dot(n) / nn;
  return std::array<double, 3>{1.0 - w1 - w2, w1, w2};
}

SegmentClosest closest_segment_points(const Vec3& p0, const Vec3& p1, const Vec3& q0,
                                      const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  SegmentClosest out;
  auto finish = [&](double s, double u) {
    out.s = s;
    out.u = u;
    out.distance_sq = ((p0 + s * d1) - (q0 + u * d2)).squaredNorm();
    return out;
  };
  if (a == 0.0 && e == 0.0) return finish(0.0, 0.0);
  if (a == 0.0) return finish(0.0, clamp01(f / e));
  const double c = d1.dot(r);
  if (e == 0.0) return finish(clamp01(-c / a), 0.0);

  const double b = d1.dot(d2);
  const double denom = a * e - b * b;
  if (denom > 1e-14 * a * e) {
    double s = clamp01((b * f - c * e) / denom);
    double u = (b * s + f) / e;
    if (u < 0.0) {
      u = 0.0;
      s = clamp01(-c / a);
    } else if (u > 1.0) {
      u = 1.0;
      s = clamp01((b - c) / a);
    }
    return finish(s, u);
  }

  // Parallel: the minimum is attained at an endpoint of one of the segments.
  SegmentClosest best;
  best.distance_sq = std::numeric_limits<double>::infinity();
  const std::array<std::pair<double, double>, 4> cands{{
      {0.0, point_segment_param(p0, q0, q1)},
      {1.0, point_segment_param(p1, q0, q1)},
      {point_segment_param(q0, p0, p1), 0.0},
      {point_segment_param(q1, p0, p1), 1.0},
  }};
  for (const auto& [s, u] : cands) {
    SegmentClosest c2 = finish(s, u);
    if (c2.distance_sq < best.distance_sq) best = c2;
  }
  return best;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri) {
  const Vec3& a = tri[0];
  const Vec3& b = tri[1];
  const Vec3& c = tri[2];
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

CubicPoly point_triangle_cubic(const Vec3& p_start, const Vec3& p_end,
                               const Triangle& tri_start, const Triangle& tri_end) {
  const Vec3 x0 = p_start - tri_start[0];
  const Vec3 dx = (p_end - tri_end[0]) - x0;
  const Vec3 e10 = tri_start[1] - tri_start[0];
  const Vec3 de1 = (tri_end[1] - tri_end[0]) - e10;
  const Vec3 e20 = tri_start[2] - tri_start[0];
  const Vec3 de2 = (tri_end[2] - tri_end[0]) - e20;
  const Vec3 A = e10.cross(e20);
  const Vec3 B = e10.cross(de2) + de1.cross(e20);
  const Vec3 C = de1.cross(de2);
  return {dx.dot(C), x0.dot(C) + dx.dot(B), x0.dot(B) + dx.dot(A), x0.dot(A)};
}

CubicPoly edge_edge_cubic(const Segment& a_start, const Segment& a_end,
                          const Segment& b_start, const Segment& b_end) {
  const Vec3 ea0 = a_start[1] - a_start[0];
  const Vec3 dea = (a_end[1] - a_end[0]) - ea0;
  const Vec3 eb0 = b_start[1] - b_start[0];
  const Vec3 deb = (b_end[1] - b_end[0]) - eb0;
  const Vec3 r0 = b_start[0] - a_start[0];
  const Vec3 dr = (b_end[0] - a_end[0]) - r0;
  const Vec3 A = ea0.cross(eb0);
  const Vec3 B = ea0.cross(deb) + dea.cross(eb0);
  const Vec3 C = dea.cross(deb);
  return {C.dot(dr), C.dot(r0) + B.dot(dr), B.dot(r0) + A.dot(dr), A.dot(r0)};
}

std::optional<NarrowPhaseHit> point_triangle_ccd(const Vec3& p_start, const Vec3& p_end,
                                                 const Triangle& tri_start,
                                                 const Triangle& tri_end,
                                                 const KernelTolerances& tol) {
  const CubicPoly poly = point_triangle_cubic(p_start, p_end, tri_start, tri_end);
  const Vec3 x0 = p_start - tri_start[0];
  const Vec3 x1 = p_end - tri_end[0];
  const double magnitude =
      std::max(x0.norm(), x1.norm()) *
      std::max((tri_start[1] - tri_start[0]).norm(), (tri_end[1] - tri_end[0]).norm()) *
      std::max((tri_start[2] - tri_start[0]).norm(), (tri_end[2] - tri_end[0]).norm());
  if (poly.scale() <= kCoplanarCutoff * magnitude) {
    return coplanar_point_triangle(p_start, p_end, tri_start, tri_end, tol);
  }
  const UnitRoots roots = solve_cubic_unit_interval(poly, tol.root);
  for (double t : roots.roots()) {
    if (auto w = point_in_triangle(lerp(p_start, p_end, t), lerp(tri_start, tri_end, t),
                                   tol.inside)) {
      return NarrowPhaseHit{t, *w};
    }
  }
  return std::nullopt;
}

std::optional<NarrowPhaseHit> edge_edge_ccd(const Segment& a_start, const Segment& a_end,
                                            const Segment& b_start, const Segment& b_end,
                                            const KernelTolerances& tol) {
  const CubicPoly poly = edge_edge_cubic(a_start, a_end, b_start, b_end);
  const double magnitude =
      std::max((a_start[1] - a_start[0]).norm(), (a_end[1] - a_end[0]).norm()) *
      std::max((b_start[1] - b_start[0]).norm(), (b_end[1] - b_end[0]).norm()) *
      std::max((b_start[0] - a_start[0]).norm(), (b_end[0] - a_end[0]).norm());
  if (poly.scale() <= kCoplanarCutoff * magnitude) {
    return coplanar_edge_edge(a_start, a_end, b_start, b_end, tol);
  }
  const UnitRoots roots = solve_cubic_unit_interval(poly, tol.root);
  for (double t : roots.roots()) {
    if (auto hit = segments_touch(lerp(a_start, a_end, t), lerp(b_start, b_end, t), t,
                                  tol.inside)) {
      return hit;
    }
  }
  return std::nullopt;
}

}  // namespace clothccd
