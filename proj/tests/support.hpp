#pragma once

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the kernel under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "clothccd/geometry.hpp"

namespace clothccd::testing {

inline Vec3 mix(const Vec3& a, const Vec3& b, double t) { return (1.0 - t) * a + t * b; }

/// Point falling straight through the unit right triangle at t = 0.5.
struct CrossingFixture {
  Vec3 p0{0.25, 0.25, 1.0};
  Vec3 p1{0.25, 0.25, -1.0};
  std::array<Vec3, 3> tri{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
};

/// Cloth = one vertex; collider = the fixture triangle. Returned as
/// (cloth mesh, collider mesh, cloth start, cloth end, collider positions).
struct CrossingScene {
  Mesh cloth;
  Mesh collider;
  std::vector<Vec3> start;
  std::vector<Vec3> end;
  std::vector<Vec3> collider_x;
};

inline CrossingScene crossing_scene() {
  CrossingFixture f;
  // A lone cloth vertex: a far-away dummy triangle keeps the mesh valid
  // without touching anything.
  std::vector<Vec3> cloth{f.p0, Vec3(10, 10, 10), Vec3(11, 10, 10), Vec3(10, 11, 10)};
  std::vector<Vec3> end{f.p1, Vec3(10, 10, 10), Vec3(11, 10, 10), Vec3(10, 11, 10)};
  std::vector<Vec3> tri(f.tri.begin(), f.tri.end());
  return {Mesh(cloth, {{1, 2, 3}}), Mesh(tri, {{0, 1, 2}}), cloth, end, tri};
}

// ---------------------------------------------------------------- oracles

struct OracleResult {
  std::optional<double> t;
  /// The trial sits within the oracle's margin of a tangency, a triangle or
  /// segment boundary, or a parallel configuration, so its verdict is not
  /// trusted.
  bool grazing = false;
};

struct OracleConfig {
  int samples = 100000;
  /// Crossings whose inside test lands within this of a boundary are grazing.
  double boundary_margin = 1e-6;
  /// |f| below this fraction of its sampled maximum without a sign change
  /// marks a tangency.
  double tangency_margin = 1e-9;
};

// Bisection of a sign change of f on [lo, hi].
template <typename F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0) && fm != 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Scans f over [0, 1] and hands each zero (sign change or exact zero) to
// `accept(t, grazing)`, which says whether the zero is a contact. The first
// accepted zero is the result.
template <typename F, typename Accept>
OracleResult scan_crossings(F&& f, Accept&& accept, const OracleConfig& cfg) {
  OracleResult out;
  const int n = cfg.samples;
  double fmax = 0.0;
  std::vector<double> values(n + 1);
  for (int i = 0; i <= n; ++i) {
    values[i] = f(static_cast<double>(i) / n);
    fmax = std::max(fmax, std::fabs(values[i]));
  }
  if (fmax == 0.0) {
    out.grazing = true;  // coplanar for the whole step
    return out;
  }
  const double tiny = cfg.tangency_margin * fmax;
  auto same_sign = [&](int a, int b) { return (values[a] < 0) == (values[b] < 0); };
  auto local_min = [&](int i) {
    const double v = std::fabs(values[i]);
    if (i > 0 && (std::fabs(values[i - 1]) < v || !same_sign(i - 1, i))) return false;
    if (i < n && (std::fabs(values[i + 1]) < v || !same_sign(i, i + 1))) return false;
    return true;
  };
  for (int i = 0; i <= n; ++i) {
    const double t0 = static_cast<double>(i) / n;
    double root = -1.0;
    if (values[i] == 0.0) {
      root = t0;
    } else if (i < n && values[i + 1] != 0.0 && (values[i] < 0) != (values[i + 1] < 0)) {
      root = bisect(f, t0, static_cast<double>(i + 1) / n);
    } else if (std::fabs(values[i]) < tiny && local_min(i)) {
      // A near-touch without a sign change: the sampling cannot tell a
      // tangency from a missed double crossing.
      out.grazing = true;
      return out;
    }
    if (root < 0.0) continue;
    bool grazing = false;
    const bool hit = accept(root, grazing);
    if (grazing) {
      out.grazing = true;
      return out;
    }
    if (hit) {
      out.t = root;
      return out;
    }
  }
  return out;
}

/// Barycentric weights of p's projection with an independent formula
/// (solving the 2x2 normal equations).
inline std::optional<std::array<double, 3>> oracle_barycentric(const Vec3& p,
                                                               const std::array<Vec3, 3>& t) {
  const Vec3 e1 = t[1] - t[0], e2 = t[2] - t[0], r = p - t[0];
  const double a = e1.dot(e1), b = e1.dot(e2), c = e2.dot(e2);
  const double det = a * c - b * b;
  if (det <= 1e-18 * a * c) return std::nullopt;
  const double u = (c * r.dot(e1) - b * r.dot(e2)) / det;
  const double v = (a * r.dot(e2) - b * r.dot(e1)) / det;
  return std::array<double, 3>{1.0 - u - v, u, v};
}

inline OracleResult point_triangle_oracle(const Vec3& p0, const Vec3& p1,
                                          const std::array<Vec3, 3>& t0,
                                          const std::array<Vec3, 3>& t1,
                                          const OracleConfig& cfg = {}) {
  auto tri_at = [&](double t) {
    return std::array<Vec3, 3>{mix(t0[0], t1[0], t), mix(t0[1], t1[1], t), mix(t0[2], t1[2], t)};
  };
  auto f = [&](double t) {
    const auto tri = tri_at(t);
    return (mix(p0, p1, t) - tri[0]).dot((tri[1] - tri[0]).cross(tri[2] - tri[0]));
  };
  auto accept = [&](double t, bool& grazing) {
    const auto w = oracle_barycentric(mix(p0, p1, t), tri_at(t));
    if (!w) {
      grazing = true;
      return false;
    }
    const double lo = std::min({(*w)[0], (*w)[1], (*w)[2]});
    if (std::fabs(lo) < cfg.boundary_margin) grazing = true;
    return lo >= 0.0;
  };
  return scan_crossings(f, accept, cfg);
}

/// Intersection parameters of two coplanar, non-parallel lines.
inline std::optional<std::array<double, 2>> oracle_line_params(const Vec3& a0, const Vec3& a1,
                                                               const Vec3& b0, const Vec3& b1) {
  const Vec3 da = a1 - a0, db = b1 - b0, r = b0 - a0;
  const double aa = da.dot(da), ab = da.dot(db), bb = db.dot(db);
  const double det = aa * bb - ab * ab;
  if (det <= 1e-12 * aa * bb) return std::nullopt;
  const double s = (bb * r.dot(da) - ab * r.dot(db)) / det;
  const double u = (ab * r.dot(da) - aa * r.dot(db)) / det;
  return std::array<double, 2>{s, u};
}

inline OracleResult edge_edge_oracle(const std::array<Vec3, 2>& a0, const std::array<Vec3, 2>& a1,
                                     const std::array<Vec3, 2>& b0, const std::array<Vec3, 2>& b1,
                                     const OracleConfig& cfg = {}) {
  auto f = [&](double t) {
    const Vec3 pa = mix(a0[0], a1[0], t), qa = mix(a0[1], a1[1], t);
    const Vec3 pb = mix(b0[0], b1[0], t), qb = mix(b0[1], b1[1], t);
    return (qa - pa).cross(qb - pb).dot(pb - pa);
  };
  auto accept = [&](double t, bool& grazing) {
    const auto st = oracle_line_params(mix(a0[0], a1[0], t), mix(a0[1], a1[1], t),
                                       mix(b0[0], b1[0], t), mix(b0[1], b1[1], t));
    if (!st) {
      grazing = true;
      return false;
    }
    bool inside = true;
    for (double x : *st) {
      if (std::fabs(x) < cfg.boundary_margin || std::fabs(x - 1.0) < cfg.boundary_margin)
        grazing = true;
      if (x < 0.0 || x > 1.0) inside = false;
    }
    return inside;
  };
  return scan_crossings(f, accept, cfg);
}

// --------------------------------------------------------- random trials

struct PointTriangleTrial {
  Vec3 p0, p1;
  std::array<Vec3, 3> t0, t1;
};

struct EdgeEdgeTrial {
  std::array<Vec3, 2> a0, a1, b0, b1;
};

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

/// Half of the trials aim the point through the triangle's interior at a
/// random time so both hits and misses are well represented.
inline PointTriangleTrial random_point_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PointTriangleTrial t;
  for (int k = 0; k < 3; ++k) {
    t.t0[k] = random_vec(rng, 1.0);
    t.t1[k] = t.t0[k] + random_vec(rng, 0.5);
  }
  if (u01(rng) < 0.5) {
    const double tc = u01(rng);
    double w1 = u01(rng), w2 = u01(rng);
    if (w1 + w2 > 1.0) {
      w1 = 1.0 - w1;
      w2 = 1.0 - w2;
    }
    const std::array<Vec3, 3> tri{mix(t.t0[0], t.t1[0], tc), mix(t.t0[1], t.t1[1], tc),
                                  mix(t.t0[2], t.t1[2], tc)};
    const Vec3 target = (1.0 - w1 - w2) * tri[0] + w1 * tri[1] + w2 * tri[2];
    const Vec3 velocity = random_vec(rng, 2.0);
    t.p0 = target - tc * velocity;
    t.p1 = target + (1.0 - tc) * velocity;
  } else {
    t.p0 = random_vec(rng, 1.5);
    t.p1 = random_vec(rng, 1.5);
  }
  return t;
}

inline EdgeEdgeTrial random_edge_edge(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  EdgeEdgeTrial t;
  for (int k = 0; k < 2; ++k) {
    t.a0[k] = random_vec(rng, 1.0);
    t.a1[k] = t.a0[k] + random_vec(rng, 0.5);
  }
  if (u01(rng) < 0.5) {
    const double tc = u01(rng);
    const double s = u01(rng);
    const Vec3 contact = mix(mix(t.a0[0], t.a1[0], tc), mix(t.a0[1], t.a1[1], tc), s);
    const Vec3 dir = random_vec(rng, 1.0);
    const double u = u01(rng);
    const Vec3 b0c = contact - u * dir, b1c = contact + (1.0 - u) * dir;
    const Vec3 v0 = random_vec(rng, 1.5), v1 = random_vec(rng, 1.5);
    t.b0 = {b0c - tc * v0, b1c - tc * v1};
    t.b1 = {b0c + (1.0 - tc) * v0, b1c + (1.0 - tc) * v1};
  } else {
    for (int k = 0; k < 2; ++k) {
      t.b0[k] = random_vec(rng, 1.0);
      t.b1[k] = random_vec(rng, 1.0);
    }
  }
  return t;
}

/// Ray-parity containment: counts crossings of a fixed, generic ray
/// direction with the triangles.
inline bool ray_parity_inside(const Vec3& p, const std::vector<Vec3>& x,
                              const std::vector<Face>& faces) {
  const Vec3 dir = Vec3(0.5377, 0.8314, 0.1403).normalized();
  int crossings = 0;
  for (const Face& f : faces) {
    // Moller-Trumbore
    const Vec3 e1 = x[f[1]] - x[f[0]], e2 = x[f[2]] - x[f[0]];
    const Vec3 h = dir.cross(e2);
    const double a = e1.dot(h);
    if (std::fabs(a) < 1e-15) continue;
    const double inv = 1.0 / a;
    const Vec3 s = p - x[f[0]];
    const double u = inv * s.dot(h);
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = inv * dir.dot(q);
    if (v < 0.0 || u + v > 1.0) continue;
    if (inv * e2.dot(q) > 0.0) ++crossings;
  }
  return crossings % 2 == 1;
}

}  // namespace clothccd::testing
