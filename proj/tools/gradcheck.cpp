#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "clothccd/pipeline.hpp"
#include "clothccd/response.hpp"
#include "clothccd/sim.hpp"

namespace clothccd::gradcheck {

namespace {

constexpr double kRelativeStep = 1e-6;

double relative_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]).squaredNorm();
    na += a[i].squaredNorm();
    nb += b[i].squaredNorm();
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

template <typename Loss>
std::vector<Vec3> central_differences(std::vector<Vec3> x, double h, Loss&& loss) {
  std::vector<Vec3> g(x.size(), Vec3::Zero());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 3; ++k) {
      const double saved = x[i][k];
      x[i][k] = saved + h;
      const double up = loss(x);
      x[i][k] = saved - h;
      const double down = loss(x);
      x[i][k] = saved;
      g[i][k] = (up - down) / (2.0 * h);
    }
  return g;
}

// Disjoint random triangles with random motions, so that self events
// appear without adjacency.
struct SoupFixture {
  Mesh mesh;
  std::vector<Vec3> start;
  std::vector<Vec3> end;
};

SoupFixture random_soup(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int triangles = 6;
  std::vector<Vec3> x;
  std::vector<Face> faces;
  for (int t = 0; t < triangles; ++t) {
    const Vec3 c(0.4 * unit(rng), 0.4 * unit(rng), 0.4 * unit(rng));
    const auto base = static_cast<Index>(x.size());
    for (int k = 0; k < 3; ++k) x.push_back(c + 0.5 * Vec3(unit(rng), unit(rng), unit(rng)));
    faces.push_back({base, static_cast<Index>(base + 1), static_cast<Index>(base + 2)});
  }
  std::vector<Vec3> end = x;
  for (Vec3& p : end) p += 0.6 * Vec3(unit(rng), unit(rng), unit(rng));
  return {Mesh(x, std::move(faces)), x, end};
}

}  // namespace

Summary check_ccd_loss(int fixtures, std::uint64_t seed, double epsilon) {
  std::mt19937_64 rng(seed);
  Summary s;
  SweepConfig cfg;
  cfg.kinds = KindSet::self_only();
  for (int attempt = 0; s.fixtures < fixtures && attempt < 100 * fixtures; ++attempt) {
    SoupFixture f = random_soup(rng);
    const MeshMotion motion(f.mesh, f.start, f.end);
    const std::vector<CollisionEvent> events = sweep(motion, {}, cfg);
    if (events.size() < 2) continue;
    const CcdLossReport analytic = ccd_loss(events, f.start, f.end, epsilon);
    const auto numeric = central_differences(f.end, kRelativeStep, [&](const std::vector<Vec3>& e) {
      return ccd_loss(events, f.start, e, epsilon).loss;
    });
    s.max_relative_error = std::max(s.max_relative_error, relative_error(analytic.gradient, numeric));
    s.events += events.size();
    ++s.fixtures;
  }
  return s;
}

Summary check_contact_loss(int fixtures, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Mesh sphere = make_icosphere(2);
  Summary s;
  for (int f = 0; f < fixtures; ++f) {
    const double radius = 0.5 + 0.5 * (unit(rng) + 1.0);
    const Vec3 center(unit(rng), unit(rng), unit(rng));
    std::vector<Vec3> collider;
    for (const Vec3& p : sphere.rest_positions()) collider.push_back(center + radius * p);
    std::vector<Vec3> cloth;
    while (cloth.size() < 32) {
      const Vec3 dir = Vec3(unit(rng), unit(rng), unit(rng)).normalized();
      const double r = radius * (1.0 + 0.3 * unit(rng));
      cloth.push_back(center + r * dir);
    }
    const ContactLossReport base = contact_loss(cloth, collider, sphere);
    // Keep every vertex clear of the penalty kink at zero depth.
    bool clear = true;
    for (std::size_t i = 0; i < cloth.size(); ++i) {
      const Face& face = sphere.faces()[base.nearest_face[i]];
      const Vec3 n = (collider[face[1]] - collider[face[0]])
                         .cross(collider[face[2]] - collider[face[0]])
                         .normalized();
      if (std::fabs((cloth[i] - collider[face[0]]).dot(n)) < 1e3 * kRelativeStep) clear = false;
    }
    if (!clear) {
      --f;
      continue;
    }
    const auto numeric = central_differences(cloth, kRelativeStep, [&](const std::vector<Vec3>& x) {
      return contact_loss_assigned(x, collider, sphere, base.nearest_face).loss;
    });
    s.max_relative_error = std::max(s.max_relative_error, relative_error(base.gradient, numeric));
    s.events += base.penetrating_vertex_count;
    ++s.fixtures;
  }
  return s;
}

}  // namespace clothccd::gradcheck
