#include "clothccd/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace clothccd {

namespace {

Vec3 position(int mesh, Index v, bool at_end, std::span<const Vec3> cloth,
              std::span<const MeshMotion> colliders) {
  if (mesh == kClothTag) return cloth[v];
  if (mesh < 0 || static_cast<std::size_t>(mesh) >= colliders.size())
    throw Error("ccd loss: event references collider " + std::to_string(mesh) +
                " but no such collider motion was supplied");
  return at_end ? colliders[mesh].end()[v] : colliders[mesh].start()[v];
}

void check_index(int mesh, Index v, std::size_t cloth_size) {
  if (mesh == kClothTag && (v < 0 || static_cast<std::size_t>(v) >= cloth_size))
    throw Error("ccd loss: event references cloth vertex " + std::to_string(v) + " of " +
                std::to_string(cloth_size));
}

}  // namespace

SafeCorrection safe_position(const Vec3& x_start, const Vec3& x_end, double t_c,
                             double epsilon) {
  SafeCorrection out;
  out.t_safe = std::max(0.0, t_c - epsilon);
  out.x_safe = x_start + out.t_safe * (x_end - x_start);
  return out;
}

CcdLossReport ccd_loss(std::span<const CollisionEvent> events, std::span<const Vec3> start,
                       std::span<const Vec3> end, double epsilon,
                       std::span<const MeshMotion> colliders) {
  if (start.size() != end.size())
    throw Error("ccd loss: start has " + std::to_string(start.size()) + " vertices, end has " +
                std::to_string(end.size()));
  CcdLossReport out;
  out.gradient.assign(end.size(), Vec3::Zero());
  out.event_count = events.size();
  if (events.empty()) return out;

  const double inv_events = 1.0 / static_cast<double>(events.size());
  out.event_terms.reserve(events.size());
  for (const CollisionEvent& e : events) {
    const double t_safe = std::max(0.0, e.t_c - epsilon);
    const double w = (1.0 - t_safe) * (1.0 - t_safe);
    const double inv_count = 1.0 / static_cast<double>(e.a.size + e.b.size);
    double term = 0.0;
    auto visit = [&](int mesh, const IndexTuple& tuple) {
      for (Index v : tuple.indices()) {
        check_index(mesh, v, end.size());
        const Vec3 d = position(mesh, v, true, end, colliders) -
                       position(mesh, v, false, start, colliders);
        // |x_end - x_safe|^2 = (1 - t_safe)^2 |x_end - x_start|^2
        term += w * d.squaredNorm();
        if (mesh == kClothTag) out.gradient[v] += (inv_events * inv_count * 2.0 * w) * d;
      }
    };
    visit(e.mesh_a, e.a);
    visit(e.mesh_b, e.b);
    term *= inv_count;
    out.event_terms.push_back(term);
    out.loss += term;
  }
  out.loss *= inv_events;
  return out;
}

MseLossReport mse_loss(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size())
    throw Error("mse loss: prediction has " + std::to_string(pred.size()) +
                " vertices, ground truth has " + std::to_string(gt.size()));
  MseLossReport out;
  out.gradient.assign(pred.size(), Vec3::Zero());
  if (pred.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 d = pred[i] - gt[i];
    out.loss += d.squaredNorm();
    out.gradient[i] = 2.0 * inv_n * d;
  }
  out.loss *= inv_n;
  return out;
}

ContactLossReport contact_loss_assigned(std::span<const Vec3> cloth,
                                        std::span<const Vec3> collider,
                                        const Mesh& collider_mesh,
                                        std::span<const Index> nearest_face, double stiffness) {
  if (collider_mesh.face_count() == 0) throw Error("contact loss: collider has no faces");
  if (collider.size() != collider_mesh.vertex_count())
    throw Error("contact loss: collider frame has " + std::to_string(collider.size()) +
                " vertices, mesh has " + std::to_string(collider_mesh.vertex_count()));
  if (nearest_face.size() != cloth.size())
    throw Error("contact loss: face assignment does not match the cloth vertex count");
  ContactLossReport out;
  out.gradient.assign(cloth.size(), Vec3::Zero());
  out.nearest_face.assign(nearest_face.begin(), nearest_face.end());
  if (cloth.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(cloth.size());
  for (std::size_t i = 0; i < cloth.size(); ++i) {
    const Face& f = collider_mesh.faces()[nearest_face[i]];
    const Vec3 n = (collider[f[1]] - collider[f[0]]).cross(collider[f[2]] - collider[f[0]]);
    const double len = n.norm();
    if (len == 0.0) continue;
    const Vec3 n_hat = n / len;
    const double depth = std::max(0.0, -(cloth[i] - collider[f[0]]).dot(n_hat));
    if (depth <= 0.0) continue;
    ++out.penetrating_vertex_count;
    out.loss += stiffness * depth * depth * depth;
    out.gradient[i] = (-3.0 * stiffness * depth * depth * inv_n) * n_hat;
  }
  out.loss *= inv_n;
  return out;
}

ContactLossReport contact_loss(std::span<const Vec3> cloth, std::span<const Vec3> collider,
                               const Mesh& collider_mesh, int k_neighbors, double stiffness) {
  const std::size_t nf = collider_mesh.face_count();
  if (nf == 0) throw Error("contact loss: collider has no faces");
  if (k_neighbors < 1) throw Error("contact loss: k_neighbors must be at least 1");
  if (collider.size() != collider_mesh.vertex_count())
    throw Error("contact loss: collider frame has " + std::to_string(collider.size()) +
                " vertices, mesh has " + std::to_string(collider_mesh.vertex_count()));

  std::vector<Vec3> centroids(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = collider_mesh.faces()[f];
    centroids[f] = (collider[face[0]] + collider[face[1]] + collider[face[2]]) / 3.0;
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_neighbors), nf);
  std::vector<Index> assignment(cloth.size(), 0);
  std::vector<std::pair<double, Index>> ranked(nf);
  for (std::size_t i = 0; i < cloth.size(); ++i) {
    for (std::size_t f = 0; f < nf; ++f)
      ranked[f] = {(centroids[f] - cloth[i]).squaredNorm(), static_cast<Index>(f)};
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k),
                      ranked.end());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const Face& face = collider_mesh.faces()[ranked[j].second];
      const Triangle tri{collider[face[0]], collider[face[1]], collider[face[2]]};
      const double d = (closest_point_on_triangle(cloth[i], tri) - cloth[i]).squaredNorm();
      if (d < best) {
        best = d;
        assignment[i] = ranked[j].second;
      }
    }
  }
  return contact_loss_assigned(cloth, collider, collider_mesh, assignment, stiffness);
}

PostprocessReport postprocess(const Mesh& cloth, std::span<const Vec3> start,
                              std::span<const Vec3> predicted,
                              std::span<const MeshMotion> colliders,
                              const PostprocessConfig& config) {
  if (start.size() != cloth.vertex_count() || predicted.size() != cloth.vertex_count())
    throw Error("postprocess: frames do not match the cloth vertex count");
  if (config.max_iterations < 1) throw Error("postprocess: max_iterations must be at least 1");

  SweepConfig sweep_config = config.sweep;
  sweep_config.kinds = KindSet::all();
  sweep_config.earliest_per_vertex = true;

  PostprocessReport report;
  std::vector<Vec3> current(predicted.begin(), predicted.end());
  report.moved.assign(current.size(), false);
  std::vector<double> earliest(current.size());
  std::vector<Index> verts;

  for (;;) {
    const MeshMotion motion(cloth, start, current);
    const std::vector<CollisionEvent> events = sweep(motion, colliders, sweep_config);
    if (events.empty()) {
      report.converged = true;
      break;
    }
    if (report.iterations_used == config.max_iterations) break;
    report.events_per_iteration.push_back(events.size());

    std::fill(earliest.begin(), earliest.end(), std::numeric_limits<double>::infinity());
    for (const CollisionEvent& e : events) {
      verts.clear();
      cloth_vertices(e, verts);
      for (Index v : verts) earliest[v] = std::min(earliest[v], e.t_c);
    }
    for (std::size_t v = 0; v < current.size(); ++v) {
      if (!std::isfinite(earliest[v])) continue;
      current[v] = safe_position(start[v], current[v], earliest[v], config.epsilon).x_safe;
      report.moved[v] = true;
    }
    ++report.iterations_used;
  }
  report.corrected_frame = FrameState(std::move(current));
  return report;
}

}  // namespace clothccd
