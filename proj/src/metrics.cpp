#include "clothccd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "clothccd/json_writer.hpp"

namespace clothccd {

namespace {

void require_same_shape(const Trajectory& a, const Trajectory& b) {
  a.check();
  b.check();
  if (a.frames.size() != b.frames.size())
    throw Error("metrics: trajectories have " + std::to_string(a.frames.size()) + " and " +
                std::to_string(b.frames.size()) + " frames");
  if (a.frames[0].size() != b.frames[0].size())
    throw Error("metrics: trajectories have " + std::to_string(a.frames[0].size()) + " and " +
                std::to_string(b.frames[0].size()) + " vertices");
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Segment [p, q] crosses triangle t at a single interior point.
bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Triangle& t) {
  const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]);
  const double dp = (p - t[0]).dot(n);
  const double dq = (q - t[0]).dot(n);
  if ((dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) || dp == dq) return false;
  const Vec3 d = q - p;
  const double s0 = (t[1] - p).cross(t[2] - p).dot(d);
  const double s1 = (t[2] - p).cross(t[0] - p).dot(d);
  const double s2 = (t[0] - p).cross(t[1] - p).dot(d);
  return (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0);
}

bool triangles_intersect(const Triangle& a, const Triangle& b) {
  for (int i = 0; i < 3; ++i) {
    if (segment_crosses_triangle(a[i], a[(i + 1) % 3], b)) return true;
    if (segment_crosses_triangle(b[i], b[(i + 1) % 3], a)) return true;
  }
  return false;
}

}  // namespace

double mve_cm(const Trajectory& pred, const Trajectory& gt, std::vector<double>* per_frame) {
  require_same_shape(pred, gt);
  std::vector<double> frames;
  frames.reserve(pred.frames.size());
  for (std::size_t t = 0; t < pred.frames.size(); ++t) {
    const auto& x = pred.frames[t].positions;
    const auto& y = gt.frames[t].positions;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]).norm();
    frames.push_back(x.empty() ? 0.0 : 100.0 * s / static_cast<double>(x.size()));
  }
  const double out = mean(frames);
  if (per_frame) *per_frame = std::move(frames);
  return out;
}

bool is_closed(const Mesh& mesh) {
  // directed edge -> use count
  std::map<std::pair<Index, Index>, int> directed;
  for (const Face& f : mesh.faces())
    for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
  if (directed.empty()) return false;
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

double winding_number(const Vec3& p, std::span<const Vec3> x, const Mesh& mesh) {
  double total = 0.0;
  for (const Face& f : mesh.faces()) {
    const Vec3 a = x[f[0]] - p, b = x[f[1]] - p, c = x[f[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

bool inside_closed_mesh(const Vec3& p, std::span<const Vec3> x, const Mesh& mesh) {
  return winding_number(p, x, mesh) > 0.5;
}

double collision_rate(const Trajectory& cloth, std::span<const Trajectory> colliders,
                      std::vector<double>* per_frame) {
  cloth.check();
  for (std::size_t k = 0; k < colliders.size(); ++k) {
    colliders[k].check();
    if (!is_closed(*colliders[k].mesh))
      throw Error("collision rate: collider " + std::to_string(k) +
                  " is not a closed, consistently wound mesh; containment is undefined");
    if (colliders[k].frames.size() != 1 && colliders[k].frames.size() != cloth.frames.size())
      throw Error("collision rate: collider " + std::to_string(k) + " has " +
                  std::to_string(colliders[k].frames.size()) + " frames, cloth has " +
                  std::to_string(cloth.frames.size()));
  }
  std::vector<double> frames;
  for (std::size_t t = 0; t < cloth.frames.size(); ++t) {
    const auto& x = cloth.frames[t].positions;
    std::size_t inside = 0;
    for (const Vec3& p : x) {
      for (const Trajectory& c : colliders) {
        const auto& cx = c.frames[c.frames.size() == 1 ? 0 : t].positions;
        if (inside_closed_mesh(p, cx, *c.mesh)) {
          ++inside;
          break;
        }
      }
    }
    frames.push_back(x.empty() ? 0.0 : 100.0 * static_cast<double>(inside) / static_cast<double>(x.size()));
  }
  const double out = mean(frames);
  if (per_frame) *per_frame = std::move(frames);
  return out;
}

double self_collision_rate(const Trajectory& traj, const SweepConfig& config,
                           std::vector<double>* per_step) {
  traj.check();
  if (traj.frames.size() < 2) throw Error("self collision rate: need at least two frames");
  SweepConfig cfg = config;
  cfg.kinds = KindSet::self_only();
  cfg.earliest_per_vertex = false;
  const std::size_t n = traj.mesh->vertex_count();
  std::vector<double> steps;
  std::vector<char> involved(n);
  std::vector<Index> verts;
  for (std::size_t t = 0; t + 1 < traj.frames.size(); ++t) {
    const MeshMotion motion(*traj.mesh, traj.frames[t].positions, traj.frames[t + 1].positions);
    const auto events = sweep(motion, {}, cfg);
    std::fill(involved.begin(), involved.end(), 0);
    for (const CollisionEvent& e : events) {
      verts.clear();
      cloth_vertices(e, verts);
      for (Index v : verts) involved[v] = 1;
    }
    const auto count = static_cast<double>(std::count(involved.begin(), involved.end(), 1));
    steps.push_back(n == 0 ? 0.0 : 100.0 * count / static_cast<double>(n));
  }
  const double out = mean(steps);
  if (per_step) *per_step = std::move(steps);
  return out;
}

std::size_t discrete_self_intersection_count(const Mesh& mesh, std::span<const Vec3> x) {
  if (x.size() != mesh.vertex_count())
    throw Error("discrete check: frame does not match the vertex count");
  const auto& faces = mesh.faces();
  std::vector<Triangle> tris;
  std::vector<std::pair<Vec3, Vec3>> boxes;
  for (const Face& f : faces) {
    const Triangle t{x[f[0]], x[f[1]], x[f[2]]};
    tris.push_back(t);
    boxes.emplace_back(t[0].cwiseMin(t[1]).cwiseMin(t[2]), t[0].cwiseMax(t[1]).cwiseMax(t[2]));
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      if (IndexTuple::triangle(faces[i]).shares_vertex(IndexTuple::triangle(faces[j]))) continue;
      if ((boxes[i].second.array() < boxes[j].first.array()).any() ||
          (boxes[j].second.array() < boxes[i].first.array()).any())
        continue;
      if (triangles_intersect(tris[i], tris[j])) ++count;
    }
  }
  return count;
}

Trajectory collider_trajectory(const ColliderTrack& track, std::size_t frame_count, double dt) {
  Trajectory out;
  out.mesh = track.mesh;
  out.dt = dt;
  for (std::size_t f = 0; f < frame_count; ++f) out.frames.emplace_back(track.positions(f));
  return out;
}

MetricsReport compute_metrics(const Trajectory& pred, const Trajectory& gt,
                              std::span<const Trajectory> colliders, const SweepConfig& config) {
  MetricsReport r;
  r.mve_cm = mve_cm(pred, gt, &r.per_frame_mve_cm);
  r.frame_count = pred.frames.size();
  r.vertex_count = pred.mesh->vertex_count();
  r.collision_rate_pct = collision_rate(pred, colliders, &r.per_frame_collision_rate_pct);
  if (pred.frames.size() >= 2)
    r.self_collision_rate_pct =
        self_collision_rate(pred, config, &r.per_step_self_collision_rate_pct);
  return r;
}

std::string metrics_json(const MetricsReport& r, bool per_frame, bool pretty) {
  JsonWriter w(pretty);
  w.begin_object();
  w.field("mve_cm", r.mve_cm);
  w.field("collision_rate_pct", r.collision_rate_pct);
  w.field("self_collision_rate_pct", r.self_collision_rate_pct);
  w.field("frame_count", static_cast<std::uint64_t>(r.frame_count));
  w.field("vertex_count", static_cast<std::uint64_t>(r.vertex_count));
  if (per_frame) {
    auto array = [&](std::string_view name, const std::vector<double>& v) {
      w.key(name).begin_array();
      for (double x : v) w.value(x);
      w.end_array();
    };
    w.key("per_frame").begin_object();
    array("mve_cm", r.per_frame_mve_cm);
    array("collision_rate_pct", r.per_frame_collision_rate_pct);
    array("self_collision_rate_pct", r.per_step_self_collision_rate_pct);
    w.end_object();
  }
  w.end_object();
  return w.str();
}

}  // namespace clothccd
