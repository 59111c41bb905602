#include "clothccd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clothccd {

namespace {

constexpr int kMaxSubsteps = 10000;

template <typename Track>
std::size_t track_index(const Track& track, std::size_t frame) {
  return track.size() == 1 ? 0 : frame;
}

}  // namespace

const Eigen::Isometry3d& ColliderTrack::transform(std::size_t frame) const {
  const std::size_t i = track_index(transforms, frame);
  if (i >= transforms.size())
    throw Error("collider track has no transform for frame " + std::to_string(frame));
  return transforms[i];
}

std::vector<Vec3> ColliderTrack::positions(std::size_t frame) const {
  const Eigen::Isometry3d& t = transform(frame);
  std::vector<Vec3> out;
  out.reserve(mesh->vertex_count());
  for (const Vec3& p : mesh->rest_positions()) out.push_back(t * p);
  return out;
}

const Vec3& PinTrack::at(std::size_t frame) const {
  const std::size_t i = track_index(positions, frame);
  if (i >= positions.size())
    throw Error("pin track of vertex " + std::to_string(vertex) + " has no position for frame " +
                std::to_string(frame));
  return positions[i];
}

void SimParams::check() const {
  if (!(dt > 0.0)) throw Error("sim params: dt must be positive");
  if (!(density > 0.0)) throw Error("sim params: density must be positive");
  if (stretch_stiffness < 0.0 || shear_stiffness < 0.0 || bend_stiffness < 0.0)
    throw Error("sim params: stiffnesses must be non-negative");
  if (spring_damping < 0.0) throw Error("sim params: spring damping must be non-negative");
  if (!(friction >= 0.0 && friction <= 1.0)) throw Error("sim params: friction must lie in [0, 1]");
  if (!(damping >= 0.0 && damping <= 1.0)) throw Error("sim params: damping must lie in [0, 1]");
  if (epsilon < 0.0) throw Error("sim params: epsilon must be non-negative");
  if (max_iterations < 1) throw Error("sim params: max_iterations must be at least 1");
}

void SimScene::check() const {
  if (!cloth) throw Error("scene: no cloth mesh");
  params.check();
  check_frame(initial, cloth->vertex_count(), "initial cloth frame");
  if (!shear_edges.empty() && shear_edges.size() != cloth->edge_count())
    throw Error("scene: shear edge flags do not match the edge count");
  for (const PinTrack& pin : pins) {
    if (pin.vertex < 0 || static_cast<std::size_t>(pin.vertex) >= cloth->vertex_count())
      throw Error("scene: pin vertex " + std::to_string(pin.vertex) + " out of range");
    if (pin.positions.empty()) throw Error("scene: empty pin track");
  }
  for (const ColliderTrack& c : colliders) {
    if (!c.mesh) throw Error("scene: collider without mesh");
    if (c.transforms.empty()) throw Error("scene: empty collider transform track");
  }
}

bool SimScene::covers(std::size_t frame) const {
  for (const PinTrack& pin : pins)
    if (pin.positions.size() != 1 && pin.positions.size() <= frame) return false;
  for (const ColliderTrack& c : colliders)
    if (c.transforms.size() != 1 && c.transforms.size() <= frame) return false;
  return true;
}

ClothSimulator::ClothSimulator(SimScene scene) : scene_(std::move(scene)) {
  scene_.check();
  const Mesh& mesh = *scene_.cloth;
  const auto& rest = mesh.rest_positions();
  const SimParams& p = scene_.params;

  mass_.assign(mesh.vertex_count(), 0.0);
  for (const Face& f : mesh.faces()) {
    const double share = p.density * triangle_area(rest[f[0]], rest[f[1]], rest[f[2]]) / 3.0;
    for (Index v : f) mass_[v] += share;
  }

  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    const Edge& edge = mesh.edges()[e];
    const bool shear = !scene_.shear_edges.empty() && scene_.shear_edges[e];
    const double rest_len = (rest[edge.b] - rest[edge.a]).norm();
    if (rest_len > 0.0)
      springs_.push_back({edge.a, edge.b, rest_len, shear ? p.shear_stiffness : p.stretch_stiffness});

    // Bending spring between the vertices opposite an interior edge.
    const auto fa = mesh.vertex_faces(edge.a);
    const auto fb = mesh.vertex_faces(edge.b);
    std::vector<Index> shared;
    std::set_intersection(fa.begin(), fa.end(), fb.begin(), fb.end(), std::back_inserter(shared));
    if (shared.size() != 2) continue;
    Index opposite[2];
    for (int k = 0; k < 2; ++k) {
      const Face& f = mesh.faces()[shared[k]];
      opposite[k] = f[0] + f[1] + f[2] - edge.a - edge.b;
    }
    const double bend_len = (rest[opposite[1]] - rest[opposite[0]]).norm();
    if (opposite[0] != opposite[1] && bend_len > 0.0)
      springs_.push_back({opposite[0], opposite[1], bend_len, p.bend_stiffness});
  }

  pinned_.assign(mesh.vertex_count(), false);
  for (const PinTrack& pin : scene_.pins) pinned_[pin.vertex] = true;
}

double ClothSimulator::total_mass() const {
  double m = 0.0;
  for (double x : mass_) m += x;
  return m;
}

int ClothSimulator::substeps() const {
  // Gershgorin bound on the largest eigenvalue of M^-1 K.
  std::vector<double> row(mass_.size(), 0.0);
  for (const Spring& s : springs_) {
    row[s.a] += s.stiffness / s.rest;
    row[s.b] += s.stiffness / s.rest;
  }
  double omega_sq = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i)
    if (mass_[i] > 0.0) omega_sq = std::max(omega_sq, 2.0 * row[i] / mass_[i]);
  if (omega_sq == 0.0) return 1;
  const double h_max = 1.0 / std::sqrt(omega_sq);
  const double n = std::ceil(scene_.params.dt / h_max);
  return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(kMaxSubsteps)));
}

FrameState ClothSimulator::step(std::size_t frame_index, const FrameState& state,
                                StepReport* report) const {
  const Mesh& mesh = *scene_.cloth;
  const SimParams& p = scene_.params;
  const std::size_t n = mesh.vertex_count();
  check_frame(state, n, "cloth state");
  if (!scene_.covers(frame_index + 1))
    throw Error("scene tracks end before frame " + std::to_string(frame_index + 1));

  const std::vector<Vec3>& x0 = state.positions;
  std::vector<Vec3> x = x0;
  std::vector<Vec3> v(n, Vec3::Zero());
  if (state.velocities) {
    if (state.velocities->size() != n) throw Error("cloth state: velocity count mismatch");
    for (std::size_t i = 0; i < n; ++i) v[i] = (*state.velocities)[i] / p.dt;
  }

  const int substeps = this->substeps();
  const double h = p.dt / substeps;
  std::vector<Vec3> force(n);
  for (int s = 0; s < substeps; ++s) {
    std::fill(force.begin(), force.end(), Vec3::Zero());
    for (const Spring& sp : springs_) {
      const Vec3 d = x[sp.b] - x[sp.a];
      const double len = d.norm();
      if (len == 0.0) continue;
      const Vec3 dir = d / len;
      double magnitude = sp.stiffness * (len - sp.rest) / sp.rest;
      const double ma = mass_[sp.a], mb = mass_[sp.b];
      if (ma > 0.0 && mb > 0.0 && p.spring_damping > 0.0) {
        const double reduced = ma * mb / (ma + mb);
        const double c = 2.0 * p.spring_damping * std::sqrt(sp.stiffness / sp.rest * reduced);
        magnitude += c * (v[sp.b] - v[sp.a]).dot(dir);
      }
      force[sp.a] += magnitude * dir;
      force[sp.b] -= magnitude * dir;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!force[i].allFinite())
        throw Error("non-finite force at cloth vertex " + std::to_string(i) + " in frame " +
                    std::to_string(frame_index));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned_[i]) continue;
      Vec3 a = p.gravity;
      if (mass_[i] > 0.0) a += force[i] / mass_[i];
      v[i] += h * a;
      x[i] += h * v[i];
    }
    const double w = static_cast<double>(s + 1) / substeps;
    for (const PinTrack& pin : scene_.pins)
      x[pin.vertex] = lerp(pin.at(frame_index), pin.at(frame_index + 1), w);
  }
  for (std::size_t i = 0; i < n; ++i) v[i] *= (1.0 - p.damping);
  for (const PinTrack& pin : scene_.pins)
    v[pin.vertex] = (pin.at(frame_index + 1) - pin.at(frame_index)) / p.dt;

  std::vector<std::vector<Vec3>> collider_start, collider_end;
  std::vector<MeshMotion> motions;
  collider_start.reserve(scene_.colliders.size());
  collider_end.reserve(scene_.colliders.size());
  for (const ColliderTrack& c : scene_.colliders) {
    collider_start.push_back(c.positions(frame_index));
    collider_end.push_back(c.positions(frame_index + 1));
  }
  for (std::size_t k = 0; k < scene_.colliders.size(); ++k)
    motions.emplace_back(*scene_.colliders[k].mesh, collider_start[k], collider_end[k]);

  PostprocessConfig pc;
  pc.epsilon = p.epsilon;
  pc.max_iterations = p.max_iterations;
  pc.sweep.cell_size = p.cell_size;
  pc.sweep.threads = p.threads;
  PostprocessReport post = postprocess(mesh, x0, x, motions, pc);

  StepReport local;
  local.substeps = substeps;
  local.iterations_used = post.iterations_used;
  local.events_per_iteration = post.events_per_iteration;
  local.converged = post.converged;

  FrameState out;
  if (post.converged) {
    out.positions = std::move(post.corrected_frame.positions);
    for (std::size_t i = 0; i < n; ++i)
      if (post.moved[i]) v[i] = (out.positions[i] - x0[i]) / p.dt * (1.0 - p.friction);
  } else {
    local.rewound = true;
    out.positions = x0;
    std::fill(v.begin(), v.end(), Vec3::Zero());
  }
  std::vector<Vec3> per_frame(n);
  for (std::size_t i = 0; i < n; ++i) per_frame[i] = v[i] * p.dt;
  out.velocities = std::move(per_frame);
  if (report) *report = std::move(local);
  return out;
}

FrameState step(const SimScene& scene, std::size_t frame_index, const FrameState& state) {
  return ClothSimulator(scene).step(frame_index, state);
}

Trajectory run(const SimScene& scene, std::size_t frame_count, const StepCallback& on_step) {
  if (frame_count < 1) throw Error("run: frame_count must be at least 1");
  const ClothSimulator sim(scene);
  Trajectory traj;
  traj.mesh = scene.cloth;
  traj.dt = scene.params.dt;
  traj.frames.reserve(frame_count + 1);
  traj.frames.push_back(scene.initial);
  for (std::size_t f = 0; f < frame_count; ++f) {
    StepReport report;
    traj.frames.push_back(sim.step(f, traj.frames.back(), &report));
    if (on_step) on_step(f, traj.frames.back(), report);
  }
  return traj;
}

}  // namespace clothccd
