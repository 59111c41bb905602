#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clothccd/geometry.hpp"
#include "clothccd/pipeline.hpp"
#include "clothccd/sim.hpp"

namespace clothccd {

/// Mean vertex error in centimeters over all frames and vertices; inputs in
/// meters. `per_frame` receives the per-frame mean distance in centimeters.
double mve_cm(const Trajectory& pred, const Trajectory& gt,
              std::vector<double>* per_frame = nullptr);

/// Every undirected edge is used by exactly two faces, once in each
/// direction.
bool is_closed(const Mesh& mesh);

/// Generalized winding number of a closed triangle surface around p:
/// 1 inside, 0 outside for a consistently outward-wound mesh.
double winding_number(const Vec3& p, std::span<const Vec3> positions, const Mesh& mesh);

/// Strict interiority: winding number above one half.
bool inside_closed_mesh(const Vec3& p, std::span<const Vec3> positions, const Mesh& mesh);

/// Percentage of cloth vertices strictly inside any collider, averaged over
/// frames. A collider trajectory with one frame is static. Throws Error
/// for an open collider mesh.
double collision_rate(const Trajectory& cloth, std::span<const Trajectory> colliders,
                      std::vector<double>* per_frame = nullptr);

/// Percentage of cloth vertices involved in self events (SelfVF and SelfEE
/// sweeps between consecutive frames), counted once per step and averaged
/// over steps. Requires at least two frames.
double self_collision_rate(const Trajectory& traj, const SweepConfig& config = {},
                           std::vector<double>* per_step = nullptr);

/// Number of intersecting pairs of faces sharing no vertex, tested on one
/// frame only. Coplanar overlaps are not counted.
std::size_t discrete_self_intersection_count(const Mesh& mesh, std::span<const Vec3> positions);

/// Frames of a rigid collider track expressed as a trajectory.
Trajectory collider_trajectory(const ColliderTrack& track, std::size_t frame_count,
                               double dt);

struct MetricsReport {
  double mve_cm = 0.0;
  double collision_rate_pct = 0.0;
  double self_collision_rate_pct = 0.0;
  std::size_t frame_count = 0;
  std::size_t vertex_count = 0;
  std::vector<double> per_frame_mve_cm;
  std::vector<double> per_frame_collision_rate_pct;
  /// One entry per consecutive frame pair.
  std::vector<double> per_step_self_collision_rate_pct;
};

/// All three metrics; the collision rates are measured on `pred`.
MetricsReport compute_metrics(const Trajectory& pred, const Trajectory& gt,
                              std::span<const Trajectory> colliders,
                              const SweepConfig& config = {});

std::string metrics_json(const MetricsReport& report, bool per_frame, bool pretty);

}  // namespace clothccd
