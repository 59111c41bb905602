#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clothccd/geometry.hpp"
#include "clothccd/pipeline.hpp"

namespace clothccd {

inline constexpr double kDefaultEpsilon = 1e-3;
inline constexpr int kDefaultMaxIterations = 32;
inline constexpr int kDefaultContactNeighbors = 8;
inline constexpr double kDefaultContactStiffness = 1.0;

struct SafeCorrection {
  double t_safe = 0.0;
  Vec3 x_safe = Vec3::Zero();
};

/// t_safe = max(0, t_c - epsilon), x_safe = x_start + t_safe (x_end - x_start).
SafeCorrection safe_position(const Vec3& x_start, const Vec3& x_end, double t_c,
                             double epsilon);

struct CcdLossReport {
  double loss = 0.0;
  /// d loss / d x_end for every cloth vertex.
  std::vector<Vec3> gradient;
  /// Contribution of each event before the 1/|events| average.
  std::vector<double> event_terms;
  std::size_t event_count = 0;
};

/// Mean over events of (1/4) sum_j |x_end - x_safe|^2 over the event's four
/// vertices. t_safe is held constant, so the gradient at a cloth vertex is
/// 2 (1 - t_safe)^2 (x_end - x_start) with the same weights, accumulated
/// over events. Collider vertices contribute to the loss (positions taken
/// from `colliders`) but receive no gradient.
CcdLossReport ccd_loss(std::span<const CollisionEvent> events, std::span<const Vec3> start,
                       std::span<const Vec3> end, double epsilon = kDefaultEpsilon,
                       std::span<const MeshMotion> colliders = {});

struct MseLossReport {
  double loss = 0.0;
  std::vector<Vec3> gradient;
};

/// (1/N) sum |pred - gt|^2 and its gradient (2/N)(pred - gt).
MseLossReport mse_loss(std::span<const Vec3> pred, std::span<const Vec3> gt);

struct ContactLossReport {
  double loss = 0.0;
  std::vector<Vec3> gradient;
  std::size_t penetrating_vertex_count = 0;
  /// Face chosen for each cloth vertex.
  std::vector<Index> nearest_face;
};

/// Cubic penetration penalty against one collider. Each cloth vertex is
/// assigned the closest face among the k faces with nearest centroids; the
/// signed distance is measured to that face's plane along its winding
/// normal.
ContactLossReport contact_loss(std::span<const Vec3> cloth, std::span<const Vec3> collider,
                               const Mesh& collider_mesh,
                               int k_neighbors = kDefaultContactNeighbors,
                               double stiffness = kDefaultContactStiffness);

/// Same penalty with the face assignment given rather than searched.
ContactLossReport contact_loss_assigned(std::span<const Vec3> cloth,
                                        std::span<const Vec3> collider,
                                        const Mesh& collider_mesh,
                                        std::span<const Index> nearest_face,
                                        double stiffness = kDefaultContactStiffness);

struct PostprocessConfig {
  double epsilon = kDefaultEpsilon;
  int max_iterations = kDefaultMaxIterations;
  /// kinds and earliest_per_vertex are overridden: all five kinds, deduped.
  SweepConfig sweep;
};

struct PostprocessReport {
  /// Correction passes applied; 0 when the predicted frame was clean.
  int iterations_used = 0;
  /// Event count found before each correction pass.
  std::vector<std::size_t> events_per_iteration;
  bool converged = false;
  FrameState corrected_frame;
  /// Cloth vertices moved in any pass.
  std::vector<bool> moved;
};

/// Repeatedly sweeps start -> current and moves every cloth vertex with an
/// event to the x_safe of its earliest one, until a sweep is empty or the
/// iteration budget is spent.
PostprocessReport postprocess(const Mesh& cloth, std::span<const Vec3> start,
                              std::span<const Vec3> predicted,
                              std::span<const MeshMotion> colliders,
                              const PostprocessConfig& config = {});

}  // namespace clothccd
