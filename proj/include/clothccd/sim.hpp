#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "clothccd/geometry.hpp"
#include "clothccd/response.hpp"

namespace clothccd {

/// Rigid collider with one transform per frame. A single-entry track is
/// static for every frame.
struct ColliderTrack {
  MeshPtr mesh;
  std::vector<Eigen::Isometry3d> transforms;

  const Eigen::Isometry3d& transform(std::size_t frame) const;
  std::vector<Vec3> positions(std::size_t frame) const;
};

/// Scripted position of one cloth vertex per frame. A single-entry track
/// holds the vertex fixed.
struct PinTrack {
  Index vertex = 0;
  std::vector<Vec3> positions;

  const Vec3& at(std::size_t frame) const;
};

struct SimParams {
  double dt = 1.0 / 60.0;
  Vec3 gravity{0.0, 0.0, -9.8};
  /// Spring force magnitudes are stiffness * strain, in newtons.
  double stretch_stiffness = 20.0;
  double shear_stiffness = 5.0;
  double bend_stiffness = 0.05;
  /// Axial dashpot of every spring as a fraction of critical damping.
  double spring_damping = 0.5;
  /// Areal mass, kg/m^2.
  double density = 0.2;
  /// Fraction of velocity removed at vertices moved by collision correction.
  double friction = 0.4;
  /// Fraction of velocity removed once per frame.
  double damping = 0.01;
  double epsilon = kDefaultEpsilon;
  int max_iterations = kDefaultMaxIterations;
  double cell_size = 0.0;
  unsigned threads = 1;

  /// Throws Error on dt <= 0, density <= 0, negative stiffness or friction
  /// outside [0, 1].
  void check() const;
};

struct SimScene {
  MeshPtr cloth;
  FrameState initial;
  std::vector<PinTrack> pins;
  std::vector<ColliderTrack> colliders;
  SimParams params;
  /// Per cloth edge: true when the edge is a shear diagonal. Empty means
  /// every edge is structural.
  std::vector<bool> shear_edges;

  /// Throws Error on inconsistent sizes or out-of-range pins.
  void check() const;
  /// Whether every pin and collider track reaches `frame`.
  bool covers(std::size_t frame) const;
};

struct StepReport {
  int substeps = 0;
  /// Collision-correction passes of the post-processor.
  int iterations_used = 0;
  std::vector<std::size_t> events_per_iteration;
  bool converged = true;
  /// The post-processor did not converge and the whole frame was reset to
  /// the start positions.
  bool rewound = false;
};

/// Mass-spring cloth stepped with semi-implicit Euler and cleaned by CCD
/// post-processing. Every returned frame is reached from its predecessor
/// without any collision event.
class ClothSimulator {
 public:
  explicit ClothSimulator(SimScene scene);

  const SimScene& scene() const noexcept { return scene_; }
  const std::vector<double>& masses() const noexcept { return mass_; }
  double total_mass() const;

  /// Advances `state` (the frame at `frame_index`) to frame_index + 1.
  /// Velocities in the returned state are in meters per frame.
  FrameState step(std::size_t frame_index, const FrameState& state,
                  StepReport* report = nullptr) const;

 private:
  struct Spring {
    Index a;
    Index b;
    double rest;
    double stiffness;  // N per unit strain
  };

  int substeps() const;

  SimScene scene_;
  std::vector<double> mass_;
  std::vector<Spring> springs_;
  std::vector<bool> pinned_;
};

/// Single step of a freshly built simulator.
FrameState step(const SimScene& scene, std::size_t frame_index, const FrameState& state);

using StepCallback = std::function<void(std::size_t frame, const FrameState& state,
                                        const StepReport& report)>;

/// frame_count steps from the initial state; the trajectory holds
/// frame_count + 1 frames.
Trajectory run(const SimScene& scene, std::size_t frame_count,
               const StepCallback& on_step = {});

enum class ScenarioKind { DrapeOnObject, HangTwoPins, GraspLift };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

struct ScenarioParams {
  /// Grid vertices per side; 0 selects the scenario default.
  int resolution = 0;
  /// Cloth side length in meters; <= 0 selects the scenario default.
  double size = 0.0;
  /// grasp_lift: height gained by the pinned corner over frame_count frames.
  double lift_height = 0.5;
  std::size_t frame_count = 240;
  /// drape_on_object: collider OBJ replacing the unit icosphere.
  std::string collider_obj;
  SimParams sim;
};

/// Regular grid of resolution x resolution vertices spanning `size`
/// centered on the origin in the z = 0 plane, two faces per cell.
/// shear_edges receives the diagonal flag of each edge.
Mesh make_grid(int resolution, double size, std::vector<bool>* shear_edges = nullptr);

/// Unit-radius icosphere centered on the origin with outward winding.
Mesh make_icosphere(int subdivisions);

/// Axis-aligned box with outward winding.
Mesh make_box(const Vec3& lo, const Vec3& hi);

SimScene generate_scenario(ScenarioKind kind, const ScenarioParams& params = {});

/// Scene from a JSON configuration (see README for the keys). Returns the
/// scene and the requested frame count.
std::pair<SimScene, std::size_t> scene_from_json(const std::string& text,
                                                 const std::string& source_name);

}  // namespace clothccd
