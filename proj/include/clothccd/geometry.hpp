#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace clothccd {

using Vec3 = Eigen::Vector3d;
using Index = std::int32_t;
using Face = std::array<Index, 3>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the path and the 1-based record number
/// (line for text formats, frame for binary trajectories; 0 = header).
class FormatError : public Error {
 public:
  FormatError(std::string path, std::size_t record, const std::string& what);

  const std::string& path() const noexcept { return path_; }
  std::size_t record() const noexcept { return record_; }

 private:
  std::string path_;
  std::size_t record_;
};

/// Undirected edge with a < b.
struct Edge {
  Index a = 0;
  Index b = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Sorted, deduplicated undirected edges of a face list, ordered
/// lexicographically on (min, max). Repeated indices inside a face
/// contribute no self-loop edge.
std::vector<Edge> derive_edges(std::span<const Face> faces);

/// Immutable triangle mesh: rest positions, faces, and derived topology.
///
/// Construction rejects face indices outside [0, vertex_count). Repeated
/// indices and degenerate rest areas are accepted here and surfaced by
/// validate_mesh(), so that malformed inputs can still be inspected.
class Mesh {
 public:
  Mesh(std::vector<Vec3> rest_positions, std::vector<Face> faces);

  std::size_t vertex_count() const noexcept { return rest_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::vector<Vec3>& rest_positions() const noexcept { return rest_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Incident face indices of a vertex, ascending.
  std::span<const Index> vertex_faces(Index v) const;
  /// Incident edge indices of a vertex, ascending.
  std::span<const Index> vertex_edges(Index v) const;

  /// Mean rest length over all edges (0 for an edge-free mesh).
  double mean_edge_length() const;

 private:
  std::vector<Vec3> rest_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  // CSR adjacency: offsets have vertex_count + 1 entries.
  std::vector<Index> face_offsets_, face_ids_;
  std::vector<Index> edge_offsets_, edge_ids_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Positions of one mesh at one time step. Velocities, when present, are
/// frame differences in meters per frame.
struct FrameState {
  std::vector<Vec3> positions;
  std::optional<std::vector<Vec3>> velocities;

  FrameState() = default;
  explicit FrameState(std::vector<Vec3> p) : positions(std::move(p)) {}

  std::size_t size() const noexcept { return positions.size(); }
};

/// Throws Error if the frame does not match the vertex count or holds
/// non-finite coordinates.
void check_frame(const FrameState& frame, std::size_t vertex_count,
                 const char* what = "frame");

/// Frame sequence over one mesh.
struct Trajectory {
  MeshPtr mesh;
  std::vector<FrameState> frames;
  double dt = 1.0 / 60.0;

  /// Throws Error unless frames >= 1, dt > 0, and every frame matches.
  void check() const;
};

/// v_i = scale * (x_i(t) - x_i(t-1)).
std::vector<Vec3> derive_velocities(const FrameState& frame_t,
                                    const FrameState& frame_prev,
                                    double scale = 1.0);

struct MeshIssue {
  enum class Kind { RepeatedIndex, DegenerateFace, UnreferencedVertex };
  Kind kind;
  Index index;  // face for the first two kinds, vertex for the last
  std::string message;
};

struct ValidationReport {
  std::vector<MeshIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
};

inline constexpr double kDefaultDegenerateArea = 1e-12;

ValidationReport validate_mesh(const Mesh& mesh,
                               double area_tolerance = kDefaultDegenerateArea);

/// Throws Error listing the first issue when the mesh does not validate.
void require_valid(const Mesh& mesh,
                   double area_tolerance = kDefaultDegenerateArea);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace clothccd
