#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "clothccd/geometry.hpp"
#include "clothccd/narrow_phase.hpp"

namespace clothccd {

/// The five primitive-level contact types. Declaration order is the sort
/// order of event lists.
enum class ContactKind : std::uint8_t {
  VF,      // cloth vertex vs collider triangle
  EE,      // cloth edge vs collider edge
  FV,      // collider vertex vs cloth triangle
  SelfVF,  // cloth vertex vs cloth triangle
  SelfEE,  // cloth edge vs cloth edge
};
inline constexpr int kContactKindCount = 5;

std::string_view to_string(ContactKind kind);
std::optional<ContactKind> parse_contact_kind(std::string_view name);
constexpr bool is_self(ContactKind k) {
  return k == ContactKind::SelfVF || k == ContactKind::SelfEE;
}

/// Bit set over ContactKind.
class KindSet {
 public:
  constexpr KindSet() = default;
  static constexpr KindSet all() { return KindSet(0x1f); }
  static constexpr KindSet self_only() {
    return KindSet().with(ContactKind::SelfVF).with(ContactKind::SelfEE);
  }
  constexpr KindSet with(ContactKind k) const {
    return KindSet(static_cast<std::uint8_t>(bits_ | bit(k)));
  }
  constexpr bool contains(ContactKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

 private:
  constexpr explicit KindSet(std::uint8_t b) : bits_(b) {}
  static constexpr std::uint8_t bit(ContactKind k) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

/// Mesh tag of the cloth; colliders are tagged by their index (>= 0).
inline constexpr int kClothTag = -1;

/// Vertex indices of one primitive: 1 (vertex), 2 (edge) or 3 (triangle).
struct IndexTuple {
  std::array<Index, 3> v{-1, -1, -1};
  std::uint8_t size = 0;

  static IndexTuple vertex(Index a) { return {{a, -1, -1}, 1}; }
  static IndexTuple edge(const Edge& e) { return {{e.a, e.b, -1}, 2}; }
  static IndexTuple triangle(const Face& f) { return {{f[0], f[1], f[2]}, 3}; }

  std::span<const Index> indices() const { return {v.data(), size}; }
  bool shares_vertex(const IndexTuple& other) const;
  auto operator<=>(const IndexTuple&) const = default;
};

struct CollisionEvent {
  ContactKind kind = ContactKind::VF;
  int mesh_a = kClothTag;
  IndexTuple a;
  int mesh_b = kClothTag;
  IndexTuple b;
  double t_c = 0.0;
  /// Barycentric weights of b's vertices (VF, FV, SelfVF) or (s, u, 0)
  /// along a and b (EE, SelfEE).
  std::array<double, 3> params{};
};

/// Order by (kind, mesh_a, a, mesh_b, b, t_c).
bool event_less(const CollisionEvent& x, const CollisionEvent& y);

/// One mesh moving linearly from `start` to `end` over a step.
class MeshMotion {
 public:
  /// Throws Error when a position span does not match the vertex count.
  MeshMotion(const Mesh& mesh, std::span<const Vec3> start, std::span<const Vec3> end);

  const Mesh& mesh() const noexcept { return *mesh_; }
  std::span<const Vec3> start() const noexcept { return start_; }
  std::span<const Vec3> end() const noexcept { return end_; }

 private:
  const Mesh* mesh_;
  std::span<const Vec3> start_;
  std::span<const Vec3> end_;
};

struct SweepConfig {
  /// Spatial hash cell edge in meters; <= 0 selects the cloth's mean rest
  /// edge length.
  double cell_size = 0.0;
  KernelTolerances tolerances;
  KindSet kinds = KindSet::all();
  /// Keep only events that are the earliest for at least one of their cloth
  /// vertices.
  bool earliest_per_vertex = false;
  /// Narrow-phase worker threads (0 = hardware concurrency).
  unsigned threads = 1;
};

/// Candidate primitive pair. Primitive ids index vertices, edges or faces of
/// the mesh each side belongs to: VF (cloth vertex, collider face),
/// EE (cloth edge, collider edge), FV (collider vertex, cloth face),
/// SelfVF (cloth vertex, cloth face), SelfEE (cloth edge, cloth edge, a < b).
struct Candidate {
  ContactKind kind;
  int collider;  // -1 for self kinds
  Index a;
  Index b;

  auto operator<=>(const Candidate&) const = default;
};

struct CandidateSet {
  std::vector<Candidate> pairs;  // sorted, unique
  /// Number of pairs an exhaustive enumeration of the enabled kinds visits.
  std::size_t all_pairs_count = 0;
  double cell_size = 0.0;
};

/// Cell size actually used for a requested value (<= 0 selects the cloth's
/// mean rest edge length, or 1 for an edge-free cloth).
double resolve_cell_size(const MeshMotion& cloth, double requested);

/// Swept-AABB spatial hashing over one step. Every primitive gets the box
/// of its start and end positions, padded by the kernel tolerance; pairs
/// whose boxes share a hash cell and overlap become candidates.
CandidateSet build_broadphase(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                              const SweepConfig& config);

/// Exhaustive enumeration of every pair of the enabled kinds.
CandidateSet enumerate_all_pairs(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                                 const SweepConfig& config);

/// Drops self pairs whose primitives share a vertex; other kinds pass.
std::vector<Candidate> filter_adjacent(std::span<const Candidate> pairs, const Mesh& cloth);

/// Narrow-phase test of a single candidate.
std::optional<CollisionEvent> test_candidate(const Candidate& c, const MeshMotion& cloth,
                                             std::span<const MeshMotion> colliders,
                                             const KernelTolerances& tol);

/// Broad phase, adjacency filtering and narrow phase over one step. The
/// result is sorted with event_less and independent of `threads`.
std::vector<CollisionEvent> sweep(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                                  const SweepConfig& config);

/// Same as sweep() but over every pair; the reference for broad-phase
/// soundness.
std::vector<CollisionEvent> sweep_exhaustive(const MeshMotion& cloth,
                                             std::span<const MeshMotion> colliders,
                                             const SweepConfig& config);

/// Retains, in order, the events that are the earliest (lowest t_c, ties
/// broken by list order) for at least one of their cloth vertices.
std::vector<CollisionEvent> keep_earliest_per_vertex(std::span<const CollisionEvent> events);

/// Cloth vertex indices involved in an event.
void cloth_vertices(const CollisionEvent& e, std::vector<Index>& out);

}  // namespace clothccd
