#include "clothccd/pipeline.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "parallel.hpp"

namespace clothccd {

namespace {

constexpr std::array<std::string_view, kContactKindCount> kKindNames{"VF", "EE", "FV", "SelfVF",
                                                                     "SelfEE"};

Triangle triangle_at(std::span<const Vec3> x, const Face& f) { return {x[f[0]], x[f[1]], x[f[2]]}; }
Segment segment_at(std::span<const Vec3> x, const Edge& e) { return {x[e.a], x[e.b]}; }

std::optional<CollisionEvent> vertex_face(const MeshMotion& vm, Index v, const MeshMotion& fm,
                                          Index f, const KernelTolerances& tol) {
  const Face& face = fm.mesh().faces()[f];
  auto hit = point_triangle_ccd(vm.start()[v], vm.end()[v], triangle_at(fm.start(), face),
                                triangle_at(fm.end(), face), tol);
  if (!hit) return std::nullopt;
  CollisionEvent e;
  e.a = IndexTuple::vertex(v);
  e.b = IndexTuple::triangle(face);
  e.t_c = hit->t_c;
  e.params = hit->params;
  return e;
}

std::optional<CollisionEvent> edge_edge(const MeshMotion& am, Index ea, const MeshMotion& bm,
                                        Index eb, const KernelTolerances& tol) {
  const Edge& a = am.mesh().edges()[ea];
  const Edge& b = bm.mesh().edges()[eb];
  auto hit = edge_edge_ccd(segment_at(am.start(), a), segment_at(am.end(), a),
                           segment_at(bm.start(), b), segment_at(bm.end(), b), tol);
  if (!hit) return std::nullopt;
  CollisionEvent e;
  e.a = IndexTuple::edge(a);
  e.b = IndexTuple::edge(b);
  e.t_c = hit->t_c;
  e.params = hit->params;
  return e;
}

template <typename Source>
std::vector<CollisionEvent> run_narrow_phase(std::size_t n, Source&& candidate_at,
                                             const MeshMotion& cloth,
                                             std::span<const MeshMotion> colliders,
                                             const SweepConfig& config) {
  std::vector<std::optional<CollisionEvent>> slots(n);
  detail::parallel_for(n, config.threads, [&](std::size_t i) {
    slots[i] = test_candidate(candidate_at(i), cloth, colliders, config.tolerances);
  });
  std::vector<CollisionEvent> events;
  for (auto& s : slots)
    if (s) events.push_back(*s);
  std::sort(events.begin(), events.end(), event_less);
  if (config.earliest_per_vertex) events = keep_earliest_per_vertex(events);
  return events;
}

}  // namespace

std::string_view to_string(ContactKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ContactKind> parse_contact_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ContactKind>(i);
  return std::nullopt;
}

bool IndexTuple::shares_vertex(const IndexTuple& other) const {
  for (Index x : indices())
    for (Index y : other.indices())
      if (x == y) return true;
  return false;
}

bool event_less(const CollisionEvent& x, const CollisionEvent& y) {
  return std::tie(x.kind, x.mesh_a, x.a, x.mesh_b, x.b, x.t_c) <
         std::tie(y.kind, y.mesh_a, y.a, y.mesh_b, y.b, y.t_c);
}

MeshMotion::MeshMotion(const Mesh& mesh, std::span<const Vec3> start, std::span<const Vec3> end)
    : mesh_(&mesh), start_(start), end_(end) {
  if (start.size() != mesh.vertex_count() || end.size() != mesh.vertex_count()) {
    throw Error("mesh motion: frames have " + std::to_string(start.size()) + "/" +
                std::to_string(end.size()) + " positions, mesh has " +
                std::to_string(mesh.vertex_count()));
  }
}

std::optional<CollisionEvent> test_candidate(const Candidate& c, const MeshMotion& cloth,
                                             std::span<const MeshMotion> colliders,
                                             const KernelTolerances& tol) {
  std::optional<CollisionEvent> e;
  switch (c.kind) {
    case ContactKind::VF:
      e = vertex_face(cloth, c.a, colliders[c.collider], c.b, tol);
      if (e) e->mesh_b = c.collider;
      break;
    case ContactKind::EE:
      e = edge_edge(cloth, c.a, colliders[c.collider], c.b, tol);
      if (e) e->mesh_b = c.collider;
      break;
    case ContactKind::FV:
      e = vertex_face(colliders[c.collider], c.a, cloth, c.b, tol);
      if (e) e->mesh_a = c.collider;
      break;
    case ContactKind::SelfVF:
      e = vertex_face(cloth, c.a, cloth, c.b, tol);
      break;
    case ContactKind::SelfEE:
      e = edge_edge(cloth, c.a, cloth, c.b, tol);
      break;
  }
  if (e) e->kind = c.kind;
  return e;
}

std::vector<CollisionEvent> sweep(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                                  const SweepConfig& config) {
  const CandidateSet candidates = build_broadphase(cloth, colliders, config);
  const std::vector<Candidate> pairs = filter_adjacent(candidates.pairs, cloth.mesh());
  return run_narrow_phase(
      pairs.size(), [&](std::size_t i) { return pairs[i]; }, cloth, colliders, config);
}

std::vector<CollisionEvent> sweep_exhaustive(const MeshMotion& cloth,
                                             std::span<const MeshMotion> colliders,
                                             const SweepConfig& config) {
  const CandidateSet all = enumerate_all_pairs(cloth, colliders, config);
  const std::vector<Candidate> pairs = filter_adjacent(all.pairs, cloth.mesh());
  return run_narrow_phase(
      pairs.size(), [&](std::size_t i) { return pairs[i]; }, cloth, colliders, config);
}

void cloth_vertices(const CollisionEvent& e, std::vector<Index>& out) {
  if (e.mesh_a == kClothTag)
    for (Index v : e.a.indices()) out.push_back(v);
  if (e.mesh_b == kClothTag)
    for (Index v : e.b.indices()) out.push_back(v);
}

std::vector<CollisionEvent> keep_earliest_per_vertex(std::span<const CollisionEvent> events) {
  // vertex -> index of its earliest event
  std::vector<std::pair<Index, std::size_t>> best;
  std::vector<Index> verts;
  for (std::size_t i = 0; i < events.size(); ++i) {
    verts.clear();
    cloth_vertices(events[i], verts);
    for (Index v : verts) best.emplace_back(v, i);
  }
  std::sort(best.begin(), best.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    if (events[x.second].t_c != events[y.second].t_c)
      return events[x.second].t_c < events[y.second].t_c;
    return x.second < y.second;
  });
  std::vector<bool> keep(events.size(), false);
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (i == 0 || best[i].first != best[i - 1].first) keep[best[i].second] = true;
  }
  std::vector<CollisionEvent> out;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (keep[i]) out.push_back(events[i]);
  return out;
}

}  // namespace clothccd
