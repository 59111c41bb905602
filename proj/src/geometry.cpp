#include "clothccd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clothccd {

FormatError::FormatError(std::string path, std::size_t record,
                         const std::string& what)
    : Error(path + ":" + std::to_string(record) + ": " + what),
      path_(std::move(path)),
      record_(record) {}

std::vector<Edge> derive_edges(std::span<const Face> faces) {
  std::vector<Edge> edges;
  edges.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const Index i = f[k];
      const Index j = f[(k + 1) % 3];
      if (i == j) continue;
      edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

namespace {

// Builds CSR adjacency from (vertex, item) pairs; items end up ascending
// per vertex because they are pushed in increasing item order.
void build_csr(std::size_t vertex_count,
               const std::vector<std::pair<Index, Index>>& pairs,
               std::vector<Index>& offsets, std::vector<Index>& ids) {
  offsets.assign(vertex_count + 1, 0);
  for (const auto& [v, item] : pairs) ++offsets[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 0; i < vertex_count; ++i) offsets[i + 1] += offsets[i];
  ids.assign(pairs.size(), 0);
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [v, item] : pairs) ids[cursor[v]++] = item;
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> rest_positions, std::vector<Face> faces)
    : rest_(std::move(rest_positions)), faces_(std::move(faces)) {
  const auto n = static_cast<Index>(rest_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (Index v : faces_[f]) {
      if (v < 0 || v >= n) {
        throw Error("face index out of range: face " + std::to_string(f) +
                    " references vertex " + std::to_string(v) + " of " +
                    std::to_string(n));
      }
    }
  }
  edges_ = derive_edges(faces_);

  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(faces_.size() * 3);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    for (int k = 0; k < 3; ++k) {
      // a repeated index lists the face once for that vertex
      if (std::find(face.begin(), face.begin() + k, face[k]) != face.begin() + k)
        continue;
      pairs.emplace_back(face[k], static_cast<Index>(f));
    }
  }
  build_csr(rest_.size(), pairs, face_offsets_, face_ids_);

  pairs.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    pairs.emplace_back(edges_[e].a, static_cast<Index>(e));
    pairs.emplace_back(edges_[e].b, static_cast<Index>(e));
  }
  build_csr(rest_.size(), pairs, edge_offsets_, edge_ids_);
}

std::span<const Index> Mesh::vertex_faces(Index v) const {
  const auto b = static_cast<std::size_t>(face_offsets_.at(v));
  const auto e = static_cast<std::size_t>(face_offsets_.at(v + 1));
  return std::span<const Index>(face_ids_).subspan(b, e - b);
}

std::span<const Index> Mesh::vertex_edges(Index v) const {
  const auto b = static_cast<std::size_t>(edge_offsets_.at(v));
  const auto e = static_cast<std::size_t>(edge_offsets_.at(v + 1));
  return std::span<const Index>(edge_ids_).subspan(b, e - b);
}

double Mesh::mean_edge_length() const {
  if (edges_.empty()) return 0.0;
  double sum = 0.0;
  for (const Edge& e : edges_) sum += (rest_[e.a] - rest_[e.b]).norm();
  return sum / static_cast<double>(edges_.size());
}

void check_frame(const FrameState& frame, std::size_t vertex_count,
                 const char* what) {
  if (frame.positions.size() != vertex_count) {
    throw Error(std::string(what) + " has " +
                std::to_string(frame.positions.size()) +
                " positions, mesh has " + std::to_string(vertex_count));
  }
  for (std::size_t i = 0; i < frame.positions.size(); ++i) {
    if (!frame.positions[i].allFinite()) {
      throw Error(std::string(what) + " has a non-finite position at vertex " +
                  std::to_string(i));
    }
  }
  if (frame.velocities && frame.velocities->size() != vertex_count) {
    throw Error(std::string(what) + " velocity count does not match positions");
  }
}

void Trajectory::check() const {
  if (!mesh) throw Error("trajectory has no mesh");
  if (frames.empty()) throw Error("trajectory has no frames");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("trajectory dt must be > 0");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string what = "trajectory frame " + std::to_string(t);
    check_frame(frames[t], mesh->vertex_count(), what.c_str());
  }
}

std::vector<Vec3> derive_velocities(const FrameState& frame_t,
                                    const FrameState& frame_prev,
                                    double scale) {
  if (frame_t.size() != frame_prev.size()) {
    throw Error("derive_velocities: frame sizes differ (" +
                std::to_string(frame_t.size()) + " vs " +
                std::to_string(frame_prev.size()) + ")");
  }
  std::vector<Vec3> v(frame_t.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = scale * (frame_t.positions[i] - frame_prev.positions[i]);
  return v;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

ValidationReport validate_mesh(const Mesh& mesh, double area_tolerance) {
  ValidationReport report;
  const auto& x = mesh.rest_positions();
  std::vector<bool> referenced(mesh.vertex_count(), false);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    for (Index v : face) referenced[v] = true;
    const auto fi = static_cast<Index>(f);
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      report.issues.push_back({MeshIssue::Kind::RepeatedIndex, fi,
                               "repeated index in face " + std::to_string(f)});
      continue;
    }
    if (triangle_area(x[face[0]], x[face[1]], x[face[2]]) <= area_tolerance) {
      report.issues.push_back({MeshIssue::Kind::DegenerateFace, fi,
                               "degenerate face " + std::to_string(f)});
    }
  }
  for (std::size_t v = 0; v < referenced.size(); ++v) {
    if (!referenced[v]) {
      report.issues.push_back({MeshIssue::Kind::UnreferencedVertex,
                               static_cast<Index>(v),
                               "unreferenced vertex " + std::to_string(v)});
    }
  }
  return report;
}

void require_valid(const Mesh& mesh, double area_tolerance) {
  const ValidationReport report = validate_mesh(mesh, area_tolerance);
  if (!report.ok()) throw Error("invalid mesh: " + report.issues.front().message);
}

}  // namespace clothccd
