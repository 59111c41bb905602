#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "clothccd/pipeline.hpp"

namespace clothccd {

namespace {

struct Box {
  Vec3 lo;
  Vec3 hi;

  bool overlaps(const Box& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

// Primitives spanning more cells than this skip the hash and are checked
// against everything by box overlap.
constexpr std::int64_t kMaxCellsPerBox = 4096;

template <std::size_t N>
Box swept_box(const MeshMotion& m, const std::array<Index, N>& ids, double pad) {
  Box b{m.start()[ids[0]], m.start()[ids[0]]};
  for (Index i : ids) {
    for (const Vec3& p : {m.start()[i], m.end()[i]}) {
      b.lo = b.lo.cwiseMin(p);
      b.hi = b.hi.cwiseMax(p);
    }
  }
  b.lo.array() -= pad;
  b.hi.array() += pad;
  return b;
}

std::vector<Box> vertex_boxes(const MeshMotion& m, double pad) {
  std::vector<Box> out(m.mesh().vertex_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = swept_box(m, std::array<Index, 1>{static_cast<Index>(i)}, pad);
  return out;
}

std::vector<Box> edge_boxes(const MeshMotion& m, double pad) {
  std::vector<Box> out;
  out.reserve(m.mesh().edge_count());
  for (const Edge& e : m.mesh().edges()) out.push_back(swept_box(m, std::array<Index, 2>{e.a, e.b}, pad));
  return out;
}

std::vector<Box> face_boxes(const MeshMotion& m, double pad) {
  std::vector<Box> out;
  out.reserve(m.mesh().face_count());
  for (const Face& f : m.mesh().faces()) out.push_back(swept_box(m, f, pad));
  return out;
}

struct CellRange {
  std::array<std::int64_t, 3> lo;
  std::array<std::int64_t, 3> hi;

  std::int64_t count() const {
    return (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1);
  }
};

CellRange cells_of(const Box& b, double cell) {
  CellRange r{};
  for (int k = 0; k < 3; ++k) {
    r.lo[k] = static_cast<std::int64_t>(std::floor(b.lo[k] / cell));
    r.hi[k] = static_cast<std::int64_t>(std::floor(b.hi[k] / cell));
  }
  return r;
}

// Distinct cells may alias after packing; aliasing only adds candidates,
// which the box overlap test then rejects.
std::uint64_t cell_key(std::int64_t x, std::int64_t y, std::int64_t z) {
  constexpr std::uint64_t mask = (1ull << 21) - 1;
  return (static_cast<std::uint64_t>(x) & mask) |
         ((static_cast<std::uint64_t>(y) & mask) << 21) |
         ((static_cast<std::uint64_t>(z) & mask) << 42);
}

template <typename Emit>
void hashed_pairs(const std::vector<Box>& queries, const std::vector<Box>& targets,
                  double cell, bool upper_only, Emit&& emit) {
  std::unordered_map<std::uint64_t, std::vector<Index>> grid;
  std::vector<Index> oversized;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const CellRange r = cells_of(targets[t], cell);
    if (r.count() > kMaxCellsPerBox || r.count() <= 0) {
      oversized.push_back(static_cast<Index>(t));
      continue;
    }
    for (auto x = r.lo[0]; x <= r.hi[0]; ++x)
      for (auto y = r.lo[1]; y <= r.hi[1]; ++y)
        for (auto z = r.lo[2]; z <= r.hi[2]; ++z)
          grid[cell_key(x, y, z)].push_back(static_cast<Index>(t));
  }

  std::vector<Index> stamp(targets.size(), -1);
  auto consider = [&](Index q, Index t) {
    if (upper_only && t <= q) return;
    if (stamp[t] == q) return;
    stamp[t] = q;
    if (queries[q].overlaps(targets[t])) emit(q, t);
  };
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto q = static_cast<Index>(qi);
    const CellRange r = cells_of(queries[q], cell);
    if (r.count() > kMaxCellsPerBox || r.count() <= 0) {
      for (std::size_t t = 0; t < targets.size(); ++t) consider(q, static_cast<Index>(t));
      continue;
    }
    for (auto x = r.lo[0]; x <= r.hi[0]; ++x)
      for (auto y = r.lo[1]; y <= r.hi[1]; ++y)
        for (auto z = r.lo[2]; z <= r.hi[2]; ++z) {
          auto it = grid.find(cell_key(x, y, z));
          if (it == grid.end()) continue;
          for (Index t : it->second) consider(q, t);
        }
    for (Index t : oversized) consider(q, t);
  }
}

double scene_extent(const MeshMotion& cloth, std::span<const MeshMotion> colliders) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  auto grow = [&](const MeshMotion& m) {
    for (auto span : {m.start(), m.end()})
      for (const Vec3& p : span) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
  };
  grow(cloth);
  for (const MeshMotion& c : colliders) grow(c);
  if (!(lo.array() <= hi.array()).all()) return 0.0;
  return (hi - lo).norm();
}

std::size_t all_pairs_count(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                            KindSet kinds) {
  const std::size_t nv = cloth.mesh().vertex_count();
  const std::size_t ne = cloth.mesh().edge_count();
  const std::size_t nf = cloth.mesh().face_count();
  std::size_t n = 0;
  if (kinds.contains(ContactKind::SelfVF)) n += nv * nf;
  if (kinds.contains(ContactKind::SelfEE)) n += ne * (ne - (ne > 0)) / 2;
  for (const MeshMotion& c : colliders) {
    if (kinds.contains(ContactKind::VF)) n += nv * c.mesh().face_count();
    if (kinds.contains(ContactKind::EE)) n += ne * c.mesh().edge_count();
    if (kinds.contains(ContactKind::FV)) n += c.mesh().vertex_count() * nf;
  }
  return n;
}

}  // namespace

double resolve_cell_size(const MeshMotion& cloth, double requested) {
  if (requested > 0.0) return requested;
  const double mean = cloth.mesh().mean_edge_length();
  return mean > 0.0 ? mean : 1.0;
}

CandidateSet build_broadphase(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                              const SweepConfig& config) {
  CandidateSet out;
  out.cell_size = resolve_cell_size(cloth, config.cell_size);
  out.all_pairs_count = all_pairs_count(cloth, colliders, config.kinds);
  const double pad = config.tolerances.inside * std::max(scene_extent(cloth, colliders), 1e-300);
  const KindSet kinds = config.kinds;
  const double cell = out.cell_size;

  const bool need_vertices = kinds.contains(ContactKind::VF) || kinds.contains(ContactKind::SelfVF);
  const bool need_edges = kinds.contains(ContactKind::EE) || kinds.contains(ContactKind::SelfEE);
  const bool need_faces = kinds.contains(ContactKind::FV) || kinds.contains(ContactKind::SelfVF);
  const std::vector<Box> cv = need_vertices ? vertex_boxes(cloth, pad) : std::vector<Box>{};
  const std::vector<Box> ce = need_edges ? edge_boxes(cloth, pad) : std::vector<Box>{};
  const std::vector<Box> cf = need_faces ? face_boxes(cloth, pad) : std::vector<Box>{};

  auto emitter = [&](ContactKind kind, int collider) {
    return [&out, kind, collider](Index a, Index b) {
      out.pairs.push_back({kind, collider, a, b});
    };
  };
  if (kinds.contains(ContactKind::SelfVF)) hashed_pairs(cv, cf, cell, false, emitter(ContactKind::SelfVF, -1));
  if (kinds.contains(ContactKind::SelfEE)) hashed_pairs(ce, ce, cell, true, emitter(ContactKind::SelfEE, -1));
  for (std::size_t k = 0; k < colliders.size(); ++k) {
    const MeshMotion& c = colliders[k];
    const int tag = static_cast<int>(k);
    if (kinds.contains(ContactKind::VF)) hashed_pairs(cv, face_boxes(c, pad), cell, false, emitter(ContactKind::VF, tag));
    if (kinds.contains(ContactKind::EE)) hashed_pairs(ce, edge_boxes(c, pad), cell, false, emitter(ContactKind::EE, tag));
    if (kinds.contains(ContactKind::FV)) hashed_pairs(vertex_boxes(c, pad), cf, cell, false, emitter(ContactKind::FV, tag));
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

CandidateSet enumerate_all_pairs(const MeshMotion& cloth, std::span<const MeshMotion> colliders,
                                 const SweepConfig& config) {
  CandidateSet out;
  out.cell_size = 0.0;
  out.all_pairs_count = all_pairs_count(cloth, colliders, config.kinds);
  out.pairs.reserve(out.all_pairs_count);
  const auto nv = static_cast<Index>(cloth.mesh().vertex_count());
  const auto ne = static_cast<Index>(cloth.mesh().edge_count());
  const auto nf = static_cast<Index>(cloth.mesh().face_count());
  const KindSet kinds = config.kinds;
  for (std::size_t k = 0; k < colliders.size(); ++k) {
    const int tag = static_cast<int>(k);
    const auto cv = static_cast<Index>(colliders[k].mesh().vertex_count());
    const auto ce = static_cast<Index>(colliders[k].mesh().edge_count());
    const auto cf = static_cast<Index>(colliders[k].mesh().face_count());
    if (kinds.contains(ContactKind::VF))
      for (Index a = 0; a < nv; ++a)
        for (Index b = 0; b < cf; ++b) out.pairs.push_back({ContactKind::VF, tag, a, b});
    if (kinds.contains(ContactKind::EE))
      for (Index a = 0; a < ne; ++a)
        for (Index b = 0; b < ce; ++b) out.pairs.push_back({ContactKind::EE, tag, a, b});
    if (kinds.contains(ContactKind::FV))
      for (Index a = 0; a < cv; ++a)
        for (Index b = 0; b < nf; ++b) out.pairs.push_back({ContactKind::FV, tag, a, b});
  }
  if (kinds.contains(ContactKind::SelfVF))
    for (Index a = 0; a < nv; ++a)
      for (Index b = 0; b < nf; ++b) out.pairs.push_back({ContactKind::SelfVF, -1, a, b});
  if (kinds.contains(ContactKind::SelfEE))
    for (Index a = 0; a < ne; ++a)
      for (Index b = a + 1; b < ne; ++b) out.pairs.push_back({ContactKind::SelfEE, -1, a, b});
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

std::vector<Candidate> filter_adjacent(std::span<const Candidate> pairs, const Mesh& cloth) {
  std::vector<Candidate> out;
  out.reserve(pairs.size());
  for (const Candidate& c : pairs) {
    if (c.kind == ContactKind::SelfVF) {
      const Face& f = cloth.faces()[c.b];
      if (c.a == f[0] || c.a == f[1] || c.a == f[2]) continue;
    } else if (c.kind == ContactKind::SelfEE) {
      const Edge& e0 = cloth.edges()[c.a];
      const Edge& e1 = cloth.edges()[c.b];
      if (e0.a == e1.a || e0.a == e1.b || e0.b == e1.a || e0.b == e1.b) continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace clothccd
