#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "clothccd/event_io.hpp"
#include "clothccd/pipeline.hpp"
#include "clothccd/sim.hpp"
#include "support.hpp"

using namespace clothccd;
namespace ct = clothccd::testing;

namespace {

std::vector<Vec3> shifted(std::vector<Vec3> x, const Vec3& d) {
  for (Vec3& p : x) p += d;
  return x;
}

// Strip of 2 x 7 vertices along x whose right half, hinged at x = 0.5, is
// folded over the left half and swept down through it in one step.
struct FoldedStrip {
  Mesh mesh;
  std::vector<Vec3> start, end;
};

FoldedStrip folded_strip() {
  constexpr int kCols = 7;
  std::vector<Vec3> rest, start, end;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < kCols; ++i) {
      const double x = i / double(kCols - 1), y = 0.2 * j;
      rest.emplace_back(x, y, 0.0);
      const double d = x - 0.5;
      if (d <= 0.0) {
        start.emplace_back(x, y, 0.0);
        end.emplace_back(x, y, 0.0);
      } else {
        const double yf = 0.023 + 0.77 * y;
        start.emplace_back(0.5 - 0.9 * d, yf, 0.3 * d + 0.01);
        end.emplace_back(0.5 - 0.87 * d, yf + 0.01, -0.2 * d - 0.013);
      }
    }
  }
  std::vector<Face> faces;
  for (int i = 0; i + 1 < kCols; ++i) {
    faces.push_back({i, i + 1, kCols + i + 1});
    faces.push_back({i, kCols + i + 1, kCols + i});
  }
  return {Mesh(rest, faces), start, end};
}

using PairKey = std::tuple<ContactKind, IndexTuple, IndexTuple>;

}  // namespace

TEST(Broadphase, SeparatedPrimitivesAreNotCandidates) {
  const Mesh tri({Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.1, 0)}, {{0, 1, 2}});
  const auto far = shifted(tri.rest_positions(), Vec3(5, 5, 5));
  const MeshMotion cloth(tri, tri.rest_positions(), tri.rest_positions());
  const std::vector<MeshMotion> colliders{MeshMotion(tri, far, far)};
  SweepConfig cfg;
  cfg.cell_size = 0.1;
  cfg.kinds = KindSet().with(ContactKind::VF).with(ContactKind::EE).with(ContactKind::FV);
  EXPECT_TRUE(build_broadphase(cloth, colliders, cfg).pairs.empty());
  const auto near = shifted(tri.rest_positions(), Vec3(0.05, 0.05, 0.0));
  const std::vector<MeshMotion> touching{MeshMotion(tri, near, near)};
  EXPECT_FALSE(build_broadphase(cloth, touching, cfg).pairs.empty());
}

TEST(Broadphase, CrossingPairIsCandidate) {
  const auto s = ct::crossing_scene();
  const MeshMotion cloth(s.cloth, s.start, s.end);
  const std::vector<MeshMotion> colliders{MeshMotion(s.collider, s.collider_x, s.collider_x)};
  const auto set = build_broadphase(cloth, colliders, {});
  const Candidate want{ContactKind::VF, 0, 0, 0};
  EXPECT_TRUE(std::binary_search(set.pairs.begin(), set.pairs.end(), want));
}

TEST(Broadphase, GridOverSpherePrunesMostPairs) {
  std::vector<bool> shear;
  const Mesh grid = make_grid(21, 2.0, &shear);
  const auto start = shifted(grid.rest_positions(), Vec3(0, 0, 1.02));
  const auto end = shifted(grid.rest_positions(), Vec3(0, 0, 0.97));
  const Mesh sphere = make_icosphere(3);
  const MeshMotion cloth(grid, start, end);
  const std::vector<MeshMotion> colliders{
      MeshMotion(sphere, sphere.rest_positions(), sphere.rest_positions())};
  const auto set = build_broadphase(cloth, colliders, {});
  EXPECT_GT(set.pairs.size(), 0u);
  EXPECT_LT(double(set.pairs.size()), 0.05 * double(set.all_pairs_count));
  EXPECT_EQ(set.all_pairs_count, enumerate_all_pairs(cloth, colliders, {}).pairs.size());
}

TEST(Adjacency, Examples) {
  const Mesh m(std::vector<Vec3>(10, Vec3::Zero()), {{3, 4, 5}, {0, 1, 2}});
  const std::vector<Candidate> in{{ContactKind::SelfVF, -1, 3, 0},
                                  {ContactKind::SelfVF, -1, 9, 0},
                                  {ContactKind::VF, 0, 3, 0}};
  const auto out = filter_adjacent(in, m);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].a, 9);
  EXPECT_EQ(out[1].kind, ContactKind::VF);

  // Edges (0,1) and (1,2) of face (0,1,2).
  const auto& edges = m.edges();
  const auto e01 = std::find(edges.begin(), edges.end(), Edge{0, 1}) - edges.begin();
  const auto e12 = std::find(edges.begin(), edges.end(), Edge{1, 2}) - edges.begin();
  const std::vector<Candidate> ee{
      {ContactKind::SelfEE, -1, static_cast<Index>(e01), static_cast<Index>(e12)}};
  EXPECT_TRUE(filter_adjacent(ee, m).empty());
}

TEST(Sweep, SingleTunnelingVertex) {
  const auto s = ct::crossing_scene();
  const std::vector<MeshMotion> colliders{MeshMotion(s.collider, s.collider_x, s.collider_x)};
  const auto events = sweep(MeshMotion(s.cloth, s.start, s.end), colliders, {});
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, ContactKind::VF);
  EXPECT_EQ(events[0].mesh_a, kClothTag);
  EXPECT_EQ(events[0].a, IndexTuple::vertex(0));
  EXPECT_EQ(events[0].mesh_b, 0);
  EXPECT_NEAR(events[0].t_c, 0.5, 1e-12);
}

TEST(Sweep, StaticSeparatedMeshesHaveNoEvents) {
  const Mesh grid = make_grid(5, 1.0);
  const Mesh box = make_box(Vec3(-1, -1, -2), Vec3(1, 1, -1));
  const std::vector<MeshMotion> colliders{
      MeshMotion(box, box.rest_positions(), box.rest_positions())};
  EXPECT_TRUE(
      sweep(MeshMotion(grid, grid.rest_positions(), grid.rest_positions()), colliders, {}).empty());
}

TEST(Sweep, MeshFrameMismatchThrows) {
  const Mesh grid = make_grid(3, 1.0);
  std::vector<Vec3> short_frame(4, Vec3::Zero());
  EXPECT_THROW(MeshMotion(grid, short_frame, short_frame), Error);
}

TEST(Sweep, FoldedStripMatchesOracle) {
  const auto strip = folded_strip();
  const MeshMotion motion(strip.mesh, strip.start, strip.end);
  const auto events = sweep(motion, {}, {});

  std::map<PairKey, double> got;
  for (const auto& e : events) got[{e.kind, e.a, e.b}] = e.t_c;
  EXPECT_FALSE(got.empty());

  std::map<PairKey, double> want;
  std::size_t grazing = 0;
  const auto& faces = strip.mesh.faces();
  const auto& edges = strip.mesh.edges();
  const auto& x0 = strip.start;
  const auto& x1 = strip.end;
  for (Index v = 0; v < Index(x0.size()); ++v) {
    for (const Face& f : faces) {
      if (f[0] == v || f[1] == v || f[2] == v) continue;
      const auto o = ct::point_triangle_oracle(x0[v], x1[v], {x0[f[0]], x0[f[1]], x0[f[2]]},
                                               {x1[f[0]], x1[f[1]], x1[f[2]]});
      const PairKey key{ContactKind::SelfVF, IndexTuple::vertex(v), IndexTuple::triangle(f)};
      if (o.grazing) {
        ++grazing;
        got.erase(key);
      } else if (o.t) {
        want[key] = *o.t;
      }
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const Edge a = edges[i], b = edges[j];
      if (a.a == b.a || a.a == b.b || a.b == b.a || a.b == b.b) continue;
      const auto o = ct::edge_edge_oracle({x0[a.a], x0[a.b]}, {x1[a.a], x1[a.b]},
                                          {x0[b.a], x0[b.b]}, {x1[b.a], x1[b.b]});
      const PairKey key{ContactKind::SelfEE, IndexTuple::edge(a), IndexTuple::edge(b)};
      if (o.grazing) {
        ++grazing;
        got.erase(key);
      } else if (o.t) {
        want[key] = *o.t;
      }
    }
  }
  ASSERT_EQ(got.size(), want.size()) << grazing << " grazing pairs excluded";
  for (const auto& [key, t] : want) {
    auto it = got.find(key);
    ASSERT_NE(it, got.end());
    EXPECT_NEAR(it->second, t, 1e-6);
  }
}

TEST(SweepProperty, BroadphaseFindsEveryExhaustiveEvent) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mesh box = make_box(Vec3(-0.3, -0.3, -0.3), Vec3(0.3, 0.3, 0.3));
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh grid = make_grid(6, 1.0);
    std::vector<Vec3> start = grid.rest_positions(), end;
    for (Vec3& p : start) p += Vec3(0.1 * u(rng), 0.1 * u(rng), 0.4 + 0.2 * u(rng));
    for (const Vec3& p : start) end.push_back(p + Vec3(0.2 * u(rng), 0.2 * u(rng), -0.6 + 0.3 * u(rng)));
    const std::vector<MeshMotion> colliders{
        MeshMotion(box, box.rest_positions(), box.rest_positions())};
    const MeshMotion cloth(grid, start, end);
    const auto fast = sweep(cloth, colliders, {});
    const auto slow = sweep_exhaustive(cloth, colliders, {});
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      EXPECT_EQ(fast[i].kind, slow[i].kind);
      EXPECT_EQ(fast[i].a, slow[i].a);
      EXPECT_EQ(fast[i].b, slow[i].b);
      EXPECT_NEAR(fast[i].t_c, slow[i].t_c, 1e-9);
    }
  }
}

TEST(SweepProperty, DeterministicAcrossThreads) {
  const SimScene scene = generate_scenario(ScenarioKind::DrapeOnObject);
  std::vector<Vec3> end = scene.initial.positions;
  for (std::size_t i = 0; i < end.size(); ++i)
    end[i] += Vec3(0.01 * std::sin(double(i)), 0.01 * std::cos(3.0 * i), -0.45);
  const auto sphere = scene.colliders[0].positions(0);
  const std::vector<MeshMotion> colliders{
      MeshMotion(*scene.colliders[0].mesh, sphere, sphere)};
  const MeshMotion cloth(*scene.cloth, scene.initial.positions, end);
  SweepConfig one;
  one.threads = 1;
  SweepConfig four;
  four.threads = 4;
  const std::string a = format_events(sweep(cloth, colliders, one));
  EXPECT_GT(a.size(), 100u);
  EXPECT_EQ(a, format_events(sweep(cloth, colliders, one)));
  EXPECT_EQ(a, format_events(sweep(cloth, colliders, four)));
}

TEST(SweepProperty, RestingMeshHasNoEvents) {
  for (int res : {3, 8, 15}) {
    const Mesh grid = make_grid(res, 1.0);
    EXPECT_TRUE(sweep(MeshMotion(grid, grid.rest_positions(), grid.rest_positions()), {}, {})
                    .empty());
  }
}

TEST(SweepProperty, FilterAdjacentIsMonotone) {
  const Mesh grid = make_grid(6, 1.0);
  const MeshMotion motion(grid, grid.rest_positions(), grid.rest_positions());
  const auto all = enumerate_all_pairs(motion, {}, {}).pairs;
  const auto kept = filter_adjacent(all, grid);
  EXPECT_LT(kept.size(), all.size());
  EXPECT_TRUE(std::includes(all.begin(), all.end(), kept.begin(), kept.end()));
}

TEST(Sweep, EarliestPerVertexKeepsOneEventPerVertex) {
  const auto strip = folded_strip();
  const MeshMotion motion(strip.mesh, strip.start, strip.end);
  const auto all = sweep(motion, {}, {});
  const auto kept = keep_earliest_per_vertex(all);
  EXPECT_LE(kept.size(), all.size());
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end(), event_less));
  // Every vertex of every event is covered by an event no later than its own.
  std::vector<Index> verts;
  for (const auto& e : all) {
    verts.clear();
    cloth_vertices(e, verts);
    for (Index v : verts) {
      double best = 2.0;
      std::vector<Index> kv;
      for (const auto& k : kept) {
        kv.clear();
        cloth_vertices(k, kv);
        if (std::find(kv.begin(), kv.end(), v) != kv.end()) best = std::min(best, k.t_c);
      }
      EXPECT_LE(best, e.t_c);
    }
  }
}

TEST(Kinds, NamesRoundTrip) {
  for (ContactKind k : {ContactKind::VF, ContactKind::EE, ContactKind::FV, ContactKind::SelfVF,
                        ContactKind::SelfEE})
    EXPECT_EQ(parse_contact_kind(to_string(k)), k);
  EXPECT_FALSE(parse_contact_kind("VV"));
}
