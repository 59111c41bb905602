#include <array>
#include <cmath>
#include <map>
#include <string>

#include <json.hpp>

#include "clothccd/io.hpp"
#include "clothccd/sim.hpp"

namespace clothccd {

namespace {

// Flips faces whose normal points toward the centroid of a convex, closed
// vertex set, leaving every face wound outward.
std::vector<Face> orient_outward(const std::vector<Vec3>& x, std::vector<Face> faces) {
  Vec3 center = Vec3::Zero();
  for (const Vec3& p : x) center += p;
  center /= static_cast<double>(x.size());
  for (Face& f : faces) {
    const Vec3 n = (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]);
    const Vec3 c = (x[f[0]] + x[f[1]] + x[f[2]]) / 3.0;
    if (n.dot(c - center) < 0.0) std::swap(f[1], f[2]);
  }
  return faces;
}

int default_resolution(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::DrapeOnObject: return 21;
    case ScenarioKind::HangTwoPins: return 11;
    case ScenarioKind::GraspLift: return 15;
  }
  return 11;
}

double default_size(ScenarioKind kind) {
  return kind == ScenarioKind::DrapeOnObject ? 2.0 : 1.0;
}

SimScene grid_scene(int resolution, double size, const Vec3& offset, const SimParams& params) {
  std::vector<bool> shear;
  const Mesh flat = make_grid(resolution, size, &shear);
  std::vector<Vec3> placed = flat.rest_positions();
  for (Vec3& p : placed) p += offset;
  SimScene scene;
  scene.cloth = std::make_shared<const Mesh>(placed, flat.faces());
  scene.initial = FrameState(placed);
  scene.shear_edges = std::move(shear);
  scene.params = params;
  return scene;
}

ColliderTrack static_collider(Mesh mesh) {
  return ColliderTrack{std::make_shared<const Mesh>(std::move(mesh)),
                       {Eigen::Isometry3d::Identity()}};
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::DrapeOnObject: return "drape_on_object";
    case ScenarioKind::HangTwoPins: return "hang_two_pins";
    case ScenarioKind::GraspLift: return "grasp_lift";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (ScenarioKind k :
       {ScenarioKind::DrapeOnObject, ScenarioKind::HangTwoPins, ScenarioKind::GraspLift})
    if (to_string(k) == name) return k;
  throw Error("unknown scenario '" + std::string(name) +
              "' (expected drape_on_object, hang_two_pins or grasp_lift)");
}

Mesh make_grid(int resolution, double size, std::vector<bool>* shear_edges) {
  if (resolution < 2) throw Error("grid resolution must be at least 2");
  if (!(size > 0.0)) throw Error("grid size must be positive");
  const double step = size / (resolution - 1);
  std::vector<Vec3> x;
  x.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i)
      x.emplace_back(-0.5 * size + i * step, -0.5 * size + j * step, 0.0);
  std::vector<Face> faces;
  auto id = [resolution](int i, int j) { return static_cast<Index>(j * resolution + i); };
  for (int j = 0; j + 1 < resolution; ++j)
    for (int i = 0; i + 1 < resolution; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  Mesh mesh(std::move(x), std::move(faces));
  if (shear_edges) {
    shear_edges->clear();
    for (const Edge& e : mesh.edges()) {
      const int di = std::abs(e.a % resolution - e.b % resolution);
      const int dj = std::abs(e.a / resolution - e.b / resolution);
      shear_edges->push_back(di == 1 && dj == 1);
    }
  }
  return mesh;
}

Mesh make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw Error("icosphere subdivisions must be non-negative");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> x{{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : x) p.normalize();
  std::vector<Face> faces{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                          {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                          {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                          {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      x.push_back((x[a] + x[b]).normalized());
      const auto id = static_cast<Index>(x.size() - 1);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const Index ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  faces = orient_outward(x, std::move(faces));
  return Mesh(std::move(x), std::move(faces));
}

Mesh make_box(const Vec3& lo, const Vec3& hi) {
  if (!(lo.array() < hi.array()).all()) throw Error("box corners must satisfy lo < hi");
  std::vector<Vec3> x;
  for (int k = 0; k < 8; ++k)
    x.emplace_back((k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(), (k & 4) ? hi.z() : lo.z());
  std::vector<Face> faces{{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                          {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  faces = orient_outward(x, std::move(faces));
  return Mesh(std::move(x), std::move(faces));
}

SimScene generate_scenario(ScenarioKind kind, const ScenarioParams& params) {
  const int res = params.resolution > 0 ? params.resolution : default_resolution(kind);
  if (params.resolution < 0 || res < 2) throw Error("grid resolution must be at least 2");
  const double size = params.size > 0.0 ? params.size : default_size(kind);

  switch (kind) {
    case ScenarioKind::DrapeOnObject: {
      SimScene scene = grid_scene(res, size, Vec3(0.0, 0.0, 1.25), params.sim);
      scene.colliders.push_back(static_collider(
          params.collider_obj.empty() ? make_icosphere(3) : load_obj(params.collider_obj)));
      return scene;
    }
    case ScenarioKind::HangTwoPins: {
      SimScene scene = grid_scene(res, size, Vec3(0.0, 0.0, 1.0), params.sim);
      for (Index corner : {Index{0}, static_cast<Index>(res - 1)})
        scene.pins.push_back(PinTrack{corner, {scene.initial.positions[corner]}});
      return scene;
    }
    case ScenarioKind::GraspLift: {
      if (params.frame_count < 1) throw Error("grasp_lift needs at least one frame");
      SimScene scene = grid_scene(res, size, Vec3(0.0, 0.0, 0.02), params.sim);
      scene.colliders.push_back(
          static_collider(make_box(Vec3(-1.0, -1.0, -0.1), Vec3(1.0, 1.0, 0.0))));
      PinTrack grip{0, {}};
      const Vec3 start = scene.initial.positions[0];
      for (std::size_t f = 0; f <= params.frame_count; ++f) {
        const double s = static_cast<double>(f) / static_cast<double>(params.frame_count);
        grip.positions.push_back(start + Vec3(0.0, 0.0, params.lift_height * s));
      }
      scene.pins.push_back(std::move(grip));
      return scene;
    }
  }
  throw Error("unknown scenario kind");
}

namespace {

Vec3 read_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void read_params(const nlohmann::json& j, SimParams& p) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const nlohmann::json& v = it.value();
    if (k == "dt") p.dt = v.get<double>();
    else if (k == "gravity") p.gravity = read_vec3(v);
    else if (k == "stretch_stiffness") p.stretch_stiffness = v.get<double>();
    else if (k == "shear_stiffness") p.shear_stiffness = v.get<double>();
    else if (k == "bend_stiffness") p.bend_stiffness = v.get<double>();
    else if (k == "spring_damping") p.spring_damping = v.get<double>();
    else if (k == "density") p.density = v.get<double>();
    else if (k == "friction") p.friction = v.get<double>();
    else if (k == "damping") p.damping = v.get<double>();
    else if (k == "epsilon") p.epsilon = v.get<double>();
    else if (k == "max_iterations") p.max_iterations = v.get<int>();
    else if (k == "cell_size") p.cell_size = v.get<double>();
    else throw Error("unknown params key '" + k + "'");
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

std::pair<SimScene, std::size_t> scene_from_json(const std::string& text,
                                                 const std::string& source_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(source_name, line_of(text, e.byte), "malformed JSON");
  }
  try {
    if (!doc.is_object()) throw Error("scene configuration must be a JSON object");
    ScenarioParams sp;
    std::string scenario;
    const nlohmann::json* pins = nullptr;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& k = it.key();
      const nlohmann::json& v = it.value();
      if (k == "scenario") scenario = v.get<std::string>();
      else if (k == "resolution") sp.resolution = v.get<int>();
      else if (k == "size") sp.size = v.get<double>();
      else if (k == "lift_height") sp.lift_height = v.get<double>();
      else if (k == "frame_count") sp.frame_count = v.get<std::size_t>();
      else if (k == "collider_obj") sp.collider_obj = v.get<std::string>();
      else if (k == "params") read_params(v, sp.sim);
      else if (k == "pins") pins = &v;
      else throw Error("unknown key '" + k + "'");
    }
    if (scenario.empty()) throw Error("missing 'scenario'");
    SimScene scene = generate_scenario(parse_scenario_kind(scenario), sp);
    if (pins) {
      scene.pins.clear();
      for (const nlohmann::json& pin : *pins) {
        PinTrack track{pin.at("vertex").get<Index>(), {}};
        for (const nlohmann::json& p : pin.at("positions")) track.positions.push_back(read_vec3(p));
        scene.pins.push_back(std::move(track));
      }
    }
    scene.check();
    return {std::move(scene), sp.frame_count};
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source_name, 0, std::string("invalid scene configuration: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(source_name, 0, std::string("invalid scene configuration: ") + e.what());
  }
}

}  // namespace clothccd
