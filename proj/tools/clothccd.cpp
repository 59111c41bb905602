#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clothccd/event_io.hpp"
#include "clothccd/io.hpp"
#include "clothccd/json_writer.hpp"
#include "clothccd/metrics.hpp"
#include "clothccd/pipeline.hpp"
#include "clothccd/response.hpp"
#include "clothccd/sim.hpp"

#include "gradcheck.hpp"

namespace {

using namespace clothccd;

struct CommonOptions {
  double eps = kDefaultEpsilon;
  double tol = kDefaultRootTolerance;
  double inside_tol = KernelTolerances{}.inside;
  double cell_size = 0.0;
  int max_iters = kDefaultMaxIterations;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool strict = false;
  bool pretty = false;
  std::string output;

  SweepConfig sweep_config() const {
    SweepConfig c;
    c.cell_size = cell_size;
    c.tolerances.root = tol;
    c.tolerances.inside = inside_tol;
    c.threads = threads;
    return c;
  }
};

void add_sweep_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--tol", o.tol, "Root tolerance in normalized step time")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--inside-tol", o.inside_tol, "Relative inside/touching tolerance")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--cell-size", o.cell_size,
                  "Spatial hash cell size in meters (0 = mean cloth edge length)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, "Narrow-phase worker threads (0 = all cores)")
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, CommonOptions& o, const char* what) {
  cmd->add_option("--output", o.output, what);
  cmd->add_flag("--pretty", o.pretty, "Indent JSON reports");
}

void emit(const CommonOptions& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw FormatError(o.output, 0, "cannot open file for writing");
  out << text;
  if (!out) throw FormatError(o.output, 0, "write failed");
}

std::vector<Vec3> load_frame(const std::string& path, const Mesh& mesh) {
  const Mesh frame = load_obj(path);
  if (frame.vertex_count() != mesh.vertex_count())
    throw FormatError(path, 0,
                      "frame has " + std::to_string(frame.vertex_count()) + " vertices, mesh has " +
                          std::to_string(mesh.vertex_count()));
  return frame.rest_positions();
}

// Collider meshes plus optional per-frame position trajectories.
struct ColliderInputs {
  std::vector<std::string> meshes;
  std::vector<std::string> trajectories;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--collider-mesh", meshes, "Collider OBJ (repeatable)");
    cmd->add_option("--collider-trajectory", trajectories,
                    "CTRJ1 positions of the matching --collider-mesh (repeatable; omit for static)");
  }

  std::vector<Trajectory> load() const {
    if (!trajectories.empty() && trajectories.size() != meshes.size())
      throw CLI::ValidationError("--collider-trajectory",
                                 "must be given once per --collider-mesh or not at all");
    std::vector<Trajectory> out;
    for (std::size_t k = 0; k < meshes.size(); ++k) {
      auto mesh = std::make_shared<const Mesh>(load_obj(meshes[k]));
      if (trajectories.empty()) {
        Trajectory t;
        t.mesh = mesh;
        t.frames.emplace_back(mesh->rest_positions());
        out.push_back(std::move(t));
      } else {
        out.push_back(load_trajectory(trajectories[k], mesh));
      }
    }
    return out;
  }
};

const std::vector<Vec3>& frame_at(const Trajectory& t, std::size_t frame) {
  return t.frames[t.frames.size() == 1 ? 0 : frame].positions;
}

std::vector<MeshMotion> collider_motions(const std::vector<Trajectory>& colliders,
                                         std::size_t frame) {
  std::vector<MeshMotion> out;
  for (const Trajectory& c : colliders) {
    if (c.frames.size() != 1 && frame + 1 >= c.frames.size())
      throw Error("collider trajectory has no frames " + std::to_string(frame) + " and " +
                  std::to_string(frame + 1));
    out.emplace_back(*c.mesh, frame_at(c, frame), frame_at(c, frame + 1));
  }
  return out;
}

KindSet parse_kinds(const std::string& text) {
  if (text == "all") return KindSet::all();
  if (text == "self") return KindSet::self_only();
  KindSet set;
  std::stringstream ss(text);
  for (std::string name; std::getline(ss, name, ',');) {
    const auto kind = parse_contact_kind(name);
    if (!kind) throw CLI::ValidationError("--kinds", "unknown contact kind '" + name + "'");
    set = set.with(*kind);
  }
  if (set.empty()) throw CLI::ValidationError("--kinds", "no contact kinds selected");
  return set;
}

void write_vectors(JsonWriter& w, std::string_view name, const std::vector<Vec3>& v) {
  w.key(name).begin_array();
  for (const Vec3& x : v) w.begin_array().value(x.x()).value(x.y()).value(x.z()).end_array();
  w.end_array();
}

double gradient_norm(const std::vector<Vec3>& g) {
  double s = 0.0;
  for (const Vec3& x : g) s += x.squaredNorm();
  return std::sqrt(s);
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string config;
  std::string scenario;
  int resolution = 0;
  double size = 0.0;
  double lift_height = 0.5;
  std::size_t frames = 240;
  std::string collider_obj;
};

int run_simulate(const CommonOptions& o, const SimulateOptions& s) {
  SimScene scene;
  std::size_t frames = s.frames;
  if (!s.config.empty()) {
    std::ifstream in(s.config);
    if (!in) throw FormatError(s.config, 0, "cannot open file");
    std::stringstream text;
    text << in.rdbuf();
    std::tie(scene, frames) = scene_from_json(text.str(), s.config);
  } else {
    ScenarioParams p;
    p.resolution = s.resolution;
    p.size = s.size;
    p.lift_height = s.lift_height;
    p.frame_count = s.frames;
    p.collider_obj = s.collider_obj;
    scene = generate_scenario(parse_scenario_kind(s.scenario), p);
  }
  scene.params.epsilon = o.eps;
  scene.params.max_iterations = o.max_iters;
  scene.params.cell_size = o.cell_size;
  scene.params.threads = o.threads;

  std::size_t rewinds = 0, unconverged = 0;
  int max_iterations = 0;
  std::size_t corrected_steps = 0;
  const Trajectory traj = run(scene, frames, [&](std::size_t, const FrameState&, const StepReport& r) {
    rewinds += r.rewound;
    unconverged += !r.converged;
    corrected_steps += r.iterations_used > 0;
    max_iterations = std::max(max_iterations, r.iterations_used);
  });

  save_obj(o.output + ".obj", *scene.cloth);
  save_trajectory(o.output + ".ctrj", traj);
  for (std::size_t k = 0; k < scene.colliders.size(); ++k) {
    const std::string stem = o.output + ".collider" + std::to_string(k);
    save_obj(stem + ".obj", *scene.colliders[k].mesh);
    save_trajectory(stem + ".ctrj", collider_trajectory(scene.colliders[k], frames + 1, traj.dt));
  }

  JsonWriter w(o.pretty);
  w.begin_object();
  w.field("frames", static_cast<std::uint64_t>(traj.frames.size()));
  w.field("vertices", static_cast<std::uint64_t>(scene.cloth->vertex_count()));
  w.field("colliders", static_cast<std::uint64_t>(scene.colliders.size()));
  w.field("corrected_steps", static_cast<std::uint64_t>(corrected_steps));
  w.field("max_iterations_used", max_iterations);
  w.field("unconverged_steps", static_cast<std::uint64_t>(unconverged));
  w.field("rewound_steps", static_cast<std::uint64_t>(rewinds));
  w.end_object();
  std::cout << w.str();
  return (o.strict && unconverged > 0) ? 1 : 0;
}

// ------------------------------------------------------------------ detect

struct DetectOptions {
  std::string mesh;
  std::string trajectory;
  std::size_t frame = 0;
  std::string kinds = "all";
  bool earliest = false;
  ColliderInputs colliders;
};

int run_detect(const CommonOptions& o, const DetectOptions& d) {
  auto mesh = std::make_shared<const Mesh>(load_obj(d.mesh));
  const Trajectory traj = load_trajectory(d.trajectory, mesh);
  if (d.frame + 1 >= traj.frames.size())
    throw CLI::ValidationError("--frame", "trajectory " + d.trajectory + " has " +
                                              std::to_string(traj.frames.size()) + " frames");
  const std::vector<Trajectory> colliders = d.colliders.load();
  SweepConfig cfg = o.sweep_config();
  cfg.kinds = parse_kinds(d.kinds);
  cfg.earliest_per_vertex = d.earliest;
  const MeshMotion cloth(*mesh, traj.frames[d.frame].positions, traj.frames[d.frame + 1].positions);
  const std::vector<MeshMotion> motions = collider_motions(colliders, d.frame);
  emit(o, format_events(sweep(cloth, motions, cfg)));
  return 0;
}

// ------------------------------------------------------------- postprocess

struct PostprocessOptions {
  std::string mesh;
  std::string start;
  std::string predicted;
  std::string report;
  std::size_t frame = 0;
  ColliderInputs colliders;
};

int run_postprocess(const CommonOptions& o, const PostprocessOptions& p) {
  const Mesh mesh = load_obj(p.mesh);
  const std::vector<Vec3> start = load_frame(p.start, mesh);
  const std::vector<Vec3> predicted = load_frame(p.predicted, mesh);
  const std::vector<Trajectory> colliders = p.colliders.load();
  const std::vector<MeshMotion> motions = collider_motions(colliders, p.frame);
  PostprocessConfig cfg;
  cfg.epsilon = o.eps;
  cfg.max_iterations = o.max_iters;
  cfg.sweep = o.sweep_config();
  const PostprocessReport r = postprocess(mesh, start, predicted, motions, cfg);

  std::size_t moved = 0;
  for (bool m : r.moved) moved += m;
  JsonWriter w(o.pretty);
  w.begin_object();
  w.field("converged", r.converged);
  w.field("iterations_used", r.iterations_used);
  w.key("events_per_iteration").begin_array();
  for (std::size_t n : r.events_per_iteration) w.value(static_cast<std::uint64_t>(n));
  w.end_array();
  w.field("moved_vertices", static_cast<std::uint64_t>(moved));
  w.field("epsilon", o.eps);
  w.field("max_iterations", o.max_iters);
  w.end_object();

  if (!o.output.empty()) save_obj(o.output, mesh, r.corrected_frame.positions);
  if (p.report.empty()) {
    std::cout << w.str();
  } else {
    std::ofstream out(p.report, std::ios::binary);
    if (!out) throw FormatError(p.report, 0, "cannot open file for writing");
    out << w.str();
  }
  return (o.strict && !r.converged) ? 1 : 0;
}

// -------------------------------------------------------------------- loss

struct LossOptions {
  std::string mesh;
  std::string start;
  std::string end;
  std::string kinds = "self";
  bool gradient = false;
  // contact
  std::string cloth;
  std::string collider;
  int k = kDefaultContactNeighbors;
  double stiffness = kDefaultContactStiffness;
  // mse
  std::string pred;
  std::string gt;
};

int run_loss_ccd(const CommonOptions& o, const LossOptions& l) {
  const Mesh mesh = load_obj(l.mesh);
  const std::vector<Vec3> start = load_frame(l.start, mesh);
  const std::vector<Vec3> end = load_frame(l.end, mesh);
  SweepConfig cfg = o.sweep_config();
  cfg.kinds = parse_kinds(l.kinds);
  const MeshMotion motion(mesh, start, end);
  const auto events = sweep(motion, {}, cfg);
  const CcdLossReport r = ccd_loss(events, start, end, o.eps);
  JsonWriter w(o.pretty);
  w.begin_object();
  w.field("loss", r.loss);
  w.field("event_count", static_cast<std::uint64_t>(r.event_count));
  w.field("epsilon", o.eps);
  w.field("gradient_norm", gradient_norm(r.gradient));
  w.key("event_terms").begin_array();
  for (double t : r.event_terms) w.value(t);
  w.end_array();
  if (l.gradient) write_vectors(w, "gradient", r.gradient);
  w.end_object();
  emit(o, w.str());
  return 0;
}

int run_loss_contact(const CommonOptions& o, const LossOptions& l) {
  const Mesh cloth = load_obj(l.cloth);
  const Mesh collider = load_obj(l.collider);
  const ContactLossReport r =
      contact_loss(cloth.rest_positions(), collider.rest_positions(), collider, l.k, l.stiffness);
  JsonWriter w(o.pretty);
  w.begin_object();
  w.field("loss", r.loss);
  w.field("penetrating_vertex_count", static_cast<std::uint64_t>(r.penetrating_vertex_count));
  w.field("k_neighbors", l.k);
  w.field("stiffness", l.stiffness);
  w.field("gradient_norm", gradient_norm(r.gradient));
  if (l.gradient) write_vectors(w, "gradient", r.gradient);
  w.end_object();
  emit(o, w.str());
  return 0;
}

int run_loss_mse(const CommonOptions& o, const LossOptions& l) {
  const Mesh pred = load_obj(l.pred);
  const std::vector<Vec3> gt = load_frame(l.gt, pred);
  const MseLossReport r = mse_loss(pred.rest_positions(), gt);
  JsonWriter w(o.pretty);
  w.begin_object();
  w.field("loss", r.loss);
  w.field("gradient_norm", gradient_norm(r.gradient));
  if (l.gradient) write_vectors(w, "gradient", r.gradient);
  w.end_object();
  emit(o, w.str());
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  int fixtures = 100;
  double threshold = 1e-5;
};

int run_gradcheck(const CommonOptions& o, const GradcheckOptions& g) {
  const gradcheck::Summary ccd = gradcheck::check_ccd_loss(g.fixtures, o.seed, o.eps);
  const gradcheck::Summary contact = gradcheck::check_contact_loss(g.fixtures, o.seed);
  const bool pass = ccd.max_relative_error < g.threshold &&
                    contact.max_relative_error < g.threshold && ccd.fixtures > 0 &&
                    contact.fixtures > 0;
  JsonWriter w(o.pretty);
  w.begin_object();
  for (const auto& [name, s] : {std::pair{"ccd", ccd}, std::pair{"contact", contact}}) {
    w.key(name).begin_object();
    w.field("fixtures", s.fixtures);
    w.field("events", static_cast<std::uint64_t>(s.events));
    w.field("max_relative_error", s.max_relative_error);
    w.end_object();
  }
  w.field("threshold", g.threshold);
  w.field("pass", pass);
  w.end_object();
  emit(o, w.str());
  return pass ? 0 : 1;
}

// ------------------------------------------------------------------ metrics

struct MetricsOptions {
  std::string mesh;
  std::string pred;
  std::string gt;
  bool per_frame = false;
  ColliderInputs colliders;
};

int run_metrics(const CommonOptions& o, const MetricsOptions& m) {
  auto mesh = std::make_shared<const Mesh>(load_obj(m.mesh));
  const Trajectory pred = load_trajectory(m.pred, mesh);
  const Trajectory gt = load_trajectory(m.gt, mesh);
  const std::vector<Trajectory> colliders = m.colliders.load();
  const MetricsReport r = compute_metrics(pred, gt, colliders, o.sweep_config());
  emit(o, metrics_json(r, m.per_frame, o.pretty));
  return 0;
}

// -------------------------------------------------------------------- bench

struct BenchOptions {
  std::vector<int> sizes{11, 21, 41};
  int repeats = 3;
};

int run_bench(const CommonOptions& o, const BenchOptions& b) {
  using clock = std::chrono::steady_clock;
  JsonWriter w(o.pretty);
  w.begin_object().key("results").begin_array();
  for (int res : b.sizes) {
    // A grid dropped onto a sphere, advanced a few frames so the sweep sees
    // real contacts.
    ScenarioParams sp;
    sp.resolution = res;
    SimScene scene = generate_scenario(ScenarioKind::DrapeOnObject, sp);
    scene.params.threads = o.threads;
    scene.params.epsilon = o.eps;
    const ClothSimulator sim(scene);
    FrameState state = scene.initial;
    for (std::size_t f = 0; f < 60; ++f) state = sim.step(f, state);
    // Free fall from the settled frame gives the post-processor work.
    std::vector<Vec3> predicted = state.positions;
    for (Vec3& p : predicted) p.z() -= 0.05;

    const ColliderTrack& track = scene.colliders[0];
    const std::vector<Vec3> cx = track.positions(0);
    const std::vector<MeshMotion> motions{MeshMotion(*track.mesh, cx, cx)};
    const MeshMotion cloth(*scene.cloth, state.positions, predicted);
    SweepConfig cfg = o.sweep_config();

    double sweep_ms = 0.0, post_ms = 0.0;
    std::size_t events = 0;
    int iterations = 0;
    for (int r = 0; r < b.repeats; ++r) {
      auto t0 = clock::now();
      events = sweep(cloth, motions, cfg).size();
      auto t1 = clock::now();
      PostprocessConfig pc;
      pc.epsilon = o.eps;
      pc.max_iterations = o.max_iters;
      pc.sweep = cfg;
      iterations = postprocess(*scene.cloth, state.positions, predicted, motions, pc).iterations_used;
      auto t2 = clock::now();
      sweep_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
      post_ms += std::chrono::duration<double, std::milli>(t2 - t1).count();
    }
    w.begin_object();
    w.field("resolution", res);
    w.field("vertices", static_cast<std::uint64_t>(scene.cloth->vertex_count()));
    w.field("events", static_cast<std::uint64_t>(events));
    w.field("sweep_ms", sweep_ms / b.repeats);
    w.field("postprocess_iterations", iterations);
    w.field("postprocess_ms", post_ms / b.repeats);
    w.field("postprocess_ms_per_iteration", iterations > 0 ? post_ms / b.repeats / iterations : 0.0);
    w.end_object();
  }
  w.end_array().end_object();
  emit(o, w.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous collision detection and penetration-free correction for cloth"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonOptions common;
  auto add_correction_flags = [&](CLI::App* cmd) {
    cmd->add_option("--eps", common.eps, "Safety margin in normalized step time")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-iters", common.max_iters, "Post-processing iteration budget")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--strict", common.strict, "Exit 1 when post-processing does not converge");
  };

  SimulateOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Run a cloth scene and write CTRJ1 trajectories");
  auto* config_opt = simulate->add_option("--config", sim_opts.config, "Scene configuration (JSON)")
                         ->check(CLI::ExistingFile);
  auto* scenario_opt =
      simulate->add_option("--scenario", sim_opts.scenario, "drape_on_object | hang_two_pins | grasp_lift")
          ->check(CLI::IsMember({"drape_on_object", "hang_two_pins", "grasp_lift"}));
  config_opt->excludes(scenario_opt);
  simulate->add_option("--resolution", sim_opts.resolution, "Grid vertices per side (0 = scenario default)")
      ->capture_default_str()
      ->excludes(config_opt);
  simulate->add_option("--size", sim_opts.size, "Cloth side in meters (0 = scenario default)")
      ->capture_default_str()
      ->excludes(config_opt);
  simulate->add_option("--lift-height", sim_opts.lift_height, "grasp_lift corner lift in meters")
      ->capture_default_str()
      ->excludes(config_opt);
  simulate->add_option("--frames", sim_opts.frames, "Steps to simulate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber)
      ->excludes(config_opt);
  simulate->add_option("--collider-obj", sim_opts.collider_obj, "drape_on_object collider OBJ")
      ->check(CLI::ExistingFile)
      ->excludes(config_opt);
  simulate->add_option("--output", common.output,
                       "Output prefix: <prefix>.obj, <prefix>.ctrj, <prefix>.collider<k>.{obj,ctrj}")
      ->required();
  simulate->add_flag("--pretty", common.pretty, "Indent the JSON summary");
  add_correction_flags(simulate);
  add_sweep_flags(simulate, common);

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Sweep one trajectory step and print its events");
  detect->add_option("--mesh", det.mesh, "Cloth OBJ")->required()->check(CLI::ExistingFile);
  detect->add_option("--trajectory", det.trajectory, "Cloth CTRJ1 trajectory")
      ->required()
      ->check(CLI::ExistingFile);
  detect->add_option("--frame", det.frame, "Start frame of the swept step")->capture_default_str();
  detect->add_option("--kinds", det.kinds, "all | self | comma list of VF,EE,FV,SelfVF,SelfEE")
      ->capture_default_str();
  detect->add_flag("--earliest", det.earliest, "Keep only each cloth vertex's earliest event");
  det.colliders.add_flags(detect);
  detect->add_option("--output", common.output, "Event list path (default stdout)");
  add_sweep_flags(detect, common);

  PostprocessOptions post;
  auto* postproc = app.add_subcommand("postprocess", "Correct a predicted frame until penetration-free");
  postproc->add_option("--mesh", post.mesh, "Cloth OBJ (topology)")->required()->check(CLI::ExistingFile);
  postproc->add_option("--start", post.start, "Start frame OBJ")->required()->check(CLI::ExistingFile);
  postproc->add_option("--predicted", post.predicted, "Predicted frame OBJ")
      ->required()
      ->check(CLI::ExistingFile);
  postproc->add_option("--frame", post.frame, "Collider trajectory frame of the start frame")
      ->capture_default_str();
  post.colliders.add_flags(postproc);
  postproc->add_option("--output", common.output, "Corrected frame OBJ");
  postproc->add_option("--report", post.report, "Report path (default stdout)");
  postproc->add_flag("--pretty", common.pretty, "Indent the JSON report");
  add_correction_flags(postproc);
  add_sweep_flags(postproc, common);

  LossOptions loss_opts;
  auto* loss = app.add_subcommand("loss", "Evaluate a training loss and its gradient");
  loss->require_subcommand(1);
  auto* loss_ccd = loss->add_subcommand("ccd", "Detect-then-regress CCD loss");
  loss_ccd->add_option("--mesh", loss_opts.mesh, "Cloth OBJ (topology)")->required()->check(CLI::ExistingFile);
  loss_ccd->add_option("--start", loss_opts.start, "Start frame OBJ")->required()->check(CLI::ExistingFile);
  loss_ccd->add_option("--end", loss_opts.end, "Predicted end frame OBJ")->required()->check(CLI::ExistingFile);
  loss_ccd->add_option("--kinds", loss_opts.kinds, "all | self | comma list")->capture_default_str();
  loss_ccd->add_option("--eps", common.eps, "Safety margin in normalized step time")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_sweep_flags(loss_ccd, common);
  auto* loss_contact = loss->add_subcommand("contact", "Cubic penetration penalty");
  loss_contact->add_option("--cloth", loss_opts.cloth, "Cloth frame OBJ")->required()->check(CLI::ExistingFile);
  loss_contact->add_option("--collider", loss_opts.collider, "Collider OBJ")->required()->check(CLI::ExistingFile);
  loss_contact->add_option("--k", loss_opts.k, "Nearest-centroid candidates")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  loss_contact->add_option("--stiffness", loss_opts.stiffness, "Penalty stiffness")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  auto* loss_mse = loss->add_subcommand("mse", "Mean squared vertex error");
  loss_mse->add_option("--pred", loss_opts.pred, "Predicted frame OBJ")->required()->check(CLI::ExistingFile);
  loss_mse->add_option("--gt", loss_opts.gt, "Ground-truth frame OBJ")->required()->check(CLI::ExistingFile);
  for (CLI::App* sub : {loss_ccd, loss_contact, loss_mse}) {
    sub->add_flag("--gradient", loss_opts.gradient, "Include the per-vertex gradient");
    add_output_flags(sub, common, "Report path (default stdout)");
  }

  GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs central-difference loss gradients");
  gradcheck->add_option("--fixtures", gc.fixtures, "Randomized fixtures per loss")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--threshold", gc.threshold, "Maximum accepted relative error")
      ->capture_default_str();
  gradcheck->add_option("--seed", common.seed, "Fixture seed")->capture_default_str();
  gradcheck->add_option("--eps", common.eps, "Safety margin in normalized step time")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_output_flags(gradcheck, common, "Report path (default stdout)");

  MetricsOptions met;
  auto* metrics = app.add_subcommand("metrics", "MVE, collision rate and self-collision rate");
  metrics->add_option("--mesh", met.mesh, "Cloth OBJ")->required()->check(CLI::ExistingFile);
  metrics->add_option("--pred", met.pred, "Predicted CTRJ1 trajectory")->required()->check(CLI::ExistingFile);
  metrics->add_option("--gt", met.gt, "Ground-truth CTRJ1 trajectory")->required()->check(CLI::ExistingFile);
  metrics->add_flag("--per-frame", met.per_frame, "Include per-frame values");
  met.colliders.add_flags(metrics);
  add_output_flags(metrics, common, "Report path (default stdout)");
  add_sweep_flags(metrics, common);

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Time sweeps and post-processing at several grid sizes");
  bench->add_option("--sizes", bench_opts.sizes, "Grid resolutions")->capture_default_str()->delimiter(',');
  bench->add_option("--repeats", bench_opts.repeats, "Timed repetitions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", common.seed, "Unused; accepted for uniformity")->capture_default_str();
  add_correction_flags(bench);
  add_sweep_flags(bench, common);
  add_output_flags(bench, common, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate) {
      if (sim_opts.config.empty() && sim_opts.scenario.empty())
        throw CLI::RequiredError("--config or --scenario");
      return run_simulate(common, sim_opts);
    }
    if (*detect) return run_detect(common, det);
    if (*postproc) return run_postprocess(common, post);
    if (*loss_ccd) return run_loss_ccd(common, loss_opts);
    if (*loss_contact) return run_loss_contact(common, loss_opts);
    if (*loss_mse) return run_loss_mse(common, loss_opts);
    if (*gradcheck) return run_gradcheck(common, gc);
    if (*metrics) return run_metrics(common, met);
    if (*bench) return run_bench(common, bench_opts);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    // what() reads "<path>:<record>: <message>"
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
