// Flat-array entry points. Arrays are copied in and out; every result comes
// from the same core calls the CLI makes.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "clothccd/event_io.hpp"
#include "clothccd/pipeline.hpp"
#include "clothccd/response.hpp"

namespace py = pybind11;
using namespace clothccd;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const DoubleArray& a, const char* name) {
  if (a.size() % 3 != 0)
    throw Error(std::string(name) + ": length " + std::to_string(a.size()) +
                " is not divisible by 3");
  const double* p = a.data();
  std::vector<Vec3> out(static_cast<std::size_t>(a.size() / 3));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Vec3(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  return out;
}

std::vector<Face> to_faces(const IndexArray& a, std::size_t vertex_count, const char* name) {
  if (a.size() % 3 != 0)
    throw Error(std::string(name) + ": length " + std::to_string(a.size()) +
                " is not divisible by 3");
  const std::int64_t* p = a.data();
  std::vector<Face> out(static_cast<std::size_t>(a.size() / 3));
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const std::int64_t v = p[3 * f + k];
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
        throw Error(std::string(name) + ": index " + std::to_string(v) + " in face " +
                    std::to_string(f) + " is out of range");
      out[f][k] = static_cast<Index>(v);
    }
  }
  return out;
}

py::array_t<double> to_array(const std::vector<Vec3>& x) {
  py::array_t<double> out(static_cast<py::ssize_t>(3 * x.size()));
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int d = 0; d < 3; ++d) p[3 * i + d] = x[i][d];
  return out;
}

// Cloth frame pair plus at most one collider; owns every buffer the
// MeshMotion views point into.
struct FramePair {
  std::vector<Vec3> start, end;
  std::optional<Mesh> cloth;
  std::vector<Vec3> collider_start, collider_end;
  std::optional<Mesh> collider;
  std::vector<MeshMotion> colliders;

  FramePair(const DoubleArray& s, const DoubleArray& e, const IndexArray& faces,
            const std::optional<DoubleArray>& cs, const std::optional<DoubleArray>& ce,
            const std::optional<IndexArray>& cf)
      : start(to_points(s, "start")), end(to_points(e, "end")) {
    if (start.size() != end.size())
      throw Error("start has " + std::to_string(start.size()) + " vertices, end has " +
                  std::to_string(end.size()));
    cloth.emplace(start, to_faces(faces, start.size(), "faces"));
    if (cs || ce || cf) {
      if (!cs || !cf) throw Error("collider_start and collider_faces must be given together");
      collider_start = to_points(*cs, "collider_start");
      collider_end = ce ? to_points(*ce, "collider_end") : collider_start;
      if (collider_end.size() != collider_start.size())
        throw Error("collider_start and collider_end differ in length");
      collider.emplace(collider_start, to_faces(*cf, collider_start.size(), "collider_faces"));
      colliders.emplace_back(*collider, collider_start, collider_end);
    }
  }

  MeshMotion motion() const { return MeshMotion(*cloth, start, end); }
};

KindSet parse_kinds(const std::string& text) {
  if (text == "all") return KindSet::all();
  if (text == "self") return KindSet::self_only();
  KindSet out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const auto kind = parse_contact_kind(std::string_view(text).substr(pos, comma - pos));
    if (!kind) throw Error("unknown contact kind in '" + text + "'");
    out = out.with(*kind);
    pos = comma + 1;
  }
  return out;
}

SweepConfig sweep_config(double tol, double inside_tol, double cell_size, unsigned threads) {
  SweepConfig c;
  c.tolerances.root = tol;
  c.tolerances.inside = inside_tol;
  c.cell_size = cell_size;
  c.threads = threads;
  return c;
}

py::dict detect_flat(const DoubleArray& start, const DoubleArray& end, const IndexArray& faces,
                     const std::optional<DoubleArray>& collider_start,
                     const std::optional<DoubleArray>& collider_end,
                     const std::optional<IndexArray>& collider_faces, const std::string& kinds,
                     bool earliest, double tol, double inside_tol, double cell_size,
                     unsigned threads) {
  const FramePair pair(start, end, faces, collider_start, collider_end, collider_faces);
  SweepConfig cfg = sweep_config(tol, inside_tol, cell_size, threads);
  cfg.kinds = parse_kinds(kinds);
  cfg.earliest_per_vertex = earliest;
  std::vector<CollisionEvent> events;
  {
    py::gil_scoped_release release;
    events = sweep(pair.motion(), pair.colliders, cfg);
  }
  const auto n = static_cast<py::ssize_t>(events.size());
  py::list names;
  py::array_t<std::int64_t> mesh_a(n), mesh_b(n), a({n, py::ssize_t{3}}), b({n, py::ssize_t{3}});
  py::array_t<double> t_c(n), params({n, py::ssize_t{3}});
  auto ma = mesh_a.mutable_unchecked<1>();
  auto mb = mesh_b.mutable_unchecked<1>();
  auto ia = a.mutable_unchecked<2>();
  auto ib = b.mutable_unchecked<2>();
  auto tc = t_c.mutable_unchecked<1>();
  auto pr = params.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const CollisionEvent& e = events[static_cast<std::size_t>(i)];
    names.append(std::string(to_string(e.kind)));
    ma(i) = e.mesh_a;
    mb(i) = e.mesh_b;
    for (int k = 0; k < 3; ++k) {
      ia(i, k) = e.a.v[k];
      ib(i, k) = e.b.v[k];
      pr(i, k) = e.params[k];
    }
    tc(i) = e.t_c;
  }
  py::dict out;
  out["kinds"] = names;
  out["mesh_a"] = mesh_a;
  out["a"] = a;
  out["mesh_b"] = mesh_b;
  out["b"] = b;
  out["t_c"] = t_c;
  out["params"] = params;
  out["text"] = format_events(events);
  return out;
}

py::tuple ccd_loss_flat(const DoubleArray& start, const DoubleArray& end, const IndexArray& faces,
                        double epsilon, double tol, double inside_tol, double cell_size,
                        unsigned threads) {
  const FramePair pair(start, end, faces, std::nullopt, std::nullopt, std::nullopt);
  SweepConfig cfg = sweep_config(tol, inside_tol, cell_size, threads);
  cfg.kinds = KindSet::self_only();
  CcdLossReport r;
  {
    py::gil_scoped_release release;
    const auto events = sweep(pair.motion(), {}, cfg);
    r = ccd_loss(events, pair.start, pair.end, epsilon);
  }
  return py::make_tuple(r.loss, to_array(r.gradient), r.event_count);
}

py::tuple contact_loss_flat(const DoubleArray& cloth, const DoubleArray& collider,
                            const IndexArray& collider_faces, int k, double stiffness) {
  const auto x = to_points(cloth, "cloth");
  const auto cx = to_points(collider, "collider");
  const Mesh mesh(cx, to_faces(collider_faces, cx.size(), "collider_faces"));
  const auto r = contact_loss(x, cx, mesh, k, stiffness);
  return py::make_tuple(r.loss, to_array(r.gradient), r.penetrating_vertex_count);
}

py::tuple postprocess_flat(const DoubleArray& start, const DoubleArray& predicted,
                           const IndexArray& faces,
                           const std::optional<DoubleArray>& collider_start,
                           const std::optional<DoubleArray>& collider_end,
                           const std::optional<IndexArray>& collider_faces, double epsilon,
                           int max_iters, double tol, double inside_tol, double cell_size,
                           unsigned threads) {
  const FramePair pair(start, predicted, faces, collider_start, collider_end, collider_faces);
  PostprocessConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_iterations = max_iters;
  cfg.sweep = sweep_config(tol, inside_tol, cell_size, threads);
  PostprocessReport r;
  {
    py::gil_scoped_release release;
    r = postprocess(*pair.cloth, pair.start, pair.end, pair.colliders, cfg);
  }
  return py::make_tuple(to_array(r.corrected_frame.positions), r.iterations_used, r.converged);
}

}  // namespace

PYBIND11_MODULE(_clothccd, m) {
  m.doc() = "Continuous collision detection, CCD losses and post-processing on flat arrays.";
  py::register_exception<Error>(m, "ClothCcdError", PyExc_ValueError);

  const auto tol = py::arg("tol") = kDefaultRootTolerance;
  const auto inside = py::arg("inside_tol") = KernelTolerances{}.inside;
  const auto cell = py::arg("cell_size") = 0.0;
  const auto threads = py::arg("threads") = 1u;

  m.def("detect_flat", &detect_flat, py::arg("start"), py::arg("end"), py::arg("faces"),
        py::kw_only(), py::arg("collider_start") = py::none(),
        py::arg("collider_end") = py::none(), py::arg("collider_faces") = py::none(),
        py::arg("kinds") = "all", py::arg("earliest") = false, tol, inside, cell, threads,
        "Sweep start -> end and return the sorted events as arrays plus their CEVT1 text.");
  m.def("ccd_loss_flat", &ccd_loss_flat, py::arg("start"), py::arg("end"), py::arg("faces"),
        py::kw_only(), py::arg("eps") = kDefaultEpsilon, tol, inside, cell, threads,
        "Self-collision CCD loss over the pair: (loss, gradient w.r.t. end, event count).");
  m.def("contact_loss_flat", &contact_loss_flat, py::arg("cloth"), py::arg("collider"),
        py::arg("collider_faces"), py::kw_only(), py::arg("k") = kDefaultContactNeighbors,
        py::arg("stiffness") = kDefaultContactStiffness,
        "Cubic penetration penalty: (loss, gradient, penetrating vertex count).");
  m.def("postprocess_flat", &postprocess_flat, py::arg("start"), py::arg("predicted"),
        py::arg("faces"), py::kw_only(), py::arg("collider_start") = py::none(),
        py::arg("collider_end") = py::none(), py::arg("collider_faces") = py::none(),
        py::arg("eps") = kDefaultEpsilon, py::arg("max_iters") = kDefaultMaxIterations, tol,
        inside, cell, threads,
        "Correct the predicted frame: (positions, iterations used, converged).");
}
