#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "clothccd/geometry.hpp"

namespace clothccd {

// Wavefront OBJ, geometry subset. Only `v` and `f` records are semantic;
// normals, texture coordinates, groups and materials are skipped. Face
// tokens may use the v/vt/vn forms; negative (relative) indices are
// resolved against the vertices read so far.
Mesh load_obj(const std::string& path);
Mesh parse_obj(std::istream& in, const std::string& source_name = "<stream>");
/// Writes v/f records with 17 significant digits so a re-load reproduces
/// every coordinate bit-for-bit.
void write_obj(std::ostream& out, const Mesh& mesh);
void save_obj(const std::string& path, const Mesh& mesh);
/// Same as save_obj but with explicit positions in place of the rest pose.
void save_obj(const std::string& path, const Mesh& mesh,
              const std::vector<Vec3>& positions);

/// Raw contents of a CTRJ1 trajectory file.
struct TrajectoryFile {
  std::size_t vertex_count = 0;
  double dt = 0.0;
  std::vector<FrameState> frames;
};

// CTRJ1 layout:
//   header: one ASCII line "CTRJ1 <vertex_count> <frame_count> <dt>\n"
//           with dt printed at 17 significant digits
//   body:   frame_count * vertex_count * 3 IEEE-754 binary64 values,
//           little-endian, frame-major then vertex-major then x,y,z
TrajectoryFile read_trajectory_file(const std::string& path);
void write_trajectory_file(const std::string& path, double dt,
                           const std::vector<FrameState>& frames);
TrajectoryFile read_trajectory_stream(std::istream& in,
                                      const std::string& source_name);
void write_trajectory_stream(std::ostream& out, double dt,
                             const std::vector<FrameState>& frames);

/// Loads a trajectory and binds it to a mesh, checking vertex counts.
Trajectory load_trajectory(const std::string& path, MeshPtr mesh);
void save_trajectory(const std::string& path, const Trajectory& traj);

}  // namespace clothccd
