#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clothccd/io.hpp"

namespace clothccd {

namespace {

constexpr const char* kMagic = "CTRJ1";

void put_le(std::ostream& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

bool get_le(std::istream& in, double& value) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  value = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

void write_trajectory_stream(std::ostream& out, double dt,
                             const std::vector<FrameState>& frames) {
  const std::size_t n = frames.empty() ? 0 : frames.front().size();
  for (const FrameState& f : frames) {
    if (f.size() != n) throw Error("write_trajectory: frames differ in vertex count");
  }
  char header[128];
  std::snprintf(header, sizeof header, "%s %zu %zu %.17g\n", kMagic, n,
                frames.size(), dt);
  out << header;
  for (const FrameState& f : frames) {
    for (const Vec3& p : f.positions) {
      put_le(out, p.x());
      put_le(out, p.y());
      put_le(out, p.z());
    }
  }
}

TrajectoryFile read_trajectory_stream(std::istream& in,
                                      const std::string& source_name) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError(source_name, 0, "missing CTRJ1 header");
  std::istringstream hs(header);
  std::string magic;
  long long vertex_count = -1;
  long long frame_count = -1;
  double dt = 0.0;
  if (!(hs >> magic >> vertex_count >> frame_count >> dt) || magic != kMagic) {
    throw FormatError(source_name, 0, "bad CTRJ1 header");
  }
  if (vertex_count < 0 || frame_count < 1 || !(dt > 0.0) || !std::isfinite(dt)) {
    throw FormatError(source_name, 0, "invalid CTRJ1 header values");
  }
  TrajectoryFile file;
  file.vertex_count = static_cast<std::size_t>(vertex_count);
  file.dt = dt;
  file.frames.reserve(static_cast<std::size_t>(frame_count));
  for (long long t = 0; t < frame_count; ++t) {
    FrameState frame;
    frame.positions.resize(file.vertex_count);
    for (Vec3& p : frame.positions) {
      for (int k = 0; k < 3; ++k) {
        if (!get_le(in, p[k])) {
          throw FormatError(source_name, static_cast<std::size_t>(t + 1),
                            "truncated frame data");
        }
      }
      if (!p.allFinite()) {
        throw FormatError(source_name, static_cast<std::size_t>(t + 1),
                          "non-finite coordinate");
      }
    }
    file.frames.push_back(std::move(frame));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source_name, static_cast<std::size_t>(frame_count),
                      "trailing bytes after last frame");
  }
  return file;
}

TrajectoryFile read_trajectory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return read_trajectory_stream(in, path);
}

void write_trajectory_file(const std::string& path, double dt,
                           const std::vector<FrameState>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, 0, "cannot open file for writing");
  write_trajectory_stream(out, dt, frames);
  if (!out) throw FormatError(path, 0, "write failed");
}

Trajectory load_trajectory(const std::string& path, MeshPtr mesh) {
  TrajectoryFile file = read_trajectory_file(path);
  if (mesh && file.vertex_count != mesh->vertex_count()) {
    throw FormatError(path, 0,
                      "trajectory has " + std::to_string(file.vertex_count) +
                          " vertices, mesh has " +
                          std::to_string(mesh->vertex_count()));
  }
  Trajectory traj{std::move(mesh), std::move(file.frames), file.dt};
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  write_trajectory_file(path, traj.dt, traj.frames);
}

}  // namespace clothccd
