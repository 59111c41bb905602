#include <charconv>
#include <cstdio>
#include <fstream>
#include <string_view>

#include "clothccd/io.hpp"

namespace clothccd {

namespace {

std::string_view next_token(std::string_view& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    s = {};
    return {};
  }
  std::size_t e = s.find_first_of(" \t\r", b);
  if (e == std::string_view::npos) e = s.size();
  std::string_view tok = s.substr(b, e - b);
  s.remove_prefix(e);
  return tok;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return !tok.empty() && ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

Mesh parse_obj(std::istream& in, const std::string& source_name) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  std::vector<std::size_t> face_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    if (auto hash = rest.find('#'); hash != std::string_view::npos)
      rest = rest.substr(0, hash);
    const std::string_view tag = next_token(rest);
    if (tag == "v") {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(next_token(rest), p[k])) {
          throw FormatError(source_name, lineno, "malformed vertex record");
        }
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      for (std::string_view tok = next_token(rest); !tok.empty();
           tok = next_token(rest)) {
        tok = tok.substr(0, tok.find('/'));
        long value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || value == 0) {
          throw FormatError(source_name, lineno, "malformed face record");
        }
        idx.push_back(value);
      }
      if (idx.size() != 3) {
        throw FormatError(source_name, lineno,
                          "non-triangular face " + std::to_string(faces.size() + 1) +
                              " (" + std::to_string(idx.size()) + " vertices)");
      }
      Face f{};
      for (int k = 0; k < 3; ++k) {
        const long v = idx[k] > 0 ? idx[k] - 1
                                  : static_cast<long>(verts.size()) + idx[k];
        f[k] = static_cast<Index>(v);
        if (v < 0) throw FormatError(source_name, lineno, "face index out of range");
      }
      faces.push_back(f);
      face_lines.push_back(lineno);
    }
    // vn, vt, g, o, s, usemtl, mtllib and unknown records are ignored
  }
  const auto n = static_cast<Index>(verts.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (Index v : faces[i]) {
      if (v >= n) throw FormatError(source_name, face_lines[i], "face index out of range");
    }
  }
  return Mesh(std::move(verts), std::move(faces));
}

Mesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return parse_obj(in, path);
}

namespace {

void write_obj_impl(std::ostream& out, const Mesh& mesh,
                    const std::vector<Vec3>& positions) {
  char buf[128];
  for (const Vec3& p : positions) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

}  // namespace

void write_obj(std::ostream& out, const Mesh& mesh) {
  write_obj_impl(out, mesh, mesh.rest_positions());
}

void save_obj(const std::string& path, const Mesh& mesh) {
  save_obj(path, mesh, mesh.rest_positions());
}

void save_obj(const std::string& path, const Mesh& mesh,
              const std::vector<Vec3>& positions) {
  if (positions.size() != mesh.vertex_count()) {
    throw Error("save_obj: position count does not match mesh");
  }
  std::ofstream out(path);
  if (!out) throw FormatError(path, 0, "cannot open file for writing");
  write_obj_impl(out, mesh, positions);
  if (!out) throw FormatError(path, 0, "write failed");
}

}  // namespace clothccd
