#include "clothccd/event_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace clothccd {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string mesh_tag(int mesh) {
  return mesh == kClothTag ? std::string("cloth") : "collider:" + std::to_string(mesh);
}

template <typename T>
bool parse_number(const std::string& token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_mesh_tag(const std::string& token, int& out) {
  if (token == "cloth") {
    out = kClothTag;
    return true;
  }
  constexpr std::string_view prefix = "collider:";
  if (token.rfind(prefix, 0) != 0) return false;
  return parse_number(token.substr(prefix.size()), out) && out >= 0;
}

}  // namespace

void write_events(std::ostream& out, std::span<const CollisionEvent> events) {
  out << "CEVT1 " << events.size() << '\n';
  for (const CollisionEvent& e : events) {
    out << to_string(e.kind) << ' ' << mesh_tag(e.mesh_a);
    for (Index v : e.a.indices()) out << ' ' << v;
    out << " | " << mesh_tag(e.mesh_b);
    for (Index v : e.b.indices()) out << ' ' << v;
    out << " | " << fmt17(e.t_c) << " | " << fmt17(e.params[0]) << ' ' << fmt17(e.params[1])
        << ' ' << fmt17(e.params[2]) << '\n';
  }
}

std::string format_events(std::span<const CollisionEvent> events) {
  std::ostringstream out;
  write_events(out, events);
  return out.str();
}

std::vector<CollisionEvent> parse_events(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t count = 0;
  {
    std::string magic;
    if (!std::getline(in, line)) throw FormatError(source_name, 1, "missing CEVT1 header");
    std::istringstream header(line);
    std::string count_token, extra;
    if (!(header >> magic >> count_token) || magic != "CEVT1" || !parse_number(count_token, count) ||
        (header >> extra))
      throw FormatError(source_name, 1, "malformed CEVT1 header");
  }
  std::vector<CollisionEvent> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t record = i + 2;
    if (!std::getline(in, line)) throw FormatError(source_name, record, "missing event record");
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);

    auto fail = [&](const char* what) { return FormatError(source_name, record, what); };
    CollisionEvent e;
    std::size_t pos = 0;
    auto next = [&]() -> const std::string& {
      if (pos >= tokens.size()) throw fail("truncated event record");
      return tokens[pos++];
    };
    auto read_side = [&](int& mesh, IndexTuple& tuple) {
      if (!parse_mesh_tag(next(), mesh)) throw fail("malformed mesh tag");
      tuple = IndexTuple{};
      while (pos < tokens.size() && tokens[pos] != "|") {
        if (tuple.size == 3) throw fail("too many indices");
        if (!parse_number(tokens[pos++], tuple.v[tuple.size])) throw fail("malformed index");
        ++tuple.size;
      }
      if (tuple.size == 0) throw fail("empty index tuple");
      if (next() != "|") throw fail("expected '|'");
    };

    const auto kind = parse_contact_kind(next());
    if (!kind) throw fail("unknown event kind");
    e.kind = *kind;
    read_side(e.mesh_a, e.a);
    read_side(e.mesh_b, e.b);
    if (!parse_number(next(), e.t_c)) throw fail("malformed t_c");
    if (next() != "|") throw fail("expected '|'");
    for (double& p : e.params)
      if (!parse_number(next(), p)) throw fail("malformed contact parameter");
    if (pos != tokens.size()) throw fail("trailing tokens in event record");
    events.push_back(e);
  }
  if (std::getline(in, line) && !line.empty())
    throw FormatError(source_name, count + 2, "records beyond the declared count");
  return events;
}

std::vector<CollisionEvent> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return parse_events(in, path);
}

}  // namespace clothccd
