#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clothccd/pipeline.hpp"

namespace clothccd {

/// Event list text format:
///
///   CEVT1 <count>
///   <kind> <mesh> <i>... | <mesh> <j>... | <t_c> | <p0> <p1> <p2>
///
/// one line per event, where <mesh> is `cloth` or `collider:<k>` and every
/// real number is printed with 17 significant digits.
void write_events(std::ostream& out, std::span<const CollisionEvent> events);
std::string format_events(std::span<const CollisionEvent> events);

/// Throws FormatError naming `source_name` and the offending line.
std::vector<CollisionEvent> parse_events(std::istream& in,
                                         const std::string& source_name = "<stream>");
std::vector<CollisionEvent> load_events(const std::string& path);

}  // namespace clothccd
