#include <gtest/gtest.h>

#include <sstream>

#include "clothccd/event_io.hpp"

using namespace clothccd;

namespace {

CollisionEvent event(ContactKind kind, int mesh_b, IndexTuple a, IndexTuple b, double t) {
  CollisionEvent e;
  e.kind = kind;
  e.mesh_a = kind == ContactKind::FV ? mesh_b : kClothTag;
  e.a = a;
  e.mesh_b = kind == ContactKind::FV ? kClothTag : mesh_b;
  e.b = b;
  e.t_c = t;
  e.params = {0.1, 1.0 / 3.0, 0.5666666666666667};
  return e;
}

}  // namespace

TEST(EventIo, FormatsOneRecordPerEvent) {
  const std::vector<CollisionEvent> events{
      event(ContactKind::VF, 0, IndexTuple::vertex(0), IndexTuple::triangle({0, 1, 2}), 0.5)};
  EXPECT_EQ(format_events(events),
            "CEVT1 1\nVF cloth 0 | collider:0 0 1 2 | 0.5 | 0.10000000000000001 "
            "0.33333333333333331 0.56666666666666665\n");
}

TEST(EventIo, RoundTripIsExact) {
  const std::vector<CollisionEvent> events{
      event(ContactKind::VF, 2, IndexTuple::vertex(7), IndexTuple::triangle({1, 2, 3}), 0.1),
      event(ContactKind::EE, 0, IndexTuple::edge({1, 4}), IndexTuple::edge({0, 5}), 1.0 / 7.0),
      event(ContactKind::FV, 1, IndexTuple::vertex(3), IndexTuple::triangle({4, 5, 6}), 0.0),
      event(ContactKind::SelfVF, kClothTag, IndexTuple::vertex(9),
            IndexTuple::triangle({0, 1, 2}), 1.0),
      event(ContactKind::SelfEE, kClothTag, IndexTuple::edge({0, 1}), IndexTuple::edge({2, 3}),
            0.7071067811865476)};
  std::istringstream in(format_events(events));
  const auto back = parse_events(in);
  ASSERT_EQ(back.size(), events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(back[i].kind, events[i].kind);
    EXPECT_EQ(back[i].mesh_a, events[i].mesh_a);
    EXPECT_EQ(back[i].a, events[i].a);
    EXPECT_EQ(back[i].mesh_b, events[i].mesh_b);
    EXPECT_EQ(back[i].b, events[i].b);
    EXPECT_EQ(back[i].t_c, events[i].t_c);
    EXPECT_EQ(back[i].params, events[i].params);
  }
}

TEST(EventIo, MalformedRecordNamesLine) {
  std::istringstream in("CEVT1 2\nVF cloth 0 | collider:0 0 1 2 | 0.5 | 0 0 0\nXX nonsense\n");
  try {
    parse_events(in, "events.txt");
    FAIL() << "expected a FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.path(), "events.txt");
    EXPECT_EQ(e.record(), 3u);
  }
  std::istringstream bad_header("CEVT2 0\n");
  EXPECT_THROW(parse_events(bad_header), FormatError);
  std::istringstream short_list("CEVT1 2\nVF cloth 0 | collider:0 0 1 2 | 0.5 | 0 0 0\n");
  EXPECT_THROW(parse_events(short_list), FormatError);
}
