// Tests for the semantic layer: location predicates at their window
// boundaries, next-turn lookup along itineraries, waiting-time bookkeeping,
// traffic-light programs, and trace JSONL round trips.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "crossway/fixtures.h"
#include "crossway/semantic_state.h"

using namespace crossway;

namespace {

// Itinerary through the four-way fixture: arm `from` in, turn lane, arm out.
Itinerary through(const MapModel& m, int from, char turn_letter) {
  const auto& g = m.graph();
  const std::string n = std::to_string(from);
  SegmentId in = *g.find_segment("road_in_" + n);
  SegmentId turn = *g.find_segment("j_" + n + "_" + turn_letter);
  int shift = turn_letter == 'R' ? 1 : turn_letter == 'S' ? 2 : 3;
  SegmentId out = *g.find_segment("road_out_" + std::to_string((from + shift) % 4));
  Itinerary it{{in, 0.0, g.segment(in).length},
               {turn, 0.0, g.segment(turn).length},
               {out, 0.0, g.segment(out).length}};
  m.graph().validate_itinerary(it);
  return it;
}

}  // namespace

TEST_CASE("at-entrance window and junction containment track the cursor") {
  MapModel m = four_way_stop_map();
  VertexId en0 = *m.graph().find_vertex("en_0");
  VertexId en1 = *m.graph().find_vertex("en_1");
  AgentMeta meta{"v0", through(m, 0, 'S')};
  AgentSnapshot a;

  // Far from the junction: nothing holds.
  a.cursor = {0, 10.0};
  CHECK_FALSE(at_entrance(m, meta, a, en0));
  CHECK_FALSE(in_junction(m, meta, a, 0));

  // Just outside the window.
  a.cursor = {0, 49.7};
  CHECK_FALSE(at_entrance(m, meta, a, en0));
  // Exactly on the window edge and inside it.
  a.cursor = {0, 49.8};
  CHECK(at_entrance(m, meta, a, en0));
  a.cursor = {0, 49.95};
  CHECK(at_entrance(m, meta, a, en0));
  CHECK_FALSE(at_entrance(m, meta, a, en1));  // wrong entrance
  CHECK_FALSE(in_junction(m, meta, a, 0));    // not in yet

  // Crossing the boundary normalizes onto the junction lane: at-entrance
  // and in-junction never overlap.
  advance_agent(meta, a, 0.1);
  CHECK(a.cursor.index == 1);
  CHECK(a.cursor.offset == doctest::Approx(0.05));
  CHECK_FALSE(at_entrance(m, meta, a, en0));
  CHECK(in_junction(m, meta, a, 0));

  // Leaving the junction clears containment.
  advance_agent(meta, a, 18.0);
  CHECK(a.cursor.index == 2);
  CHECK_FALSE(in_junction(m, meta, a, 0));

  // Finishing the itinerary deactivates the agent and all predicates.
  advance_agent(meta, a, 100.0);
  CHECK_FALSE(a.active);
  CHECK_FALSE(at_entrance(m, meta, a, en0));
  CHECK_FALSE(in_junction(m, meta, a, 0));
}

TEST_CASE("next junction turn reads the remaining itinerary") {
  MapModel m = four_way_stop_map();
  AgentMeta left{"v0", through(m, 2, 'L')};
  AgentSnapshot a;

  a.cursor = {0, 5.0};
  CHECK(next_junction_turn(m, left, a) == Turn::Left);
  a.cursor = {1, 3.0};  // on the junction lane itself
  CHECK(next_junction_turn(m, left, a) == Turn::Left);
  a.cursor = {2, 1.0};  // past the junction: no junction lane remains
  CHECK_FALSE(next_junction_turn(m, left, a).has_value());

  AgentMeta right{"v1", through(m, 1, 'R')};
  a.cursor = {0, 0.0};
  CHECK(next_junction_turn(m, right, a) == Turn::Right);
}

TEST_CASE("waiting time grows while stopped and resets on motion") {
  AgentSnapshot a;
  a.speed_mps = 0.0;
  update_waiting(a, 0.1);
  update_waiting(a, 0.1);
  CHECK(a.waiting_s == doctest::Approx(0.2));
  CHECK(agent_stopped(a));

  a.speed_mps = 0.009;  // still below the stopped threshold
  update_waiting(a, 0.1);
  CHECK(a.waiting_s == doctest::Approx(0.3));

  a.speed_mps = 0.5;
  update_waiting(a, 0.1);
  CHECK(a.waiting_s == 0.0);
  CHECK_FALSE(agent_stopped(a));
}

TEST_CASE("light programs cycle with half-open phases") {
  MapModel m = four_way_lights_map(0);
  auto lights = m.objects_of(MapObject::Kind::TrafficLight);
  const MapObject& green_start = *lights[0];  // arm 0 starts green
  const MapObject& red_start = *lights[1];    // arm 1 starts red

  CHECK(light_color_at(green_start, 0.0) == LightColor::Green);
  CHECK(light_color_at(green_start, 19.99) == LightColor::Green);
  CHECK(light_color_at(green_start, 20.0) == LightColor::Yellow);
  CHECK(light_color_at(green_start, 22.99) == LightColor::Yellow);
  CHECK(light_color_at(green_start, 23.0) == LightColor::Red);
  CHECK(light_color_at(green_start, 45.99) == LightColor::Red);
  CHECK(light_color_at(green_start, 46.0) == LightColor::Green);  // wraps
  CHECK(light_color_at(green_start, 46.0 * 3 + 21.0) == LightColor::Yellow);

  CHECK(light_color_at(red_start, 0.0) == LightColor::Red);
  CHECK(light_color_at(red_start, 22.99) == LightColor::Red);
  CHECK(light_color_at(red_start, 23.0) == LightColor::Green);
  CHECK(light_color_at(red_start, 43.0) == LightColor::Yellow);
  CHECK(light_color_at(red_start, 45.99) == LightColor::Yellow);
}

TEST_CASE("traces round trip through JSONL exactly") {
  MapModel m = four_way_lights_map(1);
  std::vector<AgentMeta> metas{{"v0", through(m, 0, 'S')},
                               {"v1", through(m, 3, 'L')}};
  std::vector<std::string> light_ids;
  for (const MapObject* o : m.objects_of(MapObject::Kind::TrafficLight)) {
    light_ids.push_back(o->id);
  }

  Trace t(m.checksum(), 0.1, metas, light_ids);
  for (int k = 0; k < 5; ++k) {
    WorldState st;
    st.time_s = 0.1 * k;
    AgentSnapshot a0;
    a0.cursor = {0, 3.123456789 * k};
    a0.speed_mps = 1.25 * k;
    a0.waiting_s = 0.0;
    AgentSnapshot a1;
    if (k == 4) {
      a1.active = false;  // finished
    } else {
      a1.cursor = {1, 0.5 * k};
      a1.speed_mps = 0.0;
      a1.waiting_s = 0.1 * k;
    }
    st.agents = {a0, a1};
    for (const MapObject* o : m.objects_of(MapObject::Kind::TrafficLight)) {
      st.lights.push_back(light_color_at(*o, st.time_s));
    }
    t.push(std::move(st));
  }

  std::stringstream buf;
  t.write_jsonl(buf, m);
  Trace back = Trace::read_jsonl(buf, m);

  REQUIRE(back.size() == t.size());
  CHECK(back.delta_t() == t.delta_t());
  REQUIRE(back.agents().size() == 2);
  CHECK(back.agents()[1].name == "v1");
  CHECK(back.agents()[0].itinerary == t.agents()[0].itinerary);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const WorldState& a = t.at(k);
    const WorldState& b = back.at(k);
    CHECK(a.time_s == b.time_s);
    REQUIRE(a.agents.size() == b.agents.size());
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
      CHECK(a.agents[i].active == b.agents[i].active);
      if (a.agents[i].active) {
        CHECK(a.agents[i].cursor.index == b.agents[i].cursor.index);
        CHECK(a.agents[i].cursor.offset == b.agents[i].cursor.offset);
        CHECK(a.agents[i].speed_mps == b.agents[i].speed_mps);
        CHECK(a.agents[i].waiting_s == b.agents[i].waiting_s);
      }
    }
    CHECK(a.lights == b.lights);
  }

  // A second serialization is byte-identical.
  std::stringstream again;
  back.write_jsonl(again, m);
  std::stringstream first;
  t.write_jsonl(first, m);
  CHECK(again.str() == first.str());

  // Replaying against a different map is refused.
  MapModel other = four_way_stop_map();
  std::stringstream buf2;
  t.write_jsonl(buf2, m);
  CHECK_THROWS_AS(Trace::read_jsonl(buf2, other), TraceError);
  CHECK_THROWS_AS(t.write_jsonl(buf2, other), TraceError);
}
