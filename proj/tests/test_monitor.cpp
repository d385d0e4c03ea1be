// test_monitor.cpp — progression verdicts, finite-trace corner cases, the
// NotApplicable analysis, and agreement with the table-based evaluator.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <random>

#include "crossway/fixtures.h"
#include "crossway/monitor.h"
#include "test_support.h"

using namespace crossway;

namespace {

AgentSnapshot snap(std::uint32_t index, double offset, double speed,
                   double wait) {
  AgentSnapshot a;
  a.cursor = ItineraryCursor{index, offset};
  a.speed_mps = speed;
  a.waiting_s = wait;
  return a;
}

AgentSnapshot gone() {
  AgentSnapshot a;
  a.active = false;
  return a;
}

/// A trace on the stop map with explicit per-tick snapshots and no lights.
Trace stop_trace(const MapModel& map, std::vector<AgentMeta> agents,
                 std::vector<std::vector<AgentSnapshot>> rows) {
  Trace t(map.checksum(), 0.1, std::move(agents), {});
  double time = 0.0;
  for (auto& row : rows) {
    WorldState s;
    s.time_s = time;
    s.agents = std::move(row);
    t.push(std::move(s));
    time += 0.1;
  }
  return t;
}

}  // namespace

TEST_CASE("overlapping junction occupancy fails p1 with the first shared tick") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"car0", testing::through(map, 0, 'S')},
      {"car1", testing::through(map, 1, 'R')},
  };
  // car0 occupies the junction lane on ticks 5..11, car1 on ticks 8..13.
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 15; ++i) {
    AgentSnapshot a0 = i < 5    ? snap(0, 49.0 + 0.2 * i, 2.0, 0.0)
                       : i < 12 ? snap(1, 1.0 + 2.0 * (i - 5), 2.0, 0.0)
                                : snap(2, 2.0 * (i - 12) + 0.1, 2.0, 0.0);
    AgentSnapshot a1 = i < 8    ? snap(0, 48.8 + 0.2 * i, 2.0, 0.0)
                       : i < 14 ? snap(1, 0.5 + 1.8 * (i - 8), 2.0, 0.0)
                                : snap(2, 0.2, 2.0, 0.0);
    rows.push_back({a0, a1});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  Verdict v = mon.run(mon.builtin("p1"), t);
  CHECK(v.status == Status::Fail);
  REQUIRE(v.witness_tick.has_value());
  CHECK(*v.witness_tick == 8);
  CHECK(v.automaton_states >= 2);
  CHECK(mon.run_oracle(mon.builtin("p1"), t).status == Status::Fail);
}

TEST_CASE("a lone crossing passes p1 and the guard counts as fired") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"car0", testing::through(map, 0, 'S')},
      {"car1", testing::through(map, 1, 'R')},
  };
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 12; ++i) {
    AgentSnapshot a0 = i < 3    ? snap(0, 49.5 + 0.1 * i, 1.0, 0.0)
                       : i < 9  ? snap(1, 0.5 + 2.5 * (i - 3), 2.5, 0.0)
                                : snap(2, 0.5 * (i - 9) + 0.2, 2.5, 0.0);
    // car1 keeps waiting on its approach and never enters.
    AgentSnapshot a1 = snap(0, 49.9, 0.0, 0.1 * i);
    rows.push_back({a0, a1});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  Verdict v = mon.run(mon.builtin("p1"), t);
  CHECK(v.status == Status::Pass);
  CHECK(v.na_reason == NaReason::None);
  CHECK(mon.run_oracle(mon.builtin("p1"), t).status == Status::Pass);
}

TEST_CASE("p1 is trivially satisfied when nobody ever enters") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"car0", testing::through(map, 0, 'S')},
      {"car1", testing::through(map, 1, 'R')},
  };
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 8; ++i) {
    rows.push_back({snap(0, 40.0 + 0.5 * i, 5.0, 0.0),
                    snap(0, 41.0 + 0.5 * i, 5.0, 0.0)});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  Verdict v = mon.run(mon.builtin("p1"), t);
  CHECK(v.status == Status::NotApplicable);
  CHECK(v.na_reason == NaReason::TriviallySatisfied);
  CHECK(mon.run_oracle(mon.builtin("p1"), t).status ==
        Status::NotApplicable);
}

TEST_CASE("light rules collapse to rule-not-applicable on a stop map") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{{"car0", testing::through(map, 0, 'R')}};
  Trace t = stop_trace(map, agents, {{snap(0, 10.0, 3.0, 0.0)}});

  Monitor mon(map, 0);
  for (const char* name : {"p4", "p5"}) {
    Verdict v = mon.run(mon.builtin(name), t);
    CHECK(v.status == Status::NotApplicable);
    CHECK(v.na_reason == NaReason::RuleNotApplicable);
  }
}

TEST_CASE("inactive agents satisfy no location atom") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"car0", testing::through(map, 0, 'S')},
      {"car1", testing::through(map, 1, 'R')},
  };
  // car1 sits inside the junction for two ticks and then despawns while car0
  // is inside: no shared tick, so p1 must pass.
  std::vector<std::vector<AgentSnapshot>> rows{
      {snap(0, 49.0, 2.0, 0.0), snap(1, 5.0, 2.0, 0.0)},
      {snap(0, 49.5, 2.0, 0.0), snap(1, 11.0, 2.0, 0.0)},
      {snap(1, 0.4, 2.0, 0.0), gone()},
      {snap(1, 6.0, 2.0, 0.0), gone()},
  };
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  CHECK(mon.run(mon.builtin("p1"), t).status == Status::Pass);
}

TEST_CASE("strong next fails past the end of the trace") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{{"car0", testing::through(map, 0, 'R')}};
  Trace one = stop_trace(map, agents, {{snap(0, 10.0, 3.0, 0.0)}});
  Trace two = stop_trace(map, agents, {{snap(0, 10.0, 3.0, 0.0)},
                                       {snap(0, 10.3, 3.0, 0.0)}});

  Monitor mon(map, 0);
  FormulaId x_true = mon.arena().next(mon.arena().truth(true));
  Verdict v1 = mon.run(x_true, one);
  CHECK(v1.status == Status::Fail);
  REQUIRE(v1.witness_tick.has_value());
  CHECK(*v1.witness_tick == 0);
  CHECK(mon.run(x_true, two).status == Status::Pass);
  CHECK(mon.run_oracle(x_true, one).status == Status::Fail);
  CHECK(mon.run_oracle(x_true, two).status == Status::Pass);
}

TEST_CASE("until discharges on entry and fails when the trace ends first") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{{"car0", testing::through(map, 0, 'R')}};
  const VertexId en0 = *map.graph().find_vertex("en_0");

  auto approach = [&](int ticks, bool then_enter) {
    std::vector<std::vector<AgentSnapshot>> rows;
    for (int i = 0; i < ticks; ++i) {
      rows.push_back({snap(0, 49.85 + 0.01 * i, 0.5, 0.0)});
    }
    if (then_enter) rows.push_back({snap(1, 0.3, 1.0, 0.0)});
    return stop_trace(map, agents, rows);
  };

  Monitor mon(map, 0);
  FormulaArena& f = mon.arena();
  FormulaId reach = f.until(f.at_entrance(Term::concrete(0), Term::concrete(en0)),
                            f.at_junction(Term::concrete(0)));

  Verdict good = mon.run(reach, approach(4, true));
  CHECK(good.status == Status::Pass);

  Trace never = approach(5, false);
  Verdict bad = mon.run(reach, never);
  CHECK(bad.status == Status::Fail);
  REQUIRE(bad.witness_tick.has_value());
  CHECK(*bad.witness_tick == never.size() - 1);

  CHECK(mon.run_oracle(reach, approach(4, true)).status == Status::Pass);
  CHECK(mon.run_oracle(reach, never).status == Status::Fail);
}

TEST_CASE("a queued agent leaving before its right-hand peer violates p2") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"left", testing::through(map, 1, 'S')},   // waits at en_1
      {"right", testing::through(map, 2, 'R')},  // waits at en_2, has priority
  };
  std::vector<std::vector<AgentSnapshot>> rows;
  rows.push_back({snap(0, 49.85, 1.0, 0.0), snap(0, 49.85, 1.0, 0.0)});
  for (int i = 1; i <= 4; ++i) {  // both stopped with identical waiting time
    rows.push_back(
        {snap(0, 49.9, 0.0, 0.1 * i), snap(0, 49.9, 0.0, 0.1 * i)});
  }
  for (int i = 0; i < 4; ++i) {  // the en_1 agent jumps the queue
    rows.push_back(
        {snap(1, 0.2 + 2.0 * i, 2.0, 0.0), snap(0, 49.9, 0.0, 0.5 + 0.1 * i)});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  Verdict v = mon.run(mon.builtin("p2"), t);
  CHECK(v.status == Status::Fail);
  CHECK(v.witness_tick.has_value());
  CHECK(mon.run_oracle(mon.builtin("p2"), t).status == Status::Fail);

  // p3 never fires here (waiting times stay equal), so it is NA.
  Verdict v3 = mon.run(mon.builtin("p3"), t);
  CHECK(v3.status == Status::NotApplicable);
  CHECK(v3.na_reason == NaReason::TriviallySatisfied);
}

namespace {

/// Random ground formulas over the light-junction signature.
struct FormulaFuzzer {
  FormulaArena& f;
  const MapModel& map;
  std::mt19937_64 rng;
  std::vector<VertexId> entrances;
  std::uint32_t agent_count;
  std::uint32_t light_count;

  FormulaFuzzer(FormulaArena& arena, const MapModel& m, std::uint64_t seed,
                std::uint32_t agents, std::uint32_t lights)
      : f(arena), map(m), rng(seed), agent_count(agents), light_count(lights) {
    entrances = m.junctions().at(0).entrances;
  }

  std::uint32_t pick(std::uint32_t n) {
    return std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
  }

  FormulaId atom() {
    Term agent = Term::concrete(pick(agent_count));
    switch (pick(6)) {
      case 0:
        return f.at_entrance(agent,
                             Term::concrete(entrances[pick(
                                 static_cast<std::uint32_t>(entrances.size()))]));
      case 1: return f.at_junction(agent);
      case 2:
        return f.turn_is(agent, std::array<Turn, 3>{Turn::Right, Turn::Straight,
                                                    Turn::Left}[pick(3)]);
      case 3: return f.wt_eq(agent, Term::concrete(pick(agent_count)));
      case 4: return f.wt_lt(agent, Term::concrete(pick(agent_count)));
      default:
        return f.light_is(Term::concrete(pick(light_count)),
                          std::array<LightColor, 3>{
                              LightColor::Red, LightColor::Yellow,
                              LightColor::Green}[pick(3)]);
    }
  }

  FormulaId gen(int depth) {
    if (depth == 0 || pick(10) < 3) return atom();
    switch (pick(7)) {
      case 0: return f.negation(gen(depth - 1));
      case 1: return f.conj(gen(depth - 1), gen(depth - 1));
      case 2: return f.disj(gen(depth - 1), gen(depth - 1));
      case 3: return f.implies(gen(depth - 1), gen(depth - 1));
      case 4: return f.next(gen(depth - 1));
      case 5: return f.until(gen(depth - 1), gen(depth - 1));
      default: return f.globally(gen(depth - 1));
    }
  }
};

}  // namespace

TEST_CASE("progression agrees with the table evaluator on random inputs") {
  MapModel map = four_way_lights_map(0);
  const std::uint32_t agent_count = 2;
  std::vector<AgentMeta> agents{
      {"a", testing::through(map, 0, 'S')},
      {"b", testing::through(map, 2, 'L')},
  };
  std::vector<std::string> light_ids;
  for (const MapObject* o : map.objects_of(MapObject::Kind::TrafficLight)) {
    light_ids.push_back(o->id);
  }

  std::mt19937_64 rng(0xC0FFEEu);
  auto random_trace = [&](std::size_t ticks) {
    Trace t(map.checksum(), 0.1, agents, light_ids);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t i = 0; i < ticks; ++i) {
      WorldState s;
      s.time_s = 0.1 * static_cast<double>(i);
      for (std::uint32_t a = 0; a < agent_count; ++a) {
        const Itinerary& it = agents[a].itinerary;
        std::uint32_t idx =
            std::uniform_int_distribution<std::uint32_t>(0, 2)(rng);
        double len = it[idx].length();
        double off = uni(rng) * (len - 1e-3);
        double speed = uni(rng) < 0.4 ? 0.0 : uni(rng) * 10.0;
        double wait = speed == 0.0 ? 0.1 * std::floor(uni(rng) * 8.0) : 0.0;
        s.agents.push_back(snap(idx, off, speed, wait));
      }
      for (std::size_t l = 0; l < light_ids.size(); ++l) {
        s.lights.push_back(std::array<LightColor, 3>{
            LightColor::Red, LightColor::Yellow,
            LightColor::Green}[std::uniform_int_distribution<int>(0, 2)(rng)]);
      }
      t.push(std::move(s));
    }
    return t;
  };

  Monitor mon(map, 0);
  FormulaFuzzer fuzz(mon.arena(), map, 0xFEEDu, agent_count,
                     static_cast<std::uint32_t>(light_ids.size()));
  int disagreements = 0;
  for (int round = 0; round < 400; ++round) {
    FormulaId phi = fuzz.gen(4);
    Trace t = random_trace(5 + round % 40);
    Verdict fast = mon.run(phi, t);
    Verdict slow = mon.run_oracle(phi, t);
    if (fast.status != slow.status) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("builtin rules agree between engines on a structured trace") {
  MapModel map = four_way_lights_map(1);
  std::vector<AgentMeta> agents{
      {"a", testing::through(map, 1, 'R')},
      {"b", testing::through(map, 0, 'S')},
  };
  std::vector<std::string> light_ids;
  for (const MapObject* o : map.objects_of(MapObject::Kind::TrafficLight)) {
    light_ids.push_back(o->id);
  }
  Trace t(map.checksum(), 0.1, agents, light_ids);
  for (int i = 0; i < 60; ++i) {
    WorldState s;
    s.time_s = 0.1 * i;
    // Agent a holds just before en_1; agent b crosses from en_0.
    s.agents.push_back(i < 50 ? snap(0, 49.9, 0.0, 0.1 * i)
                              : snap(1, 0.1 + 2.0 * (i - 50), 2.0, 0.0));
    s.agents.push_back(i < 10   ? snap(0, 48.0 + 0.2 * i, 2.0, 0.0)
                       : i < 30 ? snap(1, 0.3 + 0.9 * (i - 10), 9.0, 0.0)
                                : snap(2, 0.4, 9.0, 0.0));
    for (const MapObject* o : map.objects_of(MapObject::Kind::TrafficLight)) {
      s.lights.push_back(light_color_at(*o, s.time_s));
    }
    t.push(std::move(s));
  }

  Monitor mon(map, 0);
  for (const char* name : {"p1", "p2", "p3", "p4", "p5", "p6"}) {
    Verdict fast = mon.run(mon.builtin(name), t);
    Verdict slow = mon.run_oracle(mon.builtin(name), t);
    CHECK_MESSAGE(fast.status == slow.status, name);
    CHECK(fast.automaton_states < Monitor::kStateBudget);
  }
}

TEST_CASE("violating binding names the agents behind a p1 failure") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{
      {"alpha", testing::through(map, 0, 'S')},
      {"beta", testing::through(map, 1, 'R')},
      {"gamma", testing::through(map, 2, 'R')},
  };
  // alpha occupies the junction on ticks 5..11, beta on 8..13; gamma never
  // leaves its approach.
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 15; ++i) {
    AgentSnapshot a0 = i < 5    ? snap(0, 49.0 + 0.2 * i, 2.0, 0.0)
                       : i < 12 ? snap(1, 1.0 + 2.0 * (i - 5), 2.0, 0.0)
                                : snap(2, 2.0 * (i - 12) + 0.1, 2.0, 0.0);
    AgentSnapshot a1 = i < 8    ? snap(0, 48.8 + 0.2 * i, 2.0, 0.0)
                       : i < 14 ? snap(1, 0.5 + 1.8 * (i - 8), 2.0, 0.0)
                                : snap(2, 0.2, 2.0, 0.0);
    AgentSnapshot a2 = snap(0, 40.0, 0.0, 0.1 * i);
    rows.push_back({a0, a1, a2});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  const FormulaId p1 = mon.builtin("p1");
  const Verdict v = mon.run(p1, t);
  REQUIRE(v.status == Status::Fail);
  REQUIRE(v.witness_tick.has_value());

  const auto vb = mon.violating_binding(p1, t);
  REQUIRE(vb.has_value());
  // The binding's witness is the run's witness, and the named instantiation
  // re-checked on its own fails at exactly that tick.
  CHECK(vb->witness_tick == *v.witness_tick);
  REQUIRE(vb->binding.size() == 2);
  CHECK(vb->binding[0].first == "a");
  CHECK(vb->binding[0].second == "alpha");
  CHECK(vb->binding[1].first == "b");
  CHECK(vb->binding[1].second == "beta");

  FormulaArena& arena = mon.arena();
  FormulaId inst = substitute(arena, arena.node(p1).a, "a", 0);
  inst = substitute(arena, arena.node(inst).a, "b", 1);
  const Verdict single = mon.run(inst, t);
  CHECK(single.status == Status::Fail);
  REQUIRE(single.witness_tick.has_value());
  CHECK(*single.witness_tick == *v.witness_tick);

  // The pair in the other order waits three more ticks (beta is still inside
  // when alpha leaves), so the descent picked the earliest-failing pair.
  FormulaId other = substitute(arena, arena.node(p1).a, "a", 1);
  other = substitute(arena, arena.node(other).a, "b", 0);
  const Verdict reversed = mon.run(other, t);
  CHECK(reversed.status == Status::Fail);
  CHECK(*reversed.witness_tick >= *v.witness_tick);
}

TEST_CASE("passing and vacuous runs yield no violating binding") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{{"car0", testing::through(map, 0, 'R')}};
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({i < 4 ? snap(0, 49.5 + 0.1 * i, 1.0, 0.0)
                          : snap(1, 0.5 + 2.0 * (i - 4), 2.0, 0.0)});
  }
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  CHECK_FALSE(mon.violating_binding(mon.builtin("p1"), t).has_value());
  // Light rules collapse to true on a stop map: nothing to bind either.
  CHECK_FALSE(mon.violating_binding(mon.builtin("p4"), t).has_value());
}

TEST_CASE("a failing formula without a universal prefix reports a bare witness") {
  MapModel map = four_way_stop_map();
  std::vector<AgentMeta> agents{{"car0", testing::through(map, 0, 'R')}};
  std::vector<std::vector<AgentSnapshot>> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({snap(0, 40.0, 0.0, 0.1 * i)});
  Trace t = stop_trace(map, agents, rows);

  Monitor mon(map, 0);
  // "someone eventually crosses" fails only at the end of the trace; the
  // existential root stops the descent, so only the tick is reported.
  const FormulaId f = mon.property("exists a:agent. F at(a, J)");
  const Verdict v = mon.run(f, t);
  REQUIRE(v.status == Status::Fail);
  const auto vb = mon.violating_binding(f, t);
  REQUIRE(vb.has_value());
  CHECK(vb->binding.empty());
  CHECK(vb->witness_tick == *v.witness_tick);
}
