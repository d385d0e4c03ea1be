// Tests for the simulator: straight-road kinematics against closed forms,
// stop-line behaviour (smooth stops, creeping, the spawn-burst fault),
// scheduler grant orders in intended and faulty modes, traffic-light
// discipline, bit-exact determinism and the safe-speed estimator against its
// analytic solution.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "crossway/fixtures.h"
#include "crossway/simulator.h"
#include "test_support.h"

using namespace crossway;
using crossway::testing::through;
using crossway::testing::through_at;

namespace {

/// Two-vertex single-lane road map for pure kinematics.
MapModel straight_road(double length) {
  MetricGraph g;
  VertexId a = g.add_vertex("a");
  VertexId b = g.add_vertex("b");
  g.add_segment("lane", a, b, Turn::Straight, SegmentLabel::Road, length);
  return MapModel::assemble(std::move(g), 11.176, {}, {});
}

double gap_to_vertex(const MapModel& m, const Trace& t, std::size_t agent,
                     std::size_t tick) {
  const AgentSnapshot& s = t.at(tick).agents[agent];
  const SubSegment& el = t.agents()[agent].itinerary[s.cursor.index];
  REQUIRE(m.graph().segment(el.segment).label == SegmentLabel::Road);
  return m.graph().segment(el.segment).length - s.cursor.offset;
}

SimConfig fine_config() {
  SimConfig cfg;
  cfg.delta_t_s = 0.01;
  cfg.horizon_s = 30.0;
  return cfg;
}

}  // namespace

TEST_CASE("straight-road kinematics follow the closed-form ramp") {
  MapModel m = straight_road(400.0);
  SimConfig cfg = fine_config();
  Simulator sim(m, cfg);
  VehicleSpec car;
  car.name = "car";
  car.itinerary = {{0, 0.0, 400.0}};
  car.aggression = 2;
  SimResult res = sim.run({car});

  const double a = accel_profile(2).accel_mps2;
  const double limit = m.speed_limit_mps();
  for (std::size_t k = 0; k < res.trace.size(); k += 25) {
    const AgentSnapshot& s = res.trace.at(k).agents[0];
    if (!s.active) break;
    const double t = res.trace.at(k).time_s;
    CHECK(s.speed_mps == doctest::Approx(std::min(a * t, limit)).epsilon(0.02));
    CHECK(s.speed_mps <= limit + 1e-9);
    // distance: ramp then cruise
    const double t_ramp = limit / a;
    const double want = t <= t_ramp ? 0.5 * a * t * t
                                    : 0.5 * a * t_ramp * t_ramp +
                                          limit * (t - t_ramp);
    CHECK(s.cursor.offset == doctest::Approx(want).epsilon(0.03));
  }
}

TEST_CASE("denied vehicles stop a stop-offset short of the line, then creep") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.deny_all_entries = true;
  Simulator sim(m, cfg);
  VehicleSpec car;
  car.name = "car";
  car.itinerary = through(m, 0, 'S');
  SimResult res = sim.run({car});
  CHECK_FALSE(res.diag.entry_tick[0].has_value());

  // Find the first stopped tick and check the smooth-stop gap.
  std::size_t stop_tick = 0;
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    if (res.trace.at(k).time_s > 1.0 &&
        agent_stopped(res.trace.at(k).agents[0])) {
      stop_tick = k;
      break;
    }
  }
  REQUIRE(stop_tick > 0);
  const double gap0 = gap_to_vertex(m, res.trace, 0, stop_tick);
  CHECK(gap0 > 0.040);
  CHECK(gap0 < 0.062);

  // Ten seconds later the vehicle has crept closer but never past the floor,
  // and it still counts as waiting the whole time.
  const std::size_t later = stop_tick + 1000;
  REQUIRE(later < res.trace.size());
  const double gap1 = gap_to_vertex(m, res.trace, 0, later);
  CHECK(gap1 < gap0 - 0.010);
  CHECK(gap1 >= cfg.creep_floor_m - 1e-9);
  CHECK(res.trace.at(later).agents[0].waiting_s >
        res.trace.at(stop_tick).agents[0].waiting_s + 9.0);

  // And the floor holds to the end of the horizon.
  const double gap_end =
      gap_to_vertex(m, res.trace, 0, res.trace.size() - 1);
  CHECK(gap_end >= cfg.creep_floor_m - 1e-9);
}

TEST_CASE("spawn-burst fault: overshoot stop from 0.3 m, runaway from 0.01 m") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.deny_all_entries = true;
  cfg.faults.spawn_burst = true;
  Simulator sim(m, cfg);

  VehicleSpec far;
  far.name = "far";
  far.itinerary = through_at(m, 0, 'S', 0.3);
  SimResult res_far = sim.run({far});
  CHECK_FALSE(res_far.diag.entry_tick[0].has_value());
  std::size_t stop_tick = 0;
  for (std::size_t k = 0; k < res_far.trace.size(); ++k) {
    if (res_far.trace.at(k).time_s > 0.4 &&
        agent_stopped(res_far.trace.at(k).agents[0])) {
      stop_tick = k;
      break;
    }
  }
  REQUIRE(stop_tick > 0);
  const double gap = gap_to_vertex(m, res_far.trace, 0, stop_tick);
  CHECK(gap > 0.002);
  CHECK(gap < 0.025);
  CHECK(gap < 0.040);  // clearly deeper than a smooth stop

  VehicleSpec close = far;
  close.name = "close";
  close.itinerary = through_at(m, 0, 'S', 0.01);
  SimResult res_close = sim.run({close});
  CHECK(res_close.diag.entry_tick[0].has_value());  // forced through the line
}

TEST_CASE("runs are bit-for-bit reproducible") {
  MapModel m = four_way_lights_map(0);
  SimConfig cfg = fine_config();
  cfg.horizon_s = 12.0;
  cfg.seed = 17;
  cfg.faults.spawn_burst = true;
  cfg.faults.right_on_red_timer = true;
  cfg.faults.left_yield_off = true;
  std::vector<VehicleSpec> cars;
  const char turns[4] = {'S', 'R', 'S', 'R'};
  for (int i = 0; i < 4; ++i) {
    VehicleSpec car;
    car.name = "car" + std::to_string(i);
    car.itinerary = through_at(m, i, turns[i], i % 2 ? 0.3 : 20.0);
    cars.push_back(car);
  }
  Simulator sim(m, cfg);
  std::ostringstream a, b;
  sim.run(cars).trace.write_jsonl(a, m);
  sim.run(cars).trace.write_jsonl(b, m);
  CHECK(a.str() == b.str());
  CHECK(a.str().size() > 1000);
}

TEST_CASE("intended all-way-stop order: rolling first, then right-of-way") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  Simulator sim(m, cfg);
  std::vector<VehicleSpec> cars;
  for (int i = 0; i < 4; ++i) {
    VehicleSpec car;
    car.name = "car" + std::to_string(i);
    car.itinerary = through_at(m, i, 'R', 20.0);
    cars.push_back(car);
  }
  SimResult res = sim.run(cars);
  REQUIRE(res.diag.grants.size() == 4);
  // All four register on the same tick; the circular tie breaks to entrance
  // 0, which rolls through; the rest then go clockwise (each with nobody
  // to their right among those still waiting).
  CHECK(res.diag.grants[0].agent == 0);
  CHECK(res.diag.grants[0].rolling);
  CHECK(res.diag.grants[1].agent == 3);
  CHECK(res.diag.grants[2].agent == 2);
  CHECK(res.diag.grants[3].agent == 1);
  CHECK_FALSE(res.diag.grants[1].rolling);
  CHECK(res.diag.deadlock_breaks == 1);
  // Serialized: each grant only after the previous release.
  REQUIRE(res.diag.releases.size() >= 3);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(res.diag.grants[i].tick >= res.diag.releases[i - 1].tick);
  }
}

TEST_CASE("init-order fault: free-junction ties follow the bring-up order") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.faults.init_order_priority = true;
  cfg.init_order = {2, 3, 0, 1};
  Simulator sim(m, cfg);
  std::vector<VehicleSpec> cars;
  for (int i = 0; i < 4; ++i) {
    VehicleSpec car;
    car.name = "car" + std::to_string(i);
    car.itinerary = through_at(m, i, 'R', 20.0);
    cars.push_back(car);
  }
  SimResult res = sim.run(cars);
  REQUIRE(res.diag.grants.size() == 4);
  CHECK(res.diag.grants[0].agent == 2);
  CHECK(res.diag.grants[1].agent == 3);
  CHECK(res.diag.grants[2].agent == 0);
  CHECK(res.diag.grants[3].agent == 1);
}

TEST_CASE("init-order fault: ties registered at a busy junction go by index") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.faults.init_order_priority = true;
  cfg.init_order = {3, 2, 1, 0};  // would prefer agent 3 first
  cfg.target_speed_right_mps = 2.2;
  Simulator sim(m, cfg);
  std::vector<VehicleSpec> cars;
  for (int i = 0; i < 4; ++i) {
    VehicleSpec car;
    car.name = "car" + std::to_string(i);
    // Agent 0 arrives early and claims the junction; 2 and 3 arrive later
    // on the same tick while it is still inside.
    car.itinerary = through_at(m, i, 'R', i < 2 ? 0.3 : 20.0);
    cars.push_back(car);
  }
  SimResult res = sim.run(cars);
  REQUIRE(res.diag.grants.size() == 4);
  // Agents 0 and 1 register together on a free junction: the bring-up order
  // {3,2,1,0} prefers 1 over 0.
  CHECK(res.diag.grants[0].agent == 1);
  CHECK(res.diag.grants[1].agent == 0);
  // The late pair registers while the junction is busy: index order, despite
  // the bring-up order preferring 3.
  CHECK(res.diag.grants[2].agent == 2);
  CHECK(res.diag.grants[3].agent == 3);
}

TEST_CASE("traffic lights: red holds until green, green goes through") {
  MapModel m = four_way_lights_map(0);  // arms 0 and 2 start green
  SimConfig cfg = fine_config();
  cfg.horizon_s = 40.0;
  Simulator sim(m, cfg);
  VehicleSpec green, red;
  green.name = "green";
  green.itinerary = through_at(m, 0, 'S', 20.0);
  red.name = "red";
  red.itinerary = through_at(m, 1, 'S', 20.0);
  SimResult res = sim.run({green, red});
  REQUIRE(res.diag.entry_tick[0].has_value());
  REQUIRE(res.diag.entry_tick[1].has_value());
  // Green rolls through within a few seconds; red waits for its green at 23 s.
  CHECK(res.trace.at(*res.diag.entry_tick[0]).time_s < 5.0);
  CHECK(res.trace.at(*res.diag.entry_tick[1]).time_s >= 23.0);
  CHECK(res.trace.at(*res.diag.entry_tick[1]).time_s < 26.0);
}

TEST_CASE("left turns yield to oncoming traffic unless the rule is dropped") {
  MapModel m = four_way_lights_map(0);
  SimConfig cfg = fine_config();
  cfg.horizon_s = 20.0;
  VehicleSpec left, oncoming;
  left.name = "left";
  left.itinerary = through_at(m, 0, 'L', 0.3);
  oncoming.name = "oncoming";
  oncoming.itinerary = through_at(m, 2, 'S', 0.3);

  SimResult strict = Simulator(m, cfg).run({left, oncoming});
  REQUIRE(strict.diag.entry_tick[0].has_value());
  REQUIRE(strict.diag.entry_tick[1].has_value());
  // The left waits at the line until the oncoming straight is inside.
  CHECK(*strict.diag.entry_tick[0] > *strict.diag.entry_tick[1]);

  cfg.faults.left_yield_off = true;
  SimResult loose = Simulator(m, cfg).run({left, oncoming});
  REQUIRE(loose.diag.entry_tick[0].has_value());
  REQUIRE(loose.diag.entry_tick[1].has_value());
  // Without the rule both roll in together.
  CHECK(*loose.diag.entry_tick[0] <= *loose.diag.entry_tick[1]);
  CHECK(loose.trace.at(*loose.diag.entry_tick[0]).time_s < 2.0);
}

TEST_CASE("right-on-red timer enters at stop time plus the configured wait") {
  MapModel m = four_way_lights_map(0);
  SimConfig cfg = fine_config();
  cfg.horizon_s = 10.0;
  cfg.faults.right_on_red_timer = true;
  VehicleSpec right;
  right.name = "right";
  right.itinerary = through_at(m, 1, 'R', 0.3);  // arm 1 faces red
  right.red_right_wait_s = 1.5;
  SimResult res = Simulator(m, cfg).run({right});
  REQUIRE(res.diag.entry_tick[0].has_value());
  // Find the stop at the line (skipping the standstill at spawn), then
  // expect entry about 1.5 s later plus the short pull-away.
  double stop_time = -1.0;
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    if (agent_stopped(res.trace.at(k).agents[0]) &&
        gap_to_vertex(m, res.trace, 0, k) < 0.1) {
      stop_time = res.trace.at(k).time_s;
      break;
    }
  }
  REQUIRE(stop_time >= 0.0);
  const double entry_time = res.trace.at(*res.diag.entry_tick[0]).time_s;
  CHECK(entry_time >= stop_time + 1.5 - 0.02);
  CHECK(entry_time < stop_time + 1.5 + 0.35);

  // The intended rule with an empty map: still requires the stop, but then
  // enters without any timer.
  cfg.faults.right_on_red_timer = false;
  SimResult intended = Simulator(m, cfg).run({right});
  REQUIRE(intended.diag.entry_tick[0].has_value());
  CHECK(intended.trace.at(*intended.diag.entry_tick[0]).time_s <
        entry_time - 0.5);
}

TEST_CASE("safe-speed estimate tracks the analytic bound and is monotone") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  VertexId en = *m.graph().find_vertex("en_0");
  for (int aggression : {1, 2, 3}) {
    const double b = accel_profile(aggression).brake_mps2;
    double prev = 0.0;
    for (double d : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
      auto got = estimate_safe_speed(m, en, d, aggression, cfg);
      REQUIRE(got.has_value());
      const double want = std::min(
          m.speed_limit_mps(),
          -b * cfg.delta_t_s +
              std::sqrt(b * b * cfg.delta_t_s * cfg.delta_t_s + 2.0 * b * d));
      CHECK(*got == doctest::Approx(want).epsilon(0.05));
      CHECK(*got >= prev - 1e-9);
      prev = *got;
    }
  }
}

TEST_CASE("safe speed under the spawn-burst fault vanishes at point blank") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.faults.spawn_burst = true;
  VertexId en = *m.graph().find_vertex("en_0");
  CHECK_FALSE(estimate_safe_speed(m, en, 0.01, 2, cfg).has_value());
  // From 5 m the burst is absorbed and a healthy speed remains safe.
  auto far = estimate_safe_speed(m, en, 5.0, 2, cfg);
  REQUIRE(far.has_value());
  CHECK(*far > 3.0);
}

TEST_CASE("no stop from highway speed inside 3.5 m") {
  MapModel m = four_way_stop_map();
  SimConfig cfg = fine_config();
  cfg.deny_all_entries = true;
  for (int aggression : {1, 2, 3}) {
    for (double d : {0.5, 1.5, 2.5, 3.4}) {
      VehicleSpec car;
      car.name = "car";
      car.itinerary = through_at(m, 0, 'S', d);
      car.start_speed_mps = 10.0;
      car.aggression = aggression;
      SimResult res = Simulator(m, cfg).run({car});
      CHECK(res.diag.entry_tick[0].has_value());  // the line is crossed
    }
  }
}

TEST_CASE("configuration validation rejects malformed setups") {
  MapModel m = four_way_stop_map();
  SimConfig cfg;
  cfg.delta_t_s = 0.0;
  CHECK_THROWS_AS(Simulator(m, cfg), SimError);
  cfg = SimConfig{};
  cfg.creep_speed_mps = 0.02;  // would not count as waiting any more
  CHECK_THROWS_AS(Simulator(m, cfg), SimError);
  cfg = SimConfig{};
  cfg.release_offset_m["no_such_lane"] = 1.0;
  CHECK_THROWS_AS(Simulator(m, cfg), SimError);
  cfg = SimConfig{};
  cfg.release_offset_m["road_in_0"] = 1.0;  // not a junction lane
  CHECK_THROWS_AS(Simulator(m, cfg), SimError);

  cfg = SimConfig{};
  Simulator sim(m, cfg);
  VehicleSpec car;
  car.name = "car";
  car.itinerary = through(m, 0, 'S');
  car.aggression = 4;
  CHECK_THROWS_AS(sim.run({car}), SimError);
  car.aggression = 2;
  car.start_speed_mps = 99.0;
  CHECK_THROWS_AS(sim.run({car}), SimError);
  car.start_speed_mps = 0.0;
  SimConfig bad_order = cfg;
  bad_order.init_order = {0, 0};
  CHECK_THROWS_AS(Simulator(m, bad_order).run({car}), SimError);
}
