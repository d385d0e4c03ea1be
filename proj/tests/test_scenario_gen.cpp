// Tests for scenario enumeration and concretization: product counts against
// closed forms, rotation-class structure against Burnside's counting lemma,
// canonical-form algebra, structural route building, speed validation and
// the rotation invariance of seeded per-role draws.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "crossway/fixtures.h"
#include "crossway/scenario_gen.h"
#include "test_support.h"

using namespace crossway;

TEST_CASE("per-arm options reflect the junction lanes") {
  MapModel four = four_way_stop_map();
  ScenarioSpace s4(four, 0);
  REQUIRE(s4.arm_count() == 4);
  CHECK(s4.rotation_symmetric());
  for (const auto& opts : s4.options()) {
    REQUIRE(opts.size() == 3);
    CHECK(opts[0] == Turn::Right);
    CHECK(opts[1] == Turn::Straight);
    CHECK(opts[2] == Turn::Left);
  }

  MapModel three = three_way_stop_map();
  ScenarioSpace s3(three, 0);
  REQUIRE(s3.arm_count() == 3);
  CHECK(s3.rotation_symmetric());
  for (const auto& opts : s3.options()) {
    REQUIRE(opts.size() == 2);
    CHECK(opts[0] == Turn::Right);
    CHECK(opts[1] == Turn::Left);
  }
}

TEST_CASE("enumeration covers the full product space exactly once") {
  ScenarioSpace s4(four_way_stop_map(), 0);
  auto all4 = s4.enumerate();
  CHECK(all4.size() == 81);  // 3^4
  std::set<std::string> keys;
  for (const auto& s : all4) keys.insert(s4.key(s));
  CHECK(keys.size() == 81);
  CHECK(keys.count("RRRR") == 1);
  CHECK(keys.count("LLLL") == 1);
  CHECK(keys.count("RSLR") == 1);

  ScenarioSpace s3(three_way_stop_map(), 0);
  CHECK(s3.enumerate().size() == 8);  // 2^3
}

TEST_CASE("rotation classes match Burnside's counting lemma") {
  ScenarioSpace s4(four_way_stop_map(), 0);
  auto classes4 = s4.rotation_classes();
  // Independent oracle: (3^4 + 3 + 3^2 + 3) / 4 = 24.
  CHECK(s4.class_count_by_counting() == 24);
  CHECK(classes4.size() == 24);
  std::size_t total = 0;
  for (const auto& rc : classes4) {
    total += rc.members.size();
    CHECK(4 % rc.members.size() == 0);  // orbit size divides the group order
    for (std::size_t i = 0; i < rc.members.size(); ++i) {
      CHECK(s4.canonical(rc.members[i]) == rc.base);
      CHECK(rc.members[i] == s4.rotate(rc.base, rc.rotations[i]));
    }
  }
  CHECK(total == 81);

  ScenarioSpace s3(three_way_stop_map(), 0);
  auto classes3 = s3.rotation_classes();
  CHECK(s3.class_count_by_counting() == 4);  // (2^3 + 2 + 2) / 3
  REQUIRE(classes3.size() == 4);
  std::vector<std::size_t> sizes;
  for (const auto& rc : classes3) sizes.push_back(rc.members.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{1, 1, 3, 3});
}

TEST_CASE("rotation algebra: identity, composition, canonical stability") {
  ScenarioSpace sp(four_way_stop_map(), 0);
  SymbolicScenario s{{Turn::Right, Turn::Straight, Turn::Left, Turn::Right}};
  CHECK(sp.rotate(s, 0) == s);
  CHECK(sp.rotate(s, 4) == s);
  CHECK(sp.rotate(sp.rotate(s, 1), 3) == s);
  CHECK(sp.key(sp.rotate(s, 1)) == "RRSL");

  for (std::size_t r = 0; r < 4; ++r) {
    SymbolicScenario m = sp.rotate(s, r);
    CHECK(sp.canonical(m) == sp.canonical(s));
    CHECK(sp.canonical_rotation(m) == (sp.canonical_rotation(s) + r) % 4);
  }
  // The canonical form is its own representative at rotation zero.
  CHECK(sp.canonical_rotation(sp.canonical(s)) == 0);
}

TEST_CASE("routes run approach, chosen junction lane, exit to the end") {
  MapModel m = four_way_stop_map();
  ScenarioSpace sp(m, 0);
  Itinerary got = sp.route(1, Turn::Left, 0.3);
  Itinerary want = crossway::testing::through_at(m, 1, 'L', 0.3);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == want[i]);
  }
  CHECK_THROWS_AS(sp.route(9, Turn::Left, 1.0), ScenarioError);
  CHECK_THROWS_AS(sp.route(0, Turn::Left, 999.0), ScenarioError);

  MapModel three = three_way_stop_map();
  ScenarioSpace sp3(three, 0);
  CHECK_THROWS_AS(sp3.route(0, Turn::Straight, 1.0), ScenarioError);
  three.graph().validate_itinerary(sp3.route(2, Turn::Left, 5.0));
}

TEST_CASE("concretization validates speeds and emits the bring-up order") {
  MapModel m = four_way_stop_map();
  ScenarioSpace sp(m, 0);
  SymbolicScenario s{{Turn::Straight, Turn::Right, Turn::Right, Turn::Right}};
  SimConfig cfg;
  cfg.delta_t_s = 0.01;

  std::vector<ArmContext> ctx(4, ArmContext{20.0, 10.0});
  ConcreteScenario c = sp.concretize(s, ctx, 1, cfg);
  REQUIRE(c.vehicles.size() == 4);
  CHECK(c.init_order == std::vector<std::size_t>{1, 2, 3, 0});
  for (std::size_t arm = 0; arm < 4; ++arm) {
    CHECK(c.vehicles[arm].start_speed_mps == 10.0);
    m.graph().validate_itinerary(c.vehicles[arm].itinerary);
  }

  // 11 m/s at a 0.3 m gap cannot stop: rejected.
  std::vector<ArmContext> bad = ctx;
  bad[2] = ArmContext{0.3, 11.0};
  CHECK_THROWS_AS(sp.concretize(s, bad, 0, cfg), ScenarioError);
  // Wrong context arity: rejected.
  CHECK_THROWS_AS(sp.concretize(s, {ArmContext{}}, 0, cfg), ScenarioError);
}

TEST_CASE("per-role draws are rotation-invariant across class members") {
  MapModel m = four_way_stop_map();
  ScenarioSpace sp(m, 0);
  SymbolicScenario base{{Turn::Right, Turn::Straight, Turn::Left, Turn::Right}};
  SimConfig cfg;
  cfg.seed = 99;
  std::vector<ArmContext> ctx(4, ArmContext{5.0, 0.0});

  ConcreteScenario at0 = sp.concretize(base, ctx, 0, cfg);
  for (std::size_t r = 1; r < 4; ++r) {
    ConcreteScenario atr = sp.concretize(sp.rotate(base, r), ctx, r, cfg);
    for (std::size_t a = 0; a < 4; ++a) {
      CHECK(atr.vehicles[(a + r) % 4].red_right_wait_s ==
            at0.vehicles[a].red_right_wait_s);
    }
  }
  // Draws depend on the seed and lie inside the configured range.
  SimConfig cfg2 = cfg;
  cfg2.seed = 100;
  ConcreteScenario other = sp.concretize(base, ctx, 0, cfg2);
  bool any_differs = false;
  for (std::size_t a = 0; a < 4; ++a) {
    const double w = at0.vehicles[a].red_right_wait_s;
    CHECK(w >= cfg.red_right_wait_min_s);
    CHECK(w < cfg.red_right_wait_max_s);
    if (other.vehicles[a].red_right_wait_s != w) any_differs = true;
  }
  CHECK(any_differs);
}
