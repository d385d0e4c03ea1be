// scenario_gen.cpp — enumeration of per-arm turn assignments, rotation-class
// bookkeeping (with a closed-form counting cross-check) and concretization
// into validated simulator vehicle specs.

#include "crossway/scenario_gen.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace crossway {

namespace {

std::uint64_t gcd_u(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

}  // namespace

ScenarioSpace::ScenarioSpace(const MapModel& map, std::size_t junction)
    : map_(&map), junction_(junction) {
  if (junction >= map.junctions().size()) {
    throw ScenarioError("junction index out of range");
  }
  const Junction& j = map.junctions()[junction];
  options_.resize(j.entrances.size());
  for (std::size_t arm = 0; arm < j.entrances.size(); ++arm) {
    std::vector<Turn>& opts = options_[arm];
    for (SegmentId s : map.graph().out_segments(j.entrances[arm])) {
      const Segment& seg = map.graph().segment(s);
      if (seg.label == SegmentLabel::Junction) opts.push_back(seg.turn);
    }
    std::sort(opts.begin(), opts.end(), [this](Turn a, Turn b) {
      return turn_rank(a) < turn_rank(b);
    });
    if (opts.empty()) {
      throw ScenarioError("junction arm without outgoing junction lanes");
    }
  }
}

std::size_t ScenarioSpace::turn_rank(Turn t) const {
  switch (t) {
    case Turn::Right: return 0;
    case Turn::Straight: return 1;
    case Turn::Left: return 2;
  }
  return 3;
}

bool ScenarioSpace::rotation_symmetric() const {
  for (std::size_t arm = 1; arm < options_.size(); ++arm) {
    if (options_[arm] != options_[0]) return false;
  }
  return true;
}

std::vector<SymbolicScenario> ScenarioSpace::enumerate() const {
  std::vector<SymbolicScenario> out;
  SymbolicScenario cur;
  cur.turns.assign(arm_count(), Turn::Right);
  std::vector<std::size_t> idx(arm_count(), 0);
  for (;;) {
    for (std::size_t a = 0; a < arm_count(); ++a) {
      cur.turns[a] = options_[a][idx[a]];
    }
    out.push_back(cur);
    // odometer increment, last arm fastest
    std::size_t a = arm_count();
    while (a > 0) {
      --a;
      if (++idx[a] < options_[a].size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

SymbolicScenario ScenarioSpace::rotate(const SymbolicScenario& s,
                                       std::size_t r) const {
  if (s.turns.size() != arm_count()) {
    throw ScenarioError("scenario arm count does not match the junction");
  }
  if (!rotation_symmetric()) {
    throw ScenarioError("junction arms are not rotation-symmetric");
  }
  const std::size_t n = arm_count();
  SymbolicScenario out;
  out.turns.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    out.turns[a] = s.turns[(a + n - r % n) % n];
  }
  return out;
}

SymbolicScenario ScenarioSpace::canonical(const SymbolicScenario& s) const {
  SymbolicScenario best = rotate(s, 0);
  auto rank_less = [this](const SymbolicScenario& a,
                          const SymbolicScenario& b) {
    for (std::size_t i = 0; i < a.turns.size(); ++i) {
      if (a.turns[i] != b.turns[i]) {
        return turn_rank(a.turns[i]) < turn_rank(b.turns[i]);
      }
    }
    return false;
  };
  for (std::size_t r = 1; r < arm_count(); ++r) {
    SymbolicScenario cand = rotate(s, r);
    if (rank_less(cand, best)) best = cand;
  }
  return best;
}

std::size_t ScenarioSpace::canonical_rotation(const SymbolicScenario& s) const {
  const SymbolicScenario base = canonical(s);
  for (std::size_t r = 0; r < arm_count(); ++r) {
    if (rotate(base, r) == s) return r;
  }
  throw ScenarioError("scenario is not a rotation of its canonical form");
}

std::vector<RotationClass> ScenarioSpace::rotation_classes() const {
  std::map<std::string, RotationClass> classes;
  for (const SymbolicScenario& s : enumerate()) {
    SymbolicScenario base = canonical(s);
    std::string k = key(base);
    auto it = classes.find(k);
    if (it != classes.end()) continue;
    RotationClass rc;
    rc.base = base;
    for (std::size_t r = 0; r < arm_count(); ++r) {
      SymbolicScenario member = rotate(base, r);
      if (std::find(rc.members.begin(), rc.members.end(), member) ==
          rc.members.end()) {
        rc.members.push_back(member);
        rc.rotations.push_back(r);
      }
    }
    classes.emplace(std::move(k), std::move(rc));
  }
  std::vector<RotationClass> out;
  out.reserve(classes.size());
  for (auto& [k, rc] : classes) out.push_back(std::move(rc));
  return out;
}

std::string ScenarioSpace::key(const SymbolicScenario& s) const {
  std::string out;
  for (Turn t : s.turns) {
    switch (t) {
      case Turn::Right: out += 'R'; break;
      case Turn::Straight: out += 'S'; break;
      case Turn::Left: out += 'L'; break;
    }
  }
  return out;
}

std::size_t ScenarioSpace::class_count_by_counting() const {
  if (!rotation_symmetric()) {
    throw ScenarioError("junction arms are not rotation-symmetric");
  }
  const std::uint64_t n = arm_count();
  const std::uint64_t k = options_[0].size();
  std::uint64_t total = 0;
  for (std::uint64_t r = 0; r < n; ++r) {
    std::uint64_t fixed = 1;
    for (std::uint64_t i = 0; i < gcd_u(n, r == 0 ? n : r); ++i) fixed *= k;
    total += fixed;
  }
  return static_cast<std::size_t>(total / n);
}

Itinerary ScenarioSpace::route(std::size_t arm, Turn turn,
                               double gap_m) const {
  if (arm >= arm_count()) throw ScenarioError("arm index out of range");
  if (gap_m <= 0.0) throw ScenarioError("gap must be positive");
  const MetricGraph& g = map_->graph();
  const Junction& j = map_->junctions()[junction_];
  const VertexId en = j.entrances[arm];

  std::optional<SegmentId> lane;
  for (SegmentId s : g.out_segments(en)) {
    const Segment& seg = g.segment(s);
    if (seg.label == SegmentLabel::Junction && seg.turn == turn) lane = s;
  }
  if (!lane) throw ScenarioError("arm has no junction lane for that turn");

  // Approach roads, walking back until the gap is covered.
  std::vector<SegmentId> back;
  VertexId v = en;
  double covered = 0.0;
  while (covered < gap_m) {
    std::optional<SegmentId> prev;
    for (SegmentId s : g.in_segments(v)) {
      if (g.segment(s).label == SegmentLabel::Road) {
        prev = s;
        break;
      }
    }
    if (!prev) throw ScenarioError("approach shorter than the requested gap");
    back.push_back(*prev);
    covered += g.segment(*prev).length;
    v = g.segment(*prev).from;
  }
  std::reverse(back.begin(), back.end());

  Itinerary it;
  const double skipped = covered - gap_m;
  for (std::size_t i = 0; i < back.size(); ++i) {
    it.push_back(
        SubSegment{back[i], i == 0 ? skipped : 0.0, g.segment(back[i]).length});
  }
  it.push_back(SubSegment{*lane, 0.0, g.segment(*lane).length});

  // Exit roads to the end of the maximal road.
  VertexId ex = g.segment(*lane).to;
  for (;;) {
    std::optional<SegmentId> next;
    for (SegmentId s : g.out_segments(ex)) {
      if (g.segment(s).label == SegmentLabel::Road) {
        next = s;
        break;
      }
    }
    if (!next) break;
    it.push_back(SubSegment{*next, 0.0, g.segment(*next).length});
    ex = g.segment(*next).to;
  }
  g.validate_itinerary(it);
  return it;
}

ConcreteScenario ScenarioSpace::concretize(const SymbolicScenario& s,
                                           const std::vector<ArmContext>& ctx,
                                           std::size_t rotation,
                                           const SimConfig& config,
                                           int aggression) const {
  const std::size_t n = arm_count();
  if (s.turns.size() != n) {
    throw ScenarioError("scenario arm count does not match the junction");
  }
  if (ctx.size() != n) {
    throw ScenarioError("context arm count does not match the junction");
  }

  // Speed validation runs against the intended controller.
  SimConfig clean = config;
  clean.faults = FaultSet{};
  clean.deny_all_entries = false;

  ConcreteScenario out;
  const Junction& j = map_->junctions()[junction_];
  for (std::size_t arm = 0; arm < n; ++arm) {
    const ArmContext& c = ctx[arm];
    auto safe = estimate_safe_speed(*map_, j.entrances[arm], c.gap_m,
                                    aggression, clean);
    if (!safe || c.speed_mps > *safe + 1e-9) {
      throw ScenarioError("arm " + std::to_string(arm) + ": speed " +
                          std::to_string(c.speed_mps) +
                          " m/s is unsafe for a " + std::to_string(c.gap_m) +
                          " m gap");
    }
    VehicleSpec spec;
    spec.name = "car" + std::to_string(arm);
    spec.itinerary = route(arm, s.turns[arm], c.gap_m);
    spec.start_speed_mps = c.speed_mps;
    spec.aggression = aggression;
    const std::size_t role = (arm + n - rotation % n) % n;
    spec.red_right_wait_s =
        uniform_in(substream(config.seed, role), config.red_right_wait_min_s,
                   config.red_right_wait_max_s);
    out.vehicles.push_back(std::move(spec));
  }
  out.init_order.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    out.init_order[pos] = (rotation + pos) % n;
  }
  return out;
}

}  // namespace crossway
