// simulator.cpp — fixed-step vehicle dynamics, the all-way-stop grant
// scheduler, traffic-light discipline and the switchable controller
// deficiencies. The tick pipeline is: record state, update the scheduler
// (release -> register -> grant), then compute every controller command and
// integrate. Each phase sweeps agents in index order, which together with
// seeded draws makes runs bit-reproducible.

#include "crossway/simulator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace crossway {

namespace {

constexpr double kAccelByAggression[3] = {3.5, 4.5, 5.5};
constexpr double kBrakeByAggression[3] = {3.0, 4.25, 5.5};
constexpr double kEps = 1e-9;

/// The junction crossing just ahead on a road-bound agent's itinerary.
struct Approach {
  std::size_t junction = 0;
  SegmentId lane = 0;      // junction lane about to be taken
  VertexId entrance = 0;   // stop-line vertex
  Turn turn = Turn::Straight;
  double dist_m = 0.0;     // metres from the current position to the vertex
};

/// Mutable per-agent run state.
struct AgentRun {
  AgentMeta meta;
  AgentSnapshot snap;
  AccelProfile prof;
  double red_wait_s = 0.0;       // right-on-red timer value (seconds)
  bool red_right = false;        // classified right-on-red at spawn
  double stop_started_s = -1.0;  // time of the first full stop at a line
  bool registered = false;       // queued at a stop junction
  std::size_t reg_tick = 0;
  bool reg_busy = false;         // junction already claimed when registering
  std::size_t reg_junction = 0;
  VertexId reg_entrance = 0;
};

/// Per-junction scheduler state.
struct JunctionCtl {
  bool lights = false;                 // light-governed; else all-way stop
  std::optional<std::size_t> holder;   // agent holding the claim
  bool holder_inside = false;          // holder has reached a junction lane
};

double lookup_offset(const std::map<std::string, double>& table,
                     const std::string& lane) {
  auto it = table.find(lane);
  return it == table.end() ? 0.0 : it->second;
}

std::optional<Approach> approach_ahead(const MapModel& map,
                                       const AgentMeta& meta,
                                       const ItineraryCursor& cur) {
  const Itinerary& it = meta.itinerary;
  const MetricGraph& g = map.graph();
  if (g.segment(it[cur.index].segment).label == SegmentLabel::Junction) {
    return std::nullopt;  // already inside
  }
  double d = it[cur.index].to - cur.offset;
  for (std::size_t m = cur.index + 1; m < it.size(); ++m) {
    const Segment& seg = g.segment(it[m].segment);
    if (seg.label == SegmentLabel::Junction) {
      Approach ap;
      ap.junction = *map.junction_of_segment(it[m].segment);
      ap.lane = it[m].segment;
      ap.entrance = seg.from;
      ap.turn = seg.turn;
      ap.dist_m = d;
      return ap;
    }
    d += it[m].to - it[m].from;
  }
  return std::nullopt;
}

/// Entrance of the same junction in relation `rel` to `en`, if any.
template <typename Rel>
std::optional<VertexId> related_entrance(const MapModel& map, std::size_t j,
                                         VertexId en, Rel rel) {
  for (VertexId other : map.junctions()[j].entrances) {
    if (other != en && rel(en, other)) return other;
  }
  return std::nullopt;
}

}  // namespace

AccelProfile accel_profile(int aggression) {
  if (aggression < 1 || aggression > 3) {
    throw SimError("aggression must be 1, 2 or 3, got " +
                   std::to_string(aggression));
  }
  return {kAccelByAggression[aggression - 1],
          kBrakeByAggression[aggression - 1]};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t role) {
  return splitmix64(splitmix64(seed) ^ splitmix64(~role));
}

double uniform_in(std::uint64_t state, double lo, double hi) {
  const double unit =
      static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Simulator::Simulator(const MapModel& map, SimConfig config)
    : map_(map), config_(std::move(config)) {
  if (!(config_.delta_t_s > 0.0)) throw SimError("delta_t_s must be positive");
  if (config_.horizon_s < 0.0) throw SimError("horizon_s must not be negative");
  if (config_.horizon_s / config_.delta_t_s > 5e6) {
    throw SimError("horizon would exceed 5e6 ticks");
  }
  if (config_.stop_offset_m < 0.0) {
    throw SimError("stop_offset_m must not be negative");
  }
  if (config_.creep_speed_mps < 0.0 ||
      config_.creep_speed_mps >= kStoppedSpeedMps) {
    throw SimError("creep_speed_mps must stay below the stopped threshold");
  }
  if (config_.creep_floor_m < 0.0) {
    throw SimError("creep_floor_m must not be negative");
  }
  if (config_.idle_time_s < 0.0 || config_.burst_time_s < 0.0) {
    throw SimError("spawn burst times must not be negative");
  }
  if (config_.red_right_wait_min_s > config_.red_right_wait_max_s) {
    throw SimError("red_right_wait range is inverted");
  }
  for (const auto& [lane, off] : config_.release_offset_m) {
    auto sid = map_.graph().find_segment(lane);
    if (!sid || !map_.junction_of_segment(*sid)) {
      throw SimError("release offset names no junction lane: " + lane);
    }
    if (off < 0.0 || off >= map_.graph().segment(*sid).length) {
      throw SimError("release offset out of range for lane " + lane);
    }
  }
  for (const auto& t :
       {config_.target_speed_right_mps, config_.target_speed_left_mps,
        config_.target_speed_straight_mps}) {
    if (t && *t <= 0.0) throw SimError("junction target speeds must be positive");
  }
}

SimResult Simulator::run(const std::vector<VehicleSpec>& vehicles) const {
  const MetricGraph& g = map_.graph();
  const double dt = config_.delta_t_s;
  const double limit = map_.speed_limit_mps();
  const std::size_t n = vehicles.size();

  std::vector<std::size_t> init_pos(n);
  std::iota(init_pos.begin(), init_pos.end(), std::size_t{0});
  if (!config_.init_order.empty()) {
    if (config_.init_order.size() != n) {
      throw SimError("init_order size does not match the vehicle count");
    }
    std::vector<std::size_t> sorted = config_.init_order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (sorted[i] != i) throw SimError("init_order is not a permutation");
    }
    for (std::size_t pos = 0; pos < n; ++pos) {
      init_pos[config_.init_order[pos]] = pos;
    }
  }

  const double speed_right =
      config_.target_speed_right_mps.value_or(0.6 * limit);
  const double speed_left = config_.target_speed_left_mps.value_or(0.6 * limit);
  const double speed_straight =
      config_.target_speed_straight_mps.value_or(limit);
  auto turn_speed = [&](Turn t) {
    switch (t) {
      case Turn::Right: return speed_right;
      case Turn::Left: return speed_left;
      case Turn::Straight: return speed_straight;
    }
    return limit;
  };

  // Light objects by the entrance they guard, plus the trace header ids.
  std::unordered_map<VertexId, const MapObject*> light_at;
  std::vector<const MapObject*> lights = map_.objects_of(MapObject::Kind::TrafficLight);
  std::vector<std::string> light_ids;
  for (const MapObject* o : lights) {
    light_at[map_.guarded_entrance(*o)] = o;
    light_ids.push_back(o->id);
  }

  std::vector<JunctionCtl> ctl(map_.junctions().size());
  for (std::size_t j = 0; j < ctl.size(); ++j) {
    for (VertexId en : map_.junctions()[j].entrances) {
      if (light_at.count(en)) ctl[j].lights = true;
    }
  }

  std::vector<AgentRun> runs;
  runs.reserve(n);
  std::vector<AgentMeta> metas;
  metas.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VehicleSpec& spec = vehicles[i];
    if (spec.itinerary.empty()) {
      throw SimError("vehicle '" + spec.name + "' has an empty itinerary");
    }
    g.validate_itinerary(spec.itinerary);
    if (spec.start_speed_mps < 0.0 || spec.start_speed_mps > limit + kEps) {
      throw SimError("vehicle '" + spec.name +
                     "' starts outside [0, speed limit]");
    }
    AgentRun r;
    r.meta = AgentMeta{spec.name, spec.itinerary};
    r.snap.active = true;
    r.snap.cursor = ItineraryCursor{0, spec.itinerary.front().from};
    r.snap.speed_mps = spec.start_speed_mps;
    r.prof = accel_profile(spec.aggression);
    r.red_wait_s = spec.red_right_wait_s >= 0.0
                       ? spec.red_right_wait_s
                       : uniform_in(substream(config_.seed, i),
                                    config_.red_right_wait_min_s,
                                    config_.red_right_wait_max_s);
    if (config_.faults.right_on_red_timer) {
      auto ap = approach_ahead(map_, r.meta, r.snap.cursor);
      if (ap && ap->turn == Turn::Right && ctl[ap->junction].lights) {
        auto lit = light_at.find(ap->entrance);
        if (lit != light_at.end() &&
            light_color_at(*lit->second, 0.0) == LightColor::Red) {
          r.red_right = true;
        }
      }
    }
    runs.push_back(std::move(r));
    metas.push_back(runs.back().meta);
  }

  Diagnostics diag;
  diag.entry_tick.assign(n, std::nullopt);
  diag.exit_tick.assign(n, std::nullopt);

  Trace trace(map_.checksum(), dt, metas, light_ids);

  auto in_junction_lane = [&](const AgentRun& r, std::size_t j) {
    if (!r.snap.active) return false;
    SegmentId sid = r.meta.itinerary[r.snap.cursor.index].segment;
    auto oj = map_.junction_of_segment(sid);
    return oj && *oj == j;
  };

  auto junction_occupied = [&](std::size_t j, std::size_t except) {
    for (std::size_t m = 0; m < n; ++m) {
      if (m != except && in_junction_lane(runs[m], j)) return true;
    }
    return false;
  };

  // May agent i cross its stop line this tick?
  auto may_enter = [&](std::size_t i, const Approach& ap, double now) {
    if (config_.deny_all_entries) return false;
    const AgentRun& r = runs[i];
    const JunctionCtl& c = ctl[ap.junction];
    if (!c.lights) return c.holder && *c.holder == i;

    auto lit = light_at.find(ap.entrance);
    LightColor color = lit == light_at.end()
                           ? LightColor::Green
                           : light_color_at(*lit->second, now);
    if (color == LightColor::Green) {
      if (ap.turn == Turn::Left && !config_.faults.left_yield_off) {
        auto opp = related_entrance(
            map_, ap.junction, ap.entrance,
            [&](VertexId a, VertexId b) { return map_.opposite(a, b); });
        if (opp) {
          for (std::size_t m = 0; m < n; ++m) {
            if (m == i || !runs[m].snap.active) continue;
            // Yield while oncoming non-left traffic is still approaching the
            // opposite entrance, at any distance: the decision must fall
            // while stopping is still possible, long before the oncoming
            // vehicle reaches its stop line.
            auto oap =
                approach_ahead(map_, runs[m].meta, runs[m].snap.cursor);
            if (oap && oap->junction == ap.junction &&
                oap->entrance == *opp && oap->turn != Turn::Left) {
              return false;  // oncoming traffic has priority
            }
          }
        }
      }
      return true;
    }
    if (ap.turn != Turn::Right) return false;
    if (config_.faults.right_on_red_timer && r.red_right) {
      return r.stop_started_s >= 0.0 &&
             now + kEps >= r.stop_started_s + r.red_wait_s;
    }
    // Intended right-on-red: full stop first, junction empty, and nobody at
    // the entrance whose straight lane merges into the same exit arm.
    if (r.stop_started_s < 0.0) return false;
    if (junction_occupied(ap.junction, i)) return false;
    auto merge = related_entrance(
        map_, ap.junction, ap.entrance,
        [&](VertexId a, VertexId b) { return map_.right_of(a, b); });
    if (merge) {
      for (std::size_t m = 0; m < n; ++m) {
        if (m == i || !runs[m].snap.active) continue;
        if (at_entrance(map_, runs[m].meta, runs[m].snap, *merge)) return false;
      }
    }
    return true;
  };

  auto command_speed = [&](std::size_t i, double now) {
    AgentRun& r = runs[i];
    const double b = r.prof.brake_mps2;
    if (config_.faults.spawn_burst && !r.red_right) {
      if (now < config_.idle_time_s - kEps) return r.snap.speed_mps;
      if (now < config_.idle_time_s + config_.burst_time_s - kEps) {
        return limit;  // open throttle, braking checks skipped
      }
    }
    const Segment& cur = g.segment(r.meta.itinerary[r.snap.cursor.index].segment);
    if (cur.label == SegmentLabel::Junction) {
      return std::min(limit, turn_speed(cur.turn));
    }
    auto ap = approach_ahead(map_, r.meta, r.snap.cursor);
    if (!ap) return limit;
    const double entry_v = std::min(limit, turn_speed(ap->turn));
    const double curve_enter =
        std::sqrt(entry_v * entry_v + 2.0 * b * ap->dist_m);
    if (may_enter(i, *ap, now)) return std::min(limit, curve_enter);
    // Denied: aim to stop stop_offset_m short of the vertex — unless even
    // braking flat out cannot avoid the line any more (the vehicle is
    // committed, e.g. after an open-throttle burst), in which case carry on.
    const double v = r.snap.speed_mps;
    if (v * v / (2.0 * b) > ap->dist_m + kEps) {
      return std::min(limit, curve_enter);
    }
    const double d_stop = ap->dist_m - config_.stop_offset_m;
    double v_stop = d_stop <= 0.0
                        ? 0.0
                        : -b * dt + std::sqrt(b * b * dt * dt + 2.0 * b * d_stop);
    if (r.snap.waiting_s + kEps >= config_.creep_delay_s &&
        ap->dist_m > config_.creep_floor_m + kEps) {
      const double creep = std::min(config_.creep_speed_mps,
                                    (ap->dist_m - config_.creep_floor_m) / dt);
      v_stop = std::max(v_stop, creep);
    }
    return std::min(limit, v_stop);
  };

  const auto ticks = static_cast<std::size_t>(std::llround(config_.horizon_s / dt));
  for (std::size_t k = 0; k <= ticks; ++k) {
    const double now = static_cast<double>(k) * dt;

    WorldState state;
    state.time_s = now;
    state.agents.reserve(n);
    for (const AgentRun& r : runs) state.agents.push_back(r.snap);
    state.lights.reserve(lights.size());
    for (const MapObject* o : lights) {
      state.lights.push_back(light_color_at(*o, now));
    }
    trace.push(std::move(state));
    if (k == ticks) break;

    // --- all-way-stop scheduler: release, register, grant ---
    for (std::size_t j = 0; j < ctl.size(); ++j) {
      JunctionCtl& c = ctl[j];
      if (c.lights || !c.holder) continue;
      AgentRun& h = runs[*c.holder];
      bool release = false;
      if (!h.snap.active) {
        release = true;
      } else if (in_junction_lane(h, j)) {
        c.holder_inside = true;
        if (config_.faults.early_release) {
          const SubSegment& el = h.meta.itinerary[h.snap.cursor.index];
          const Segment& seg = g.segment(el.segment);
          const double off = lookup_offset(config_.release_offset_m, seg.name);
          if (off > 0.0 && h.snap.cursor.offset >= seg.length - off - kEps) {
            release = true;
          }
        }
      } else if (c.holder_inside) {
        release = true;  // crossed onto the exit road
      }
      if (release) {
        diag.releases.push_back({k, j, *c.holder});
        c.holder.reset();
        c.holder_inside = false;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      AgentRun& r = runs[i];
      if (!r.snap.active || r.registered) continue;
      auto ap = approach_ahead(map_, r.meta, r.snap.cursor);
      if (!ap || ctl[ap->junction].lights) continue;
      if (ap->dist_m <= kAtEntranceWindowM + kEps) {
        r.registered = true;
        r.reg_tick = k;
        r.reg_busy = ctl[ap->junction].holder.has_value();
        r.reg_junction = ap->junction;
        r.reg_entrance = ap->entrance;
      }
    }

    for (std::size_t j = 0; j < ctl.size(); ++j) {
      JunctionCtl& c = ctl[j];
      if (c.lights || c.holder || config_.deny_all_entries) continue;
      std::vector<std::size_t> cands;
      for (std::size_t i = 0; i < n; ++i) {
        if (runs[i].registered && runs[i].snap.active &&
            runs[i].reg_junction == j) {
          cands.push_back(i);
        }
      }
      if (cands.empty()) continue;
      std::size_t min_tick = runs[cands.front()].reg_tick;
      for (std::size_t i : cands) min_tick = std::min(min_tick, runs[i].reg_tick);
      std::vector<std::size_t> tied;
      for (std::size_t i : cands) {
        if (runs[i].reg_tick == min_tick) tied.push_back(i);
      }
      std::size_t pick = tied.front();
      if (tied.size() > 1) {
        if (config_.faults.init_order_priority) {
          if (!runs[tied.front()].reg_busy) {
            for (std::size_t i : tied) {
              if (init_pos[i] < init_pos[pick]) pick = i;
            }
          }
          // else: keep index order (tied is index-sorted already)
        } else {
          // Right-of-way: grant a vehicle with nobody to its right; a full
          // circle falls back to the lowest entrance id.
          std::vector<std::size_t> clear;
          for (std::size_t x : tied) {
            bool blocked = false;
            for (std::size_t z : tied) {
              if (z != x &&
                  map_.right_of(runs[z].reg_entrance, runs[x].reg_entrance)) {
                blocked = true;
                break;
              }
            }
            if (!blocked) clear.push_back(x);
          }
          const std::vector<std::size_t>& pool = clear.empty() ? tied : clear;
          if (clear.empty()) ++diag.deadlock_breaks;
          pick = pool.front();
          for (std::size_t x : pool) {
            if (runs[x].reg_entrance < runs[pick].reg_entrance) pick = x;
          }
        }
      }
      c.holder = pick;
      diag.grants.push_back({k, j, pick, !agent_stopped(runs[pick].snap)});
    }

    // --- controller commands (all against the state at `now`), then motion ---
    std::vector<double> cmds(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (runs[i].snap.active) cmds[i] = command_speed(i, now);
    }
    for (std::size_t i = 0; i < n; ++i) {
      AgentRun& r = runs[i];
      if (!r.snap.active) continue;
      const double v_cmd = cmds[i];
      const double v = r.snap.speed_mps;
      double v_new = std::clamp(v_cmd, v - r.prof.brake_mps2 * dt,
                                v + r.prof.accel_mps2 * dt);
      v_new = std::clamp(v_new, 0.0, limit);
      advance_agent(r.meta, r.snap, v_new * dt);
      r.snap.speed_mps = v_new;
      update_waiting(r.snap, dt);

      if (r.snap.active) {
        const Segment& seg =
            g.segment(r.meta.itinerary[r.snap.cursor.index].segment);
        if (seg.label == SegmentLabel::Junction) {
          if (!diag.entry_tick[i]) diag.entry_tick[i] = k + 1;
          r.registered = false;
        } else if (diag.entry_tick[i] && !diag.exit_tick[i]) {
          diag.exit_tick[i] = k + 1;
        }
        if (agent_stopped(r.snap) && r.stop_started_s < 0.0) {
          auto ap = approach_ahead(map_, r.meta, r.snap.cursor);
          if (ap && ap->dist_m <= kAtEntranceWindowM + kEps) {
            r.stop_started_s = now + dt;
          }
        }
      } else {
        r.registered = false;
        if (diag.entry_tick[i] && !diag.exit_tick[i]) diag.exit_tick[i] = k + 1;
      }
    }
  }

  return SimResult{std::move(trace), std::move(diag)};
}

std::optional<double> estimate_safe_speed(const MapModel& map,
                                          VertexId entrance, double gap_m,
                                          int aggression,
                                          const SimConfig& config) {
  if (gap_m <= 0.0) throw SimError("safe-speed gap must be positive");
  const MetricGraph& g = map.graph();

  std::optional<SegmentId> junction_lane;
  for (SegmentId s : g.out_segments(entrance)) {
    if (g.segment(s).label == SegmentLabel::Junction) {
      junction_lane = s;
      break;
    }
  }
  if (!junction_lane) {
    throw SimError("vertex " + g.vertex_name(entrance) +
                   " is not a junction entrance");
  }

  // Walk back over road lanes until `gap_m` metres are covered.
  std::vector<SegmentId> chain;
  VertexId v = entrance;
  double covered = 0.0;
  while (covered < gap_m) {
    std::optional<SegmentId> back;
    for (SegmentId s : g.in_segments(v)) {
      if (g.segment(s).label == SegmentLabel::Road) {
        back = s;
        break;
      }
    }
    if (!back) throw SimError("approach shorter than the requested gap");
    chain.push_back(*back);
    covered += g.segment(*back).length;
    v = g.segment(*back).from;
  }
  std::reverse(chain.begin(), chain.end());

  Itinerary it;
  double overshoot = covered - gap_m;  // skipped metres on the first lane
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Segment& seg = g.segment(chain[i]);
    it.push_back(SubSegment{chain[i], i == 0 ? overshoot : 0.0, seg.length});
  }
  it.push_back(
      SubSegment{*junction_lane, 0.0, g.segment(*junction_lane).length});

  SimConfig probe = config;
  probe.deny_all_entries = true;
  probe.horizon_s = std::min(config.horizon_s, 12.0);
  Simulator sim(map, probe);

  auto crosses = [&](double speed) {
    VehicleSpec spec;
    spec.name = "probe";
    spec.itinerary = it;
    spec.start_speed_mps = speed;
    spec.aggression = aggression;
    return sim.run({spec}).diag.entry_tick[0].has_value();
  };

  if (crosses(0.0)) return std::nullopt;
  double lo = 0.0;
  double hi = map.speed_limit_mps();
  if (!crosses(hi)) return hi;
  for (int iter = 0; iter < 48; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (crosses(mid) ? hi : lo) = mid;
  }
  return lo;
}

}  // namespace crossway
