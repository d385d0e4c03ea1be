// simulator.h — deterministic fixed-step traffic micro-simulation on a map
// model: per-vehicle longitudinal control (speed-limit tracking, braking
// curves toward stop lines and junction entry speeds), an all-way-stop grant
// scheduler, traffic-light discipline (red holds, right-on-red, left-turn
// yield), and a set of switchable controller deficiencies used to stress the
// runtime monitor. Every run is a pure function of (map, config, vehicles)
// and records a replayable trace.
#pragma once

#include "crossway/semantic_state.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crossway {

/// Raised for invalid simulation configurations or vehicle setups.
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

/// Longitudinal acceleration/braking limits of an aggression level (1..3).
struct AccelProfile {
  double accel_mps2 = 0.0;
  double brake_mps2 = 0.0;
};

/// Profile lookup; throws SimError unless 1 <= aggression <= 3.
AccelProfile accel_profile(int aggression);

/// Switchable controller deficiencies. All off reproduces the intended
/// behaviour; each switch injects one specific, localized defect.
struct FaultSet {
  /// Vehicles spawn with their controller not yet engaged: they coast for
  /// idle_time_s, then accelerate open-throttle for burst_time_s with every
  /// braking check skipped, and only then fall under normal control.
  bool spawn_burst = false;
  /// The all-way-stop scheduler frees the junction when the occupant reaches
  /// a per-lane boundary zone short of the real exit (release_offset_m)
  /// instead of the true end of the junction lane.
  bool early_release = false;
  /// Same-tick grant ties are resolved by controller bring-up order (or by
  /// agent index when the junction was busy at registration) instead of by
  /// right-of-way.
  bool init_order_priority = false;
  /// Right turners facing red enter after a seeded timer measured from their
  /// stop, without checking cross traffic.
  bool right_on_red_timer = false;
  /// Left turners on green no longer yield to oncoming traffic.
  bool left_yield_off = false;
};

/// Full configuration of a run. Defaults model the intended controller; the
/// bundled campaigns override tick length, junction speeds and fault knobs.
struct SimConfig {
  double delta_t_s = 0.1;
  double horizon_s = 60.0;
  std::uint64_t seed = 0;

  /// Vehicles aim to stop this many metres before a stop line (the junction
  /// entrance vertex).
  double stop_offset_m = 0.05;

  /// Held vehicles inch toward the line once they have stood for
  /// creep_delay_s, at creep_speed_mps, never closer than creep_floor_m.
  /// The creep speed sits below the stopped-speed threshold, so a creeping
  /// vehicle still counts as waiting.
  double creep_speed_mps = 0.002;
  double creep_delay_s = 1.0;
  double creep_floor_m = 0.002;

  /// spawn_burst fault timing (seconds from spawn).
  double idle_time_s = 0.1;
  double burst_time_s = 0.25;

  /// Target speeds on junction lanes by turn direction. Unset: turns default
  /// to 0.6x the map speed limit, straight to the speed limit.
  std::optional<double> target_speed_right_mps;
  std::optional<double> target_speed_left_mps;
  std::optional<double> target_speed_straight_mps;

  /// Controller bring-up order (permutation of vehicle indices); empty means
  /// index order. Consulted by the init_order_priority fault.
  std::vector<std::size_t> init_order;

  /// early_release fault: junction lane name -> metres before the lane end
  /// at which the scheduler already treats the occupant as gone.
  std::map<std::string, double> release_offset_m;

  /// right_on_red_timer fault: wait drawn uniformly from this range (seconds
  /// from the stop) for vehicles without an explicit wait.
  double red_right_wait_min_s = 1.0;
  double red_right_wait_max_s = 3.0;

  /// Suppresses every grant and light permission (used by the safe-speed
  /// probe: the junction never opens, so the vehicle must hold on its own).
  bool deny_all_entries = false;

  FaultSet faults;
};

/// One vehicle of a run: name, full planned itinerary (starts at the first
/// element's `from` offset), initial speed and driving style.
struct VehicleSpec {
  std::string name;
  Itinerary itinerary;
  double start_speed_mps = 0.0;
  int aggression = 2;
  /// Explicit right-on-red wait (seconds from the stop); negative draws one
  /// from the seeded per-vehicle substream.
  double red_right_wait_s = -1.0;
};

/// Scheduler and lifecycle events of a run, for tests and tuning.
struct Diagnostics {
  struct Grant {
    std::size_t tick = 0;
    std::size_t junction = 0;
    std::size_t agent = 0;
    bool rolling = false;  // granted while still moving (never queued)
  };
  struct Release {
    std::size_t tick = 0;
    std::size_t junction = 0;
    std::size_t agent = 0;
  };
  std::vector<Grant> grants;
  std::vector<Release> releases;
  /// Circular right-of-way ties broken by lowest entrance id.
  std::size_t deadlock_breaks = 0;
  /// Per agent: first tick on a junction lane / first tick past all junction
  /// lanes, when those happened inside the horizon.
  std::vector<std::optional<std::size_t>> entry_tick;
  std::vector<std::optional<std::size_t>> exit_tick;
};

/// A finished run: the recorded trace plus scheduler diagnostics.
struct SimResult {
  Trace trace;
  Diagnostics diag;
};

/// Deterministic fixed-step simulator over one map.
class Simulator {
 public:
  /// Validates the configuration; throws SimError on bad values.
  Simulator(const MapModel& map, SimConfig config);

  /// Runs the full horizon and returns the trace (one state per tick,
  /// including the initial one) and diagnostics. Throws SimError for invalid
  /// vehicle specs (bad itinerary, aggression out of range).
  SimResult run(const std::vector<VehicleSpec>& vehicles) const;

  const SimConfig& config() const { return config_; }

 private:
  const MapModel& map_;
  SimConfig config_;
};

/// Largest initial speed (m/s) at which a vehicle placed `gap_m` metres
/// before `entrance` halts without crossing it when the junction never
/// opens, found by bisection over simulated runs under `config`'s fault set.
/// Empty when even a standing start crosses the line (e.g. under the
/// spawn-burst fault at point-blank range).
std::optional<double> estimate_safe_speed(const MapModel& map,
                                          VertexId entrance, double gap_m,
                                          int aggression,
                                          const SimConfig& config);

/// SplitMix64 bijective mixer; basis for all seeded draws.
std::uint64_t splitmix64(std::uint64_t x);

/// Statistically independent substream for (seed, role).
std::uint64_t substream(std::uint64_t seed, std::uint64_t role);

/// Uniform double in [lo, hi) from a substream state, via the 53-bit
/// mantissa mapping (bit-stable across platforms).
double uniform_in(std::uint64_t state, double lo, double hi);

}  // namespace crossway
