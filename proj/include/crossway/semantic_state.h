// semantic_state.h — the observable world the properties talk about: agent
// snapshots (itinerary cursor, speed, waiting time), traffic-light colors,
// the location predicates built on the map (at an entrance, inside a
// junction, next turn direction), and JSONL trace recording/replay.
#pragma once

#include "crossway/map_model.h"

#include <iosfwd>
#include <string>
#include <vector>

namespace crossway {

/// Below this speed a vehicle counts as stopped (metres per second).
inline constexpr double kStoppedSpeedMps = 0.01;

/// A vehicle is "at" an entrance while the remaining distance on the road
/// lane feeding that entrance is at most this many metres.
inline constexpr double kAtEntranceWindowM = 0.2;

/// Raised for malformed or mismatched trace documents.
class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

/// Static per-agent data: a display name and the full planned itinerary.
struct AgentMeta {
  std::string name;
  Itinerary itinerary;
};

/// Per-tick agent state. Inactive agents (already finished or not yet
/// spawned) are off the map: every location predicate is false for them.
struct AgentSnapshot {
  bool active = true;
  ItineraryCursor cursor;
  double speed_mps = 0.0;
  double waiting_s = 0.0;
};

/// One tick of the world: simulation time, all agents, all light colors
/// (indexed like the map's traffic-light objects, in document order).
struct WorldState {
  double time_s = 0.0;
  std::vector<AgentSnapshot> agents;
  std::vector<LightColor> lights;
};

/// Current position of an active agent.
Position agent_position(const AgentMeta& meta, const AgentSnapshot& a);

/// True when the agent counts as standing still.
bool agent_stopped(const AgentSnapshot& a);

/// True when the agent sits inside the at-entrance window of `en`: on a road
/// lane ending at `en`, with at most kAtEntranceWindowM metres to go. The
/// cursor normalizes onto the next lane when a boundary is consumed, so this
/// is mutually exclusive with being inside the junction.
bool at_entrance(const MapModel& map, const AgentMeta& meta,
                 const AgentSnapshot& a, VertexId en);

/// True when the agent is on one of the junction's lanes.
bool in_junction(const MapModel& map, const AgentMeta& meta,
                 const AgentSnapshot& a, std::size_t junction_index);

/// Turn direction of the next junction lane on the remaining itinerary,
/// including the current lane; empty when no junction lane remains.
std::optional<Turn> next_junction_turn(const MapModel& map,
                                       const AgentMeta& meta,
                                       const AgentSnapshot& a);

/// Moves an active agent `metres` forward along its itinerary and
/// deactivates it when the itinerary is exhausted. Returns the distance
/// actually travelled.
double advance_agent(const AgentMeta& meta, AgentSnapshot& a, double metres);

/// Accumulates waiting time: grows by `dt` while the agent stands still,
/// resets to zero as soon as it moves.
void update_waiting(AgentSnapshot& a, double dt);

/// Color shown by a traffic light's cyclic program at time `t` (phases are
/// half-open: the instant a phase ends the next one shows).
LightColor light_color_at(const MapObject& light, double time_s);

/// A recorded run: immutable header (map checksum, tick length, agents,
/// light ids) plus the sequence of world states. Serializes to JSON lines:
/// one header line, then one line per tick.
class Trace {
 public:
  Trace(std::uint64_t map_checksum, double delta_t,
        std::vector<AgentMeta> agents, std::vector<std::string> light_ids);

  void push(WorldState state);

  std::uint64_t map_checksum() const { return map_checksum_; }
  double delta_t() const { return delta_t_; }
  const std::vector<AgentMeta>& agents() const { return agents_; }
  const std::vector<std::string>& light_ids() const { return light_ids_; }
  std::size_t size() const { return states_.size(); }
  const WorldState& at(std::size_t i) const { return states_.at(i); }
  const std::vector<WorldState>& states() const { return states_; }

  /// Writes the JSONL form (lane references by name); throws TraceError when
  /// `map` is not the map this trace was recorded on.
  void write_jsonl(std::ostream& out, const MapModel& map) const;

  /// Parses a JSONL trace and resolves lane names against `map`; throws
  /// TraceError on malformed input or when the header's checksum does not
  /// match the map (guards against replaying against the wrong map).
  static Trace read_jsonl(std::istream& in, const MapModel& map);

 private:
  std::uint64_t map_checksum_;
  double delta_t_;
  std::vector<AgentMeta> agents_;
  std::vector<std::string> light_ids_;
  std::vector<WorldState> states_;
};

}  // namespace crossway
