#include "crossway/semantic_state.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace crossway {

using nlohmann::ordered_json;

Position agent_position(const AgentMeta& meta, const AgentSnapshot& a) {
  return a.cursor.position(meta.itinerary);
}

bool agent_stopped(const AgentSnapshot& a) {
  return a.speed_mps < kStoppedSpeedMps;
}

bool at_entrance(const MapModel& map, const AgentMeta& meta,
                 const AgentSnapshot& a, VertexId en) {
  if (!a.active) return false;
  auto gap = map.gap_to_entrance(agent_position(meta, a), en);
  return gap && *gap <= kAtEntranceWindowM + kOffsetTolerance;
}

bool in_junction(const MapModel& map, const AgentMeta& meta,
                 const AgentSnapshot& a, std::size_t junction_index) {
  if (!a.active) return false;
  return map.inside_junction(agent_position(meta, a), junction_index);
}

std::optional<Turn> next_junction_turn(const MapModel& map,
                                       const AgentMeta& meta,
                                       const AgentSnapshot& a) {
  if (!a.active) return std::nullopt;
  const auto& g = map.graph();
  for (std::size_t i = a.cursor.index; i < meta.itinerary.size(); ++i) {
    const Segment& seg = g.segment(meta.itinerary[i].segment);
    if (seg.label == SegmentLabel::Junction) return seg.turn;
  }
  return std::nullopt;
}

double advance_agent(const AgentMeta& meta, AgentSnapshot& a, double metres) {
  if (!a.active) return 0.0;
  double moved = advance(meta.itinerary, a.cursor, metres);
  if (remaining(meta.itinerary, a.cursor) <= kOffsetTolerance) {
    a.active = false;
  }
  return moved;
}

void update_waiting(AgentSnapshot& a, double dt) {
  if (agent_stopped(a)) {
    a.waiting_s += dt;
  } else {
    a.waiting_s = 0.0;
  }
}

LightColor light_color_at(const MapObject& light, double time_s) {
  double period = 0.0;
  for (const LightPhase& ph : light.phases) period += ph.duration_s;
  double t = std::fmod(time_s, period);
  if (t < 0.0) t += period;
  for (const LightPhase& ph : light.phases) {
    if (t < ph.duration_s) return ph.color;
    t -= ph.duration_s;
  }
  return light.phases.back().color;
}

Trace::Trace(std::uint64_t map_checksum, double delta_t,
             std::vector<AgentMeta> agents, std::vector<std::string> light_ids)
    : map_checksum_(map_checksum),
      delta_t_(delta_t),
      agents_(std::move(agents)),
      light_ids_(std::move(light_ids)) {}

void Trace::push(WorldState state) {
  if (state.agents.size() != agents_.size() ||
      state.lights.size() != light_ids_.size()) {
    throw TraceError("world state shape does not match the trace header");
  }
  states_.push_back(std::move(state));
}

namespace {

std::string checksum_hex(std::uint64_t checksum) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(checksum));
  return buf;
}

}  // namespace

void Trace::write_jsonl(std::ostream& out, const MapModel& map) const {
  if (map.checksum() != map_checksum_) {
    throw TraceError("trace does not belong to this map");
  }
  ordered_json header;
  header["map_checksum"] = checksum_hex(map_checksum_);
  header["delta_t"] = delta_t_;
  header["agents"] = ordered_json::array();
  for (const AgentMeta& a : agents_) {
    ordered_json meta{{"name", a.name}, {"itinerary", ordered_json::array()}};
    for (const SubSegment& s : a.itinerary) {
      meta["itinerary"].push_back(
          {map.graph().segment(s.segment).name, s.from, s.to});
    }
    header["agents"].push_back(std::move(meta));
  }
  header["lights"] = light_ids_;
  out << header.dump() << '\n';

  for (const WorldState& st : states_) {
    ordered_json row;
    row["t"] = st.time_s;
    row["agents"] = ordered_json::array();
    for (const AgentSnapshot& a : st.agents) {
      if (!a.active) {
        row["agents"].push_back(nullptr);
      } else {
        row["agents"].push_back({{"i", a.cursor.index},
                                 {"o", a.cursor.offset},
                                 {"v", a.speed_mps},
                                 {"w", a.waiting_s}});
      }
    }
    row["lights"] = ordered_json::array();
    for (LightColor c : st.lights) row["lights"].push_back(to_string(c));
    out << row.dump() << '\n';
  }
}

Trace Trace::read_jsonl(std::istream& in, const MapModel& map) {
  std::string line;
  if (!std::getline(in, line)) throw TraceError("trace is empty");
  ordered_json header;
  try {
    header = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw TraceError(std::string("bad trace header: ") + e.what());
  }
  if (header.value("map_checksum", "") != checksum_hex(map.checksum())) {
    throw TraceError("trace was recorded against a different map");
  }
  const double delta_t = header.value("delta_t", 0.0);
  if (!(delta_t > 0.0)) throw TraceError("trace header needs delta_t > 0");

  std::vector<AgentMeta> agents;
  for (const auto& a : header["agents"]) {
    AgentMeta meta;
    meta.name = a.value("name", "");
    for (const auto& s : a["itinerary"]) {
      if (!s.is_array() || s.size() != 3) {
        throw TraceError("itinerary elements must be [segment, from, to]");
      }
      auto seg = map.graph().find_segment(s[0].get<std::string>());
      if (!seg) throw TraceError("itinerary references unknown lane");
      meta.itinerary.push_back(
          SubSegment{*seg, s[1].get<double>(), s[2].get<double>()});
    }
    map.graph().validate_itinerary(meta.itinerary);
    agents.push_back(std::move(meta));
  }
  std::vector<std::string> light_ids =
      header.value("lights", std::vector<std::string>{});

  Trace trace(map.checksum(), delta_t, std::move(agents),
              std::move(light_ids));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json row;
    try {
      row = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw TraceError(std::string("bad trace line: ") + e.what());
    }
    WorldState st;
    st.time_s = row.value("t", 0.0);
    for (const auto& a : row["agents"]) {
      AgentSnapshot snap;
      if (a.is_null()) {
        snap.active = false;
      } else {
        snap.cursor.index = a.value("i", std::size_t{0});
        snap.cursor.offset = a.value("o", 0.0);
        snap.speed_mps = a.value("v", 0.0);
        snap.waiting_s = a.value("w", 0.0);
      }
      st.agents.push_back(snap);
    }
    for (const auto& c : row["lights"]) {
      auto color = light_color_from_string(c.get<std::string>());
      if (!color) throw TraceError("unknown light color in trace");
      st.lights.push_back(*color);
    }
    trace.push(std::move(st));
  }
  return trace;
}

}  // namespace crossway
