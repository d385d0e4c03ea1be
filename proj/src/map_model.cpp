#include "crossway/map_model.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace crossway {

using nlohmann::ordered_json;

const char* to_string(LightColor c) {
  switch (c) {
    case LightColor::Red: return "red";
    case LightColor::Yellow: return "yellow";
    case LightColor::Green: return "green";
  }
  return "?";
}

std::optional<LightColor> light_color_from_string(const std::string& s) {
  if (s == "red") return LightColor::Red;
  if (s == "yellow") return LightColor::Yellow;
  if (s == "green") return LightColor::Green;
  return std::nullopt;
}

namespace {

VertexId intern_vertex(MetricGraph& g, const std::string& name) {
  if (auto v = g.find_vertex(name)) return *v;
  return g.add_vertex(name);
}

}  // namespace

MapModel MapModel::from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw MapError(std::string("map document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MapError("map document must be a JSON object");
  if (!doc.contains("speed_limit_mps") || !doc["speed_limit_mps"].is_number()) {
    throw MapError("map document needs a numeric speed_limit_mps");
  }
  if (!doc.contains("lanes") || !doc["lanes"].is_array() ||
      doc["lanes"].empty()) {
    throw MapError("map document needs a non-empty lanes array");
  }

  MetricGraph graph;
  for (const auto& lane : doc["lanes"]) {
    for (const char* key : {"id", "from", "to", "turn", "label"}) {
      if (!lane.contains(key) || !lane[key].is_string()) {
        throw MapError(std::string("lane entry missing string field ") + key);
      }
    }
    if (!lane.contains("length_m") || !lane["length_m"].is_number()) {
      throw MapError("lane entry missing numeric length_m");
    }
    auto turn = turn_from_string(lane["turn"].get<std::string>());
    if (!turn) {
      throw MapError("lane '" + lane["id"].get<std::string>() +
                     "' has unknown turn '" + lane["turn"].get<std::string>() +
                     "'");
    }
    auto label = label_from_string(lane["label"].get<std::string>());
    if (!label) {
      throw MapError("lane '" + lane["id"].get<std::string>() +
                     "' has unknown label '" +
                     lane["label"].get<std::string>() + "'");
    }
    VertexId from = intern_vertex(graph, lane["from"].get<std::string>());
    VertexId to = intern_vertex(graph, lane["to"].get<std::string>());
    try {
      graph.add_segment(lane["id"].get<std::string>(), from, to, *turn,
                        *label, lane["length_m"].get<double>());
    } catch (const GraphError& e) {
      throw MapError(e.what());
    }
  }

  std::vector<MapObject> objects;
  if (doc.contains("objects")) {
    for (const auto& obj : doc["objects"]) {
      MapObject out;
      const std::string kind = obj.value("kind", "");
      if (kind == "stop_sign") {
        out.kind = MapObject::Kind::StopSign;
      } else if (kind == "traffic_light") {
        out.kind = MapObject::Kind::TrafficLight;
      } else {
        throw MapError("object has unknown kind '" + kind + "'");
      }
      if (!obj.contains("id") || !obj["id"].is_string()) {
        throw MapError("object entry missing string id");
      }
      out.id = obj["id"].get<std::string>();
      auto lane = graph.find_segment(obj.value("lane", ""));
      if (!lane) {
        throw MapError("object '" + out.id + "' references unknown lane");
      }
      out.lane = *lane;
      out.offset_m = obj.value("offset_m", -1.0);
      if (out.kind == MapObject::Kind::TrafficLight) {
        if (!obj.contains("phases") || !obj["phases"].is_array() ||
            obj["phases"].empty()) {
          throw MapError("traffic light '" + out.id +
                         "' needs a non-empty phases array");
        }
        for (const auto& ph : obj["phases"]) {
          auto color = light_color_from_string(ph.value("color", ""));
          if (!color) {
            throw MapError("traffic light '" + out.id +
                           "' phase has unknown color");
          }
          const double dur = ph.value("duration_s", -1.0);
          if (!(dur > 0.0)) {
            throw MapError("traffic light '" + out.id +
                           "' phase needs positive duration_s");
          }
          out.phases.push_back({*color, dur});
        }
      }
      objects.push_back(std::move(out));
    }
  }

  std::vector<std::pair<VertexId, VertexId>> entex;
  if (doc.contains("entex")) {
    for (const auto& pair : doc["entex"]) {
      if (!pair.is_array() || pair.size() != 2) {
        throw MapError("entex entries must be [entrance, exit] pairs");
      }
      auto en = graph.find_vertex(pair[0].get<std::string>());
      auto ex = graph.find_vertex(pair[1].get<std::string>());
      if (!en || !ex) throw MapError("entex pair references unknown vertex");
      entex.emplace_back(*en, *ex);
    }
  }

  return assemble(std::move(graph), doc["speed_limit_mps"].get<double>(),
                  std::move(objects), std::move(entex));
}

MapModel MapModel::assemble(MetricGraph graph, double speed_limit_mps,
                            std::vector<MapObject> objects,
                            std::vector<std::pair<VertexId, VertexId>> entex) {
  MapModel m;
  m.graph_ = std::move(graph);
  m.speed_limit_mps_ = speed_limit_mps;
  m.objects_ = std::move(objects);
  m.entex_pairs_ = std::move(entex);
  m.decompose();
  m.validate();
  return m;
}

void MapModel::decompose() {
  const auto& g = graph_;
  const std::size_t nseg = g.segment_count();

  // --- Junctions: weakly-connected components of junction lanes. ---
  std::vector<int> comp(nseg, -1);
  int ncomp = 0;
  for (SegmentId s = 0; s < nseg; ++s) {
    if (g.segment(s).label != SegmentLabel::Junction || comp[s] != -1) {
      continue;
    }
    // BFS over junction lanes sharing a vertex.
    std::vector<SegmentId> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      SegmentId cur = stack.back();
      stack.pop_back();
      for (VertexId v : {g.segment(cur).from, g.segment(cur).to}) {
        for (const auto& adjacent : {g.out_segments(v), g.in_segments(v)}) {
          for (SegmentId nxt : adjacent) {
            if (g.segment(nxt).label == SegmentLabel::Junction &&
                comp[nxt] == -1) {
              comp[nxt] = ncomp;
              stack.push_back(nxt);
            }
          }
        }
      }
    }
    ++ncomp;
  }

  junctions_.assign(ncomp, Junction{});
  for (SegmentId s = 0; s < nseg; ++s) {
    if (comp[s] >= 0) junctions_[comp[s]].lanes.push_back(s);
  }
  for (Junction& j : junctions_) {
    std::set<VertexId> verts;
    for (SegmentId s : j.lanes) {
      verts.insert(g.segment(s).from);
      verts.insert(g.segment(s).to);
    }
    for (VertexId v : verts) {
      bool road_in = false, road_out = false;
      for (SegmentId s : g.in_segments(v)) {
        road_in |= g.segment(s).label == SegmentLabel::Road;
      }
      for (SegmentId s : g.out_segments(v)) {
        road_out |= g.segment(s).label == SegmentLabel::Road;
      }
      if (road_in) j.entrances.push_back(v);
      if (road_out) j.exits.push_back(v);
    }
    for (const auto& [en, ex] : entex_pairs_) {
      if (verts.count(en) && verts.count(ex)) j.entex[en] = ex;
    }
  }

  // --- Roads: maximal directed paths of road lanes. ---
  // A vertex continues a chain when it has exactly one incoming and one
  // outgoing road lane.
  std::vector<int> road_in(g.vertex_count(), 0), road_out(g.vertex_count(), 0);
  for (SegmentId s = 0; s < nseg; ++s) {
    if (g.segment(s).label != SegmentLabel::Road) continue;
    road_out[g.segment(s).from]++;
    road_in[g.segment(s).to]++;
  }
  auto interior = [&](VertexId v) {
    return road_in[v] == 1 && road_out[v] == 1;
  };
  std::vector<bool> used(nseg, false);
  auto follow = [&](SegmentId start) {
    Road r;
    SegmentId cur = start;
    while (true) {
      r.lanes.push_back(cur);
      used[cur] = true;
      VertexId v = g.segment(cur).to;
      if (!interior(v)) break;
      SegmentId next = nseg;
      for (SegmentId s : g.out_segments(v)) {
        if (g.segment(s).label == SegmentLabel::Road) next = s;
      }
      if (next == nseg || used[next]) break;
      cur = next;
    }
    roads_.push_back(std::move(r));
  };
  for (SegmentId s = 0; s < nseg; ++s) {
    if (g.segment(s).label == SegmentLabel::Road && !used[s] &&
        !interior(g.segment(s).from)) {
      follow(s);
    }
  }
  // Leftover road lanes belong to pure cycles; start anywhere.
  for (SegmentId s = 0; s < nseg; ++s) {
    if (g.segment(s).label == SegmentLabel::Road && !used[s]) follow(s);
  }
}

void MapModel::validate() const {
  const auto& g = graph_;
  if (!(speed_limit_mps_ > 0.0)) {
    throw MapError("speed_limit_mps must be positive");
  }
  for (const MapObject& obj : objects_) {
    const Segment& lane = g.segment(obj.lane);
    if (obj.offset_m < 0.0 || obj.offset_m > lane.length + kOffsetTolerance) {
      throw MapError("object '" + obj.id + "' sits outside lane '" +
                     lane.name + "'");
    }
    if (lane.label != SegmentLabel::Road) {
      throw MapError("object '" + obj.id + "' must sit on a road lane");
    }
  }
  // entex must pair entrances with exits bijectively inside each junction.
  for (const Junction& j : junctions_) {
    if (j.entex.size() != j.entrances.size()) {
      throw MapError("junction entex pairing must cover every entrance");
    }
    std::set<VertexId> seen_exits;
    for (const auto& [en, ex] : j.entex) {
      if (std::find(j.entrances.begin(), j.entrances.end(), en) ==
          j.entrances.end()) {
        throw MapError("entex pair starts at a non-entrance vertex '" +
                       g.vertex_name(en) + "'");
      }
      if (std::find(j.exits.begin(), j.exits.end(), ex) == j.exits.end()) {
        throw MapError("entex pair ends at a non-exit vertex '" +
                       g.vertex_name(ex) + "'");
      }
      if (!seen_exits.insert(ex).second) {
        throw MapError("entex pairing maps two entrances to exit '" +
                       g.vertex_name(ex) + "'");
      }
    }
  }
  // Global entex references must land inside some junction.
  for (const auto& [en, ex] : entex_pairs_) {
    bool found = false;
    for (const Junction& j : junctions_) {
      auto it = j.entex.find(en);
      if (it != j.entex.end() && it->second == ex) found = true;
    }
    if (!found) {
      throw MapError("entex pair (" + g.vertex_name(en) + ", " +
                     g.vertex_name(ex) + ") does not match any junction");
    }
  }
}

std::string MapModel::to_json() const {
  ordered_json doc;
  doc["speed_limit_mps"] = speed_limit_mps_;
  doc["lanes"] = ordered_json::array();
  for (const Segment& s : graph_.segments()) {
    doc["lanes"].push_back({{"id", s.name},
                            {"from", graph_.vertex_name(s.from)},
                            {"to", graph_.vertex_name(s.to)},
                            {"turn", to_string(s.turn)},
                            {"label", to_string(s.label)},
                            {"length_m", s.length}});
  }
  doc["objects"] = ordered_json::array();
  for (const MapObject& o : objects_) {
    ordered_json obj{{"kind", o.kind == MapObject::Kind::StopSign
                                  ? "stop_sign"
                                  : "traffic_light"},
                     {"id", o.id},
                     {"lane", graph_.segment(o.lane).name},
                     {"offset_m", o.offset_m}};
    if (o.kind == MapObject::Kind::TrafficLight) {
      obj["phases"] = ordered_json::array();
      for (const LightPhase& ph : o.phases) {
        obj["phases"].push_back(
            {{"color", to_string(ph.color)}, {"duration_s", ph.duration_s}});
      }
    }
    doc["objects"].push_back(std::move(obj));
  }
  doc["entex"] = ordered_json::array();
  for (const auto& [en, ex] : entex_pairs_) {
    doc["entex"].push_back({graph_.vertex_name(en), graph_.vertex_name(ex)});
  }
  return doc.dump(2);
}

std::uint64_t MapModel::checksum() const {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::optional<std::size_t> MapModel::junction_of_entrance(VertexId v) const {
  for (std::size_t i = 0; i < junctions_.size(); ++i) {
    const auto& ens = junctions_[i].entrances;
    if (std::find(ens.begin(), ens.end(), v) != ens.end()) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> MapModel::junction_of_segment(SegmentId s) const {
  for (std::size_t i = 0; i < junctions_.size(); ++i) {
    const auto& lanes = junctions_[i].lanes;
    if (std::find(lanes.begin(), lanes.end(), s) != lanes.end()) return i;
  }
  return std::nullopt;
}

bool MapModel::right_of(VertexId a, VertexId b) const {
  if (a == b) return false;
  for (SegmentId sa : graph_.out_segments(a)) {
    const Segment& ea = graph_.segment(sa);
    if (ea.label != SegmentLabel::Junction) continue;
    for (SegmentId sb : graph_.out_segments(b)) {
      const Segment& eb = graph_.segment(sb);
      if (eb.label != SegmentLabel::Junction) continue;
      if (ea.to != eb.to) continue;
      if ((ea.turn == Turn::Right && eb.turn == Turn::Straight) ||
          (ea.turn == Turn::Straight && eb.turn == Turn::Left)) {
        return true;
      }
    }
  }
  return false;
}

bool MapModel::opposite(VertexId a, VertexId b) const {
  if (a == b) return false;
  auto ja = junction_of_entrance(a);
  auto jb = junction_of_entrance(b);
  if (!ja || !jb || *ja != *jb) return false;
  const Junction& j = junctions_[*ja];
  auto ex_a = j.entex.find(a);
  auto ex_b = j.entex.find(b);
  if (ex_a == j.entex.end() || ex_b == j.entex.end()) return false;
  for (SegmentId sa : graph_.out_segments(a)) {
    const Segment& ea = graph_.segment(sa);
    if (ea.label != SegmentLabel::Junction || ea.turn != Turn::Straight) {
      continue;
    }
    for (SegmentId sb : graph_.out_segments(b)) {
      const Segment& eb = graph_.segment(sb);
      if (eb.label != SegmentLabel::Junction || eb.turn != Turn::Straight) {
        continue;
      }
      // a's straight lane ends on b's arm and vice versa.
      if (ea.to == ex_b->second && eb.to == ex_a->second) return true;
    }
  }
  return false;
}

bool MapModel::inside_junction(const Position& p,
                               std::size_t junction_index) const {
  const auto& lanes = junctions_.at(junction_index).lanes;
  return std::find(lanes.begin(), lanes.end(), p.segment) != lanes.end();
}

std::optional<double> MapModel::gap_to_entrance(const Position& p,
                                                VertexId en) const {
  const Segment& seg = graph_.segment(p.segment);
  if (seg.label != SegmentLabel::Road || seg.to != en) return std::nullopt;
  return seg.length - p.offset;
}

std::vector<const MapObject*> MapModel::objects_of(MapObject::Kind kind) const {
  std::vector<const MapObject*> out;
  for (const MapObject& o : objects_) {
    if (o.kind == kind) out.push_back(&o);
  }
  return out;
}

VertexId MapModel::guarded_entrance(const MapObject& obj) const {
  return graph_.segment(obj.lane).to;
}

}  // namespace crossway
