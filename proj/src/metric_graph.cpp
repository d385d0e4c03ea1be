#include "crossway/metric_graph.h"

#include <algorithm>
#include <cmath>
#include <queue>

namespace crossway {

const char* to_string(Turn t) {
  switch (t) {
    case Turn::Left: return "left";
    case Turn::Right: return "right";
    case Turn::Straight: return "straight";
  }
  return "?";
}

const char* to_string(SegmentLabel l) {
  return l == SegmentLabel::Road ? "road" : "junction";
}

std::optional<Turn> turn_from_string(const std::string& s) {
  if (s == "left") return Turn::Left;
  if (s == "right") return Turn::Right;
  if (s == "straight") return Turn::Straight;
  return std::nullopt;
}

std::optional<SegmentLabel> label_from_string(const std::string& s) {
  if (s == "road") return SegmentLabel::Road;
  if (s == "junction") return SegmentLabel::Junction;
  return std::nullopt;
}

VertexId MetricGraph::add_vertex(std::string name) {
  if (find_vertex(name)) {
    throw GraphError("duplicate vertex name: " + name);
  }
  vertex_names_.push_back(std::move(name));
  out_.emplace_back();
  in_.emplace_back();
  return static_cast<VertexId>(vertex_names_.size() - 1);
}

SegmentId MetricGraph::add_segment(std::string name, VertexId from,
                                   VertexId to, Turn turn, SegmentLabel label,
                                   double length) {
  if (from >= vertex_count() || to >= vertex_count()) {
    throw GraphError("segment '" + name + "' references unknown vertex");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw GraphError("segment '" + name + "' must have positive length");
  }
  if (find_segment(name)) {
    throw GraphError("duplicate segment name: " + name);
  }
  SegmentId id = static_cast<SegmentId>(segments_.size());
  segments_.push_back(Segment{std::move(name), from, to, turn, label, length});
  out_[from].push_back(id);
  in_[to].push_back(id);
  return id;
}

const std::string& MetricGraph::vertex_name(VertexId v) const {
  if (v >= vertex_count()) throw GraphError("vertex id out of range");
  return vertex_names_[v];
}

const Segment& MetricGraph::segment(SegmentId s) const {
  if (s >= segments_.size()) throw GraphError("segment id out of range");
  return segments_[s];
}

std::optional<VertexId> MetricGraph::find_vertex(const std::string& name) const {
  for (std::size_t i = 0; i < vertex_names_.size(); ++i) {
    if (vertex_names_[i] == name) return static_cast<VertexId>(i);
  }
  return std::nullopt;
}

std::optional<SegmentId> MetricGraph::find_segment(const std::string& name) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].name == name) return static_cast<SegmentId>(i);
  }
  return std::nullopt;
}

const std::vector<SegmentId>& MetricGraph::out_segments(VertexId v) const {
  if (v >= vertex_count()) throw GraphError("vertex id out of range");
  return out_[v];
}

const std::vector<SegmentId>& MetricGraph::in_segments(VertexId v) const {
  if (v >= vertex_count()) throw GraphError("vertex id out of range");
  return in_[v];
}

bool MetricGraph::valid_position(const Position& p) const {
  if (p.segment >= segments_.size()) return false;
  const double len = segments_[p.segment].length;
  return p.offset >= -kOffsetTolerance && p.offset <= len + kOffsetTolerance;
}

void MetricGraph::validate_itinerary(const Itinerary& it) const {
  if (it.empty()) throw GraphError("itinerary is empty");
  for (std::size_t i = 0; i < it.size(); ++i) {
    const SubSegment& part = it[i];
    if (part.segment >= segments_.size()) {
      throw GraphError("itinerary references unknown segment");
    }
    const Segment& seg = segments_[part.segment];
    if (part.from < -kOffsetTolerance ||
        part.to > seg.length + kOffsetTolerance ||
        part.to - part.from < -kOffsetTolerance) {
      throw GraphError("itinerary element exceeds segment '" + seg.name + "'");
    }
    const bool first = i == 0;
    const bool last = i + 1 == it.size();
    if (!first && std::abs(part.from) > kOffsetTolerance) {
      throw GraphError("interior itinerary element must start segment '" +
                       seg.name + "' at its beginning");
    }
    if (!last && std::abs(part.to - seg.length) > kOffsetTolerance) {
      throw GraphError("interior itinerary element must cover segment '" +
                       seg.name + "' to its end");
    }
    if (!last) {
      const Segment& next = segments_[it[i + 1].segment];
      if (seg.to != next.from) {
        throw GraphError("itinerary breaks between segments '" + seg.name +
                         "' and '" + next.name + "'");
      }
    }
  }
}

double MetricGraph::itinerary_length(const Itinerary& it) const {
  double total = 0.0;
  for (const SubSegment& part : it) total += part.length();
  return total;
}

Distance MetricGraph::vertex_distance(VertexId from, VertexId to) const {
  if (from >= vertex_count() || to >= vertex_count()) {
    throw GraphError("vertex id out of range");
  }
  // Dijkstra over segment lengths.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(vertex_count(), inf);
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  dist[from] = 0.0;
  open.push({0.0, from});
  while (!open.empty()) {
    auto [d, v] = open.top();
    open.pop();
    if (d > dist[v]) continue;
    if (v == to) break;
    for (SegmentId s : out_[v]) {
      const double nd = d + segments_[s].length;
      if (nd < dist[segments_[s].to]) {
        dist[segments_[s].to] = nd;
        open.push({nd, segments_[s].to});
      }
    }
  }
  if (dist[to] == inf) return Distance::unreachable();
  return Distance::finite(dist[to]);
}

Distance MetricGraph::distance(const Position& a, const Position& b) const {
  if (!valid_position(a) || !valid_position(b)) {
    throw GraphError("distance requires valid positions");
  }
  if (a == b) return Distance::finite(0.0);

  double best = std::numeric_limits<double>::infinity();
  // Ride staying on one segment, moving forward.
  if (a.segment == b.segment && b.offset >= a.offset) {
    best = b.offset - a.offset;
  }
  // Ride leaving segment a, traversing whole segments, entering segment b.
  const double head = segments_[a.segment].length - a.offset;
  Distance mid = vertex_distance(segments_[a.segment].to,
                                 segments_[b.segment].from);
  if (mid.reachable()) {
    best = std::min(best, head + mid.metres() + b.offset);
  }
  if (best == std::numeric_limits<double>::infinity()) {
    return Distance::unreachable();
  }
  return Distance::finite(best);
}

double advance(const Itinerary& it, ItineraryCursor& cur, double metres) {
  if (cur.index >= it.size()) return 0.0;
  double moved = 0.0;
  while (metres > 0.0) {
    const SubSegment& part = it[cur.index];
    const double room = part.to - cur.offset;
    if (metres < room) {
      cur.offset += metres;
      moved += metres;
      return moved;
    }
    moved += room;
    metres -= room;
    if (cur.index + 1 == it.size()) {
      cur.offset = part.to;  // clamp at the itinerary end
      return moved;
    }
    ++cur.index;
    cur.offset = it[cur.index].from;
  }
  return moved;
}

double remaining(const Itinerary& it, const ItineraryCursor& cur) {
  if (cur.index >= it.size()) return 0.0;
  double total = it[cur.index].to - cur.offset;
  for (std::size_t i = cur.index + 1; i < it.size(); ++i) {
    total += it[i].length();
  }
  return total;
}

}  // namespace crossway
