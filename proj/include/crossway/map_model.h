// map_model.h — loads lane-level map documents (JSON) into a metric graph,
// decomposes it into roads and junctions, pairs junction entrances with their
// same-arm exits, and derives the static layout predicates (right-of,
// opposite, containment) that the property layer builds on.
#pragma once

#include "crossway/metric_graph.h"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace crossway {

/// Raised for malformed or inconsistent map documents.
class MapError : public std::runtime_error {
 public:
  explicit MapError(const std::string& what) : std::runtime_error(what) {}
};

/// Colors a traffic light cycles through.
enum class LightColor { Red, Yellow, Green };

const char* to_string(LightColor c);
std::optional<LightColor> light_color_from_string(const std::string& s);

/// One phase of a traffic-light program.
struct LightPhase {
  LightColor color = LightColor::Red;
  double duration_s = 0.0;
};

/// Static roadside object anchored to a lane position.
struct MapObject {
  enum class Kind { StopSign, TrafficLight };
  Kind kind = Kind::StopSign;
  std::string id;
  SegmentId lane = 0;
  double offset_m = 0.0;
  std::vector<LightPhase> phases;  // traffic lights only, cycled forever
};

/// Maximal directed path of road segments (interior vertices have exactly
/// one incoming and one outgoing road segment).
struct Road {
  std::vector<SegmentId> lanes;  // in travel order
};

/// Weakly-connected component of junction segments, with its entrances
/// (vertices fed by a road) and exits (vertices draining into a road), and
/// the entrance->exit pairing declared by the map (same arm).
struct Junction {
  std::vector<SegmentId> lanes;
  std::vector<VertexId> entrances;  // sorted by vertex id
  std::vector<VertexId> exits;      // sorted by vertex id
  std::map<VertexId, VertexId> entex;  // entrance vertex -> same-arm exit
};

/// A parsed and validated map: metric graph plus derived structure.
class MapModel {
 public:
  /// Parses the JSON text of a map document; throws MapError on any
  /// structural problem (unknown vertices, non-positive lengths, entex not a
  /// bijection, objects off their lane, ...).
  static MapModel from_json(const std::string& json_text);

  /// Serializes back to a canonical JSON document (stable field order).
  std::string to_json() const;

  const MetricGraph& graph() const { return graph_; }
  double speed_limit_mps() const { return speed_limit_mps_; }
  const std::vector<MapObject>& objects() const { return objects_; }
  const std::vector<Road>& roads() const { return roads_; }
  const std::vector<Junction>& junctions() const { return junctions_; }

  /// FNV-1a checksum over the canonical serialization; used by traces to
  /// guard against replaying against the wrong map.
  std::uint64_t checksum() const;

  /// Index of the junction owning `v` as an entrance, if any.
  std::optional<std::size_t> junction_of_entrance(VertexId v) const;
  /// Index of the junction owning segment `s`, if it is a junction lane.
  std::optional<std::size_t> junction_of_segment(SegmentId s) const;

  /// right_of(a, b): some junction lane leaves `a` turning right and some
  /// lane leaves `b` going straight into the same vertex, or `a` goes
  /// straight where `b` turns left into the same vertex. Captures "a is the
  /// right-hand neighbour arm of b" on standard right-hand-traffic layouts.
  bool right_of(VertexId a, VertexId b) const;

  /// opposite(a, b): the straight lanes out of `a` and `b` each end on the
  /// arm the other one entered from (via the entex pairing).
  bool opposite(VertexId a, VertexId b) const;

  /// True when `p` lies on one of the junction's lanes.
  bool inside_junction(const Position& p, std::size_t junction_index) const;

  /// Remaining metres from `p` (on a road lane) to the entrance vertex `en`,
  /// when p's lane ends at `en`; unreachable otherwise. Used for the
  /// at-entrance window.
  std::optional<double> gap_to_entrance(const Position& p, VertexId en) const;

  /// Objects of a kind, in document order.
  std::vector<const MapObject*> objects_of(MapObject::Kind kind) const;

  /// The entrance vertex an object guards: the end vertex of its lane.
  VertexId guarded_entrance(const MapObject& obj) const;

  /// Construction from parts (used by fixtures); runs the same validation
  /// and decomposition as from_json.
  static MapModel assemble(MetricGraph graph, double speed_limit_mps,
                           std::vector<MapObject> objects,
                           std::vector<std::pair<VertexId, VertexId>> entex);

 private:
  MapModel() = default;
  void decompose();   // roads + junctions
  void validate() const;

  MetricGraph graph_;
  double speed_limit_mps_ = 0.0;
  std::vector<MapObject> objects_;
  std::vector<std::pair<VertexId, VertexId>> entex_pairs_;
  std::vector<Road> roads_;
  std::vector<Junction> junctions_;
};

}  // namespace crossway
