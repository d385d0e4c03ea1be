// metric_graph.h — directed metric graphs: vertices joined by segments that
// carry a positive length, a turn kind and a road/junction label. Positions
// live on segments, itineraries are chains of sub-segments, and distance is
// the length of a shortest ride (consecutive segment traversal).
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crossway {

/// Turn kind attached to every segment.
enum class Turn { Left, Right, Straight };

/// A segment either belongs to a road or to a junction.
enum class SegmentLabel { Road, Junction };

using VertexId = std::uint32_t;
using SegmentId = std::uint32_t;

/// Offsets within this tolerance (metres) refer to the same point.
inline constexpr double kOffsetTolerance = 1e-9;

const char* to_string(Turn t);
const char* to_string(SegmentLabel l);
std::optional<Turn> turn_from_string(const std::string& s);
std::optional<SegmentLabel> label_from_string(const std::string& s);

/// Directed edge of the metric graph. `length` is strictly positive.
struct Segment {
  std::string name;  // external identifier (lane id in map files)
  VertexId from = 0;
  VertexId to = 0;
  Turn turn = Turn::Straight;
  SegmentLabel label = SegmentLabel::Road;
  double length = 0.0;
};

/// Raised when a graph, position or itinerary would be malformed.
class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

/// A point on a segment, `offset` metres from its start vertex.
/// Valid range is [0, length(segment)] inclusive: offset 0 sits on the start
/// vertex, offset length(segment) on the end vertex.
struct Position {
  SegmentId segment = 0;
  double offset = 0.0;

  friend bool operator==(const Position& a, const Position& b) {
    return a.segment == b.segment &&
           a.offset - b.offset <= kOffsetTolerance &&
           b.offset - a.offset <= kOffsetTolerance;
  }
};

/// Contiguous part [from, to] of one segment (plain offsets from its start).
struct SubSegment {
  SegmentId segment = 0;
  double from = 0.0;
  double to = 0.0;

  double length() const { return to - from; }
  friend bool operator==(const SubSegment&, const SubSegment&) = default;
};

/// An itinerary is a chain of sub-segments: consecutive elements share a
/// vertex, interior elements span their whole segment; only the first may
/// start mid-segment and only the last may end mid-segment.
using Itinerary = std::vector<SubSegment>;

/// Length of a shortest ride, or unreachable. A dedicated flag is used
/// instead of a floating-point infinity so "no ride" survives serialization
/// and comparisons without sentinel tricks.
class Distance {
 public:
  static Distance finite(double metres) { return Distance(true, metres); }
  static Distance unreachable() { return Distance(false, 0.0); }

  bool reachable() const { return reachable_; }
  /// Metres of the shortest ride; throws if unreachable.
  double metres() const {
    if (!reachable_) throw GraphError("distance is unreachable");
    return metres_;
  }

  friend bool operator==(const Distance& a, const Distance& b) {
    if (a.reachable_ != b.reachable_) return false;
    if (!a.reachable_) return true;
    return a.metres_ == b.metres_;
  }
  /// Unreachable compares greater than every finite distance.
  friend bool operator<(const Distance& a, const Distance& b) {
    if (a.reachable_ && b.reachable_) return a.metres_ < b.metres_;
    return a.reachable_ && !b.reachable_;
  }

 private:
  Distance(bool reachable, double metres)
      : reachable_(reachable), metres_(metres) {}
  bool reachable_;
  double metres_;
};

/// Directed metric graph. Vertices and segments are created once and then
/// immutable; ids are dense indices in creation order.
class MetricGraph {
 public:
  VertexId add_vertex(std::string name);

  /// Adds a segment; validates vertex ids, positive length and unique name.
  SegmentId add_segment(std::string name, VertexId from, VertexId to,
                        Turn turn, SegmentLabel label, double length);

  std::size_t vertex_count() const { return vertex_names_.size(); }
  std::size_t segment_count() const { return segments_.size(); }
  const std::string& vertex_name(VertexId v) const;
  const Segment& segment(SegmentId s) const;
  const std::vector<Segment>& segments() const { return segments_; }

  std::optional<VertexId> find_vertex(const std::string& name) const;
  std::optional<SegmentId> find_segment(const std::string& name) const;

  /// Segments leaving / entering a vertex.
  const std::vector<SegmentId>& out_segments(VertexId v) const;
  const std::vector<SegmentId>& in_segments(VertexId v) const;

  /// True when `p` lies on a segment of this graph within its offset range.
  bool valid_position(const Position& p) const;

  /// Validates chaining and coverage rules of an itinerary; throws
  /// GraphError with a description of the first violation.
  void validate_itinerary(const Itinerary& it) const;

  double itinerary_length(const Itinerary& it) const;

  /// Length of a shortest ride from `a` to `b` (0 when a == b).
  Distance distance(const Position& a, const Position& b) const;

  /// Shortest vertex-to-vertex ride length over whole segments.
  Distance vertex_distance(VertexId from, VertexId to) const;

 private:
  std::vector<std::string> vertex_names_;
  std::vector<Segment> segments_;
  std::vector<std::vector<SegmentId>> out_;
  std::vector<std::vector<SegmentId>> in_;
};

/// Cursor into an itinerary: element index plus an absolute offset on that
/// element's segment. Advancing moves along the chain and clamps at the end.
struct ItineraryCursor {
  std::size_t index = 0;
  double offset = 0.0;  // absolute offset on the element's segment

  Position position(const Itinerary& it) const {
    return Position{it[index].segment, offset};
  }
};

/// Advances `cur` by `metres` along `it`. When the end of an element is
/// reached the cursor normalizes onto the next element's start, so a cursor
/// never rests exactly on a consumed boundary. Returns the distance actually
/// travelled (less than `metres` only when the itinerary ends).
double advance(const Itinerary& it, ItineraryCursor& cur, double metres);

/// Remaining metres from the cursor to the itinerary end.
double remaining(const Itinerary& it, const ItineraryCursor& cur);

}  // namespace crossway
