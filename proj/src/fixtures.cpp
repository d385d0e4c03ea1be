#include "crossway/fixtures.h"

namespace crossway {

namespace {

constexpr double kGreenS = 20.0;
constexpr double kYellowS = 3.0;
constexpr double kRedS = 23.0;

struct FourWayParts {
  MetricGraph graph;
  std::vector<SegmentId> road_in;
  std::vector<VertexId> en;
  std::vector<std::pair<VertexId, VertexId>> entex;
};

FourWayParts four_way_graph(const FourWayGeometry& geo) {
  FourWayParts p;
  std::vector<VertexId> src(4), ex(4), snk(4);
  p.en.resize(4);
  for (int i = 0; i < 4; ++i) {
    const std::string n = std::to_string(i);
    src[i] = p.graph.add_vertex("src_" + n);
    p.en[i] = p.graph.add_vertex("en_" + n);
    ex[i] = p.graph.add_vertex("ex_" + n);
    snk[i] = p.graph.add_vertex("snk_" + n);
  }
  p.road_in.resize(4);
  for (int i = 0; i < 4; ++i) {
    const std::string n = std::to_string(i);
    p.road_in[i] =
        p.graph.add_segment("road_in_" + n, src[i], p.en[i], Turn::Straight,
                            SegmentLabel::Road, geo.approach_m);
    p.graph.add_segment("road_out_" + n, ex[i], snk[i], Turn::Straight,
                        SegmentLabel::Road, geo.exit_m);
  }
  for (int i = 0; i < 4; ++i) {
    const std::string n = std::to_string(i);
    p.graph.add_segment("j_" + n + "_R", p.en[i], ex[(i + 1) % 4],
                        Turn::Right, SegmentLabel::Junction, geo.right_m);
    p.graph.add_segment("j_" + n + "_S", p.en[i], ex[(i + 2) % 4],
                        Turn::Straight, SegmentLabel::Junction,
                        geo.straight_m);
    p.graph.add_segment("j_" + n + "_L", p.en[i], ex[(i + 3) % 4],
                        Turn::Left, SegmentLabel::Junction, geo.left_m);
  }
  for (int i = 0; i < 4; ++i) p.entex.emplace_back(p.en[i], ex[i]);
  return p;
}

}  // namespace

MapModel four_way_stop_map(const FourWayGeometry& geo) {
  FourWayParts p = four_way_graph(geo);
  std::vector<MapObject> objects;
  for (int i = 0; i < 4; ++i) {
    MapObject o;
    o.kind = MapObject::Kind::StopSign;
    o.id = "stop_" + std::to_string(i);
    o.lane = p.road_in[i];
    o.offset_m = geo.approach_m;
    objects.push_back(std::move(o));
  }
  return MapModel::assemble(std::move(p.graph), geo.speed_limit_mps,
                            std::move(objects), std::move(p.entex));
}

MapModel four_way_lights_map(int green_pair, const FourWayGeometry& geo) {
  if (green_pair != 0 && green_pair != 1) {
    throw MapError("green_pair must be 0 (arms {0,2}) or 1 (arms {1,3})");
  }
  FourWayParts p = four_way_graph(geo);
  std::vector<MapObject> objects;
  for (int i = 0; i < 4; ++i) {
    MapObject o;
    o.kind = MapObject::Kind::TrafficLight;
    o.id = "light_" + std::to_string(i);
    o.lane = p.road_in[i];
    o.offset_m = geo.approach_m;
    if (i % 2 == green_pair) {
      o.phases = {{LightColor::Green, kGreenS},
                  {LightColor::Yellow, kYellowS},
                  {LightColor::Red, kRedS}};
    } else {
      o.phases = {{LightColor::Red, kRedS},
                  {LightColor::Green, kGreenS},
                  {LightColor::Yellow, kYellowS}};
    }
    objects.push_back(std::move(o));
  }
  return MapModel::assemble(std::move(p.graph), geo.speed_limit_mps,
                            std::move(objects), std::move(p.entex));
}

MapModel three_way_stop_map() {
  const double approach = 40.0, exit = 40.0, right = 9.0, left = 13.0;
  MetricGraph g;
  std::vector<VertexId> src(3), en(3), ex(3), snk(3);
  for (int i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    src[i] = g.add_vertex("src_" + n);
    en[i] = g.add_vertex("en_" + n);
    ex[i] = g.add_vertex("ex_" + n);
    snk[i] = g.add_vertex("snk_" + n);
  }
  std::vector<SegmentId> road_in(3);
  for (int i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    road_in[i] = g.add_segment("road_in_" + n, src[i], en[i], Turn::Straight,
                               SegmentLabel::Road, approach);
    g.add_segment("road_out_" + n, ex[i], snk[i], Turn::Straight,
                  SegmentLabel::Road, exit);
  }
  for (int i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    g.add_segment("j_" + n + "_R", en[i], ex[(i + 1) % 3], Turn::Right,
                  SegmentLabel::Junction, right);
    g.add_segment("j_" + n + "_L", en[i], ex[(i + 2) % 3], Turn::Left,
                  SegmentLabel::Junction, left);
  }
  std::vector<MapObject> objects;
  for (int i = 0; i < 3; ++i) {
    MapObject o;
    o.kind = MapObject::Kind::StopSign;
    o.id = "stop_" + std::to_string(i);
    o.lane = road_in[i];
    o.offset_m = approach;
    objects.push_back(std::move(o));
  }
  std::vector<std::pair<VertexId, VertexId>> entex;
  for (int i = 0; i < 3; ++i) entex.emplace_back(en[i], ex[i]);
  return MapModel::assemble(std::move(g), 11.176, std::move(objects),
                            std::move(entex));
}

}  // namespace crossway
