// fixtures.h — canonical junction maps used by tests and the bundled
// campaigns: a four-way junction guarded by stop signs or by traffic lights,
// and a rotationally symmetric three-way (Y) junction for enumeration checks.
//
// The four-way layout numbers its arms 0..3 counterclockwise. Arm i consists
// of an approach lane road_in_i (src_i -> en_i), an exit lane road_out_i
// (ex_i -> snk_i) and three junction lanes out of en_i: j_i_R to ex_{i+1}
// (right), j_i_S to ex_{i+2} (straight), j_i_L to ex_{i+3} (left). The entex
// pairing is (en_i, ex_i): entrance and exit of the same arm.
#pragma once

#include "crossway/map_model.h"

namespace crossway {

/// Tunable dimensions of the four-way fixture.
struct FourWayGeometry {
  double approach_m = 50.0;   // src_i -> en_i
  double exit_m = 50.0;       // ex_i -> snk_i
  double right_m = 12.0;      // en_i -> ex_{i+1}
  double straight_m = 18.0;   // en_i -> ex_{i+2}
  double left_m = 19.0;       // en_i -> ex_{i+3}
  double speed_limit_mps = 11.176;
};

/// Four-way junction with a stop sign at the end of every approach lane.
MapModel four_way_stop_map(const FourWayGeometry& geo = {});

/// Four-way junction with a traffic light at the end of every approach lane.
/// All lights cycle green 20 s, yellow 3 s, red 23 s (46 s period); the two
/// arms of `green_pair` (0 -> arms {0,2}, 1 -> arms {1,3}) start their cycle
/// on green, the other two on red.
MapModel four_way_lights_map(int green_pair, const FourWayGeometry& geo = {});

/// Rotationally symmetric three-way (Y) junction with stop signs. From arm i
/// the lane j_i_R turns right to ex_{i+1} and j_i_L turns left to ex_{i+2}.
MapModel three_way_stop_map();

}  // namespace crossway
