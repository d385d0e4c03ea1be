// scenario_gen.h — symbolic junction scenarios and their concretization.
// A symbolic scenario assigns one outgoing turn to every junction arm (one
// vehicle per arm); the space of all assignments factors into rotation
// classes on rotationally symmetric junctions. Concretization turns a
// scenario plus per-arm numeric context (gap to the stop line, initial
// speed) into simulator vehicle specs, validating every requested speed
// against the safe-speed estimator.
#pragma once

#include "crossway/simulator.h"

#include <cstdint>
#include <string>
#include <vector>

namespace crossway {

/// Raised for invalid scenarios, contexts or junction references.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Turn choice per arm. Arms are the junction's entrances in their sorted
/// order; turns[i] picks the junction lane leaving entrance i.
struct SymbolicScenario {
  std::vector<Turn> turns;
  friend bool operator==(const SymbolicScenario&,
                         const SymbolicScenario&) = default;
};

/// One rotation class: the lexicographically minimal member plus every
/// distinct rotation of it, ordered by rotation amount.
struct RotationClass {
  SymbolicScenario base;
  std::vector<SymbolicScenario> members;  // members[i] = rotate(base, r_i)
  std::vector<std::size_t> rotations;     // r_i for each member, ascending
};

/// Per-arm numeric context of a concrete scenario.
struct ArmContext {
  double gap_m = 20.0;       // metres between spawn point and the stop line
  double speed_mps = 0.0;    // initial speed
};

/// A concretized scenario, ready to hand to the simulator.
struct ConcreteScenario {
  std::vector<VehicleSpec> vehicles;     // arm-indexed
  std::vector<std::size_t> init_order;   // controller bring-up permutation
};

/// The scenario space of one junction.
class ScenarioSpace {
 public:
  /// Collects the arms and their available turns; throws ScenarioError when
  /// the junction index is out of range.
  ScenarioSpace(const MapModel& map, std::size_t junction);

  std::size_t arm_count() const { return options_.size(); }
  std::size_t junction_index() const { return junction_; }
  const MapModel& map() const { return *map_; }

  /// Available turns per arm, in right-before-straight-before-left order.
  const std::vector<std::vector<Turn>>& options() const { return options_; }

  /// True when every arm offers the same turn set, so rotating a scenario
  /// yields another valid scenario.
  bool rotation_symmetric() const;

  /// All assignments, in lexicographic order of the per-arm choices.
  std::vector<SymbolicScenario> enumerate() const;

  /// The scenario shifted forward by `r` arms: the vehicle that drove from
  /// arm 0 now drives from arm r. Requires rotational symmetry.
  SymbolicScenario rotate(const SymbolicScenario& s, std::size_t r) const;

  /// Lexicographically minimal rotation of `s` (the class representative).
  SymbolicScenario canonical(const SymbolicScenario& s) const;

  /// Smallest r with s == rotate(canonical(s), r). Arm a of `s` plays the
  /// canonical role (a - r) mod arm_count; seeded per-role draws key on
  /// that, which makes them rotation-invariant.
  std::size_t canonical_rotation(const SymbolicScenario& s) const;

  /// Groups the full enumeration into rotation classes, ordered by base.
  std::vector<RotationClass> rotation_classes() const;

  /// Compact member name: one letter per arm ("RSLR").
  std::string key(const SymbolicScenario& s) const;

  /// Independent counting oracle: the number of rotation classes by
  /// Burnside's lemma, (1/n) * sum_r k^gcd(n, r), for uniform option count
  /// k. Requires rotational symmetry.
  std::size_t class_count_by_counting() const;

  /// Vehicle specs + bring-up order for member rotate(base, r) of a class.
  /// The bring-up order starts at arm r (the image of canonical arm 0);
  /// right-on-red waits are drawn from substreams keyed by canonical role,
  /// so every member of a class receives the same multiset of draws.
  /// Speeds are validated against estimate_safe_speed with all faults off;
  /// violations throw ScenarioError.
  ConcreteScenario concretize(const SymbolicScenario& s,
                              const std::vector<ArmContext>& contexts,
                              std::size_t rotation, const SimConfig& config,
                              int aggression = 2) const;

  /// The full ride for one arm: approach roads covering `gap_m`, the
  /// junction lane for `turn`, and the exit roads to their end.
  Itinerary route(std::size_t arm, Turn turn, double gap_m) const;

 private:
  std::size_t turn_rank(Turn t) const;  // Right < Straight < Left

  const MapModel* map_;
  std::size_t junction_;
  std::vector<std::vector<Turn>> options_;  // per arm
};

}  // namespace crossway
