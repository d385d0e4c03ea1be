// campaign.h — bundled junction-rule validation campaigns. A campaign pins
// one junction style (all-way stop or traffic lights), a set of injected
// controller deficiencies, the monitored junction rules, and a grid of
// scenario rows x approach-context columns. Each grid cell is one
// deterministic simulation run followed by one monitor verdict per rule.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossway/monitor.h"
#include "crossway/scenario_gen.h"

namespace crossway {

/// Raised for malformed campaign definitions.
class CampaignError : public std::runtime_error {
 public:
  explicit CampaignError(const std::string& what) : std::runtime_error(what) {}
};

/// One approach-context column of a campaign grid. Gaps and speeds are given
/// per arm for the rotation-0 row; with `rotate_with_row` the vectors rotate
/// along with the scenario, so the context follows the scenario roles rather
/// than the fixed arms.
struct CampaignColumn {
  std::string name;
  std::vector<double> gaps_m;
  std::vector<double> speeds_mps;
  bool rotate_with_row = false;
};

/// One rotation class exercised by a campaign: row r of the grid runs
/// rotate(base, r). For traffic-light campaigns `base_green_parity` names the
/// entrance pair (0 -> arms {0,2}, 1 -> arms {1,3}) that starts green in the
/// base row; the pair rotates with the row.
struct CampaignClassDef {
  std::string name;
  SymbolicScenario base;
  std::size_t rows = 4;
  int base_green_parity = 0;
};

/// A full campaign: map style, monitored rules, shared run configuration
/// (tick length, junction speeds, fault switches) and the grid.
struct CampaignDef {
  std::string name;
  bool lights = false;
  /// Built-in rule names, or property texts in the surface syntax.
  std::vector<std::string> properties;
  /// Optional report labels parallel to `properties` (each defaults to the
  /// property string itself); keeps formula texts out of CSV cells.
  std::vector<std::string> property_labels;
  SimConfig config;
  /// Driver aggression used when concretizing scenarios (1..3).
  int aggression = 2;
  std::vector<CampaignClassDef> classes;
  std::vector<CampaignColumn> columns;
  /// Optional custom arena: a serialized map document plus the junction to
  /// watch, replacing the bundled four-way fixtures. Rows still rotate the
  /// scenario, but the map — including any light phases — stays fixed.
  std::string map_json;
  std::size_t junction = 0;
  /// When non-empty, every run's trace is written into this directory as
  /// <campaign>_<class>_<row>_<column>.jsonl.
  std::string trace_dir;
};

/// State of one agent in a witness dump.
struct AgentDump {
  std::string name;
  bool active = false;
  std::string segment;  // lane the agent occupies; empty when inactive
  double offset_m = 0.0;
  double speed_mps = 0.0;
  double waiting_s = 0.0;
};

/// One recorded world state of a witness dump.
struct StateDump {
  std::size_t tick = 0;
  double time_s = 0.0;
  std::vector<AgentDump> agents;
  std::vector<std::pair<std::string, std::string>> lights;  // id -> color
};

/// Fail-cell diagnostics: the violated quantifier instantiation and the
/// world around the witness — the tick before the violation and the
/// violating tick itself.
struct WitnessReport {
  std::size_t tick = 0;
  std::vector<std::pair<std::string, std::string>> binding;
  StateDump before;  // tick-1 (same tick when the violation is at tick 0)
  StateDump after;   // the witness tick
};

/// Verdict of one (class, row, column, rule) grid cell. Cells whose scenario
/// cannot be realized (a requested approach speed above the safe-speed bound
/// for its gap) are recorded as infeasible instead of being run.
struct CampaignCell {
  std::string campaign;
  std::string class_name;
  std::size_t row = 0;       // 1-based
  std::string scenario_key;  // e.g. "SRRR"
  std::string column;
  std::string property;
  Verdict verdict;
  bool infeasible = false;
  std::optional<WitnessReport> witness;  // filled for Fail cells
};

/// Diagnostics of one (class, row, column) simulation run.
struct CampaignRunRecord {
  std::string campaign;
  std::string class_name;
  std::size_t row = 0;
  std::string scenario_key;
  std::string column;
  std::size_t ticks = 0;
  Diagnostics diag;
  double elapsed_ms = 0.0;
  bool infeasible = false;
  std::string infeasible_reason;
};

struct CampaignResult {
  std::string campaign;
  std::vector<CampaignCell> cells;
  std::vector<CampaignRunRecord> runs;
};

/// All-way-stop campaign: rules p1..p3 against the spawn-burst,
/// early-release and bring-up-order deficiencies over two scenario classes
/// (one straight / one left among rights) and five approach contexts.
CampaignDef stop_sign_campaign();

/// Traffic-light campaign: rules p4..p6 against the spawn-burst,
/// right-on-red-timer and left-yield-off deficiencies over two scenario
/// classes and five approach contexts.
CampaignDef traffic_light_campaign();

std::vector<CampaignDef> bundled_campaigns();

/// The per-lane metre offsets the bundled stop campaign injects for the
/// early-release deficiency (lane name -> metres before the lane end).
const std::map<std::string, double>& bundled_release_offsets();

/// Everything needed to replay one grid cell by hand: the (row-specific)
/// map, the run configuration with the bring-up order filled in, and the
/// concrete vehicles. Throws CampaignError for unknown class/row/column.
struct CellSetup {
  MapModel map;
  SimConfig config;
  std::vector<VehicleSpec> vehicles;
  std::string scenario_key;
};

CellSetup cell_setup(const CampaignDef& def, const std::string& class_name,
                     std::size_t row, const std::string& column);

/// Runs every cell of a campaign. `threads` 0 picks the hardware count.
CampaignResult run_campaign(const CampaignDef& def, unsigned threads = 0);

/// Cell verdicts as a byte-stable CSV document.
std::string campaign_csv(const CampaignResult& result);

/// Run diagnostics as a JSON document. Timing is off by default so the
/// output stays byte-stable across runs.
std::string campaign_json(const CampaignResult& result,
                          bool include_timing = false);

/// Status token used in CSV and the reference grid: "Pass", "Fail" or "NA".
std::string status_token(const Verdict& v);

/// Cell-level token: as above, or "Infeasible" for unrealizable cells.
std::string status_token(const CampaignCell& cell);

/// How a junction is controlled: every entrance behind a stop sign, at
/// least one entrance behind a traffic light, or neither.
enum class JunctionStyle { AllWayStop, TrafficLight, Other };

JunctionStyle junction_style(const MapModel& map, std::size_t junction);

const char* to_string(JunctionStyle s);

/// Resolves a junction selector against a map. The selector is a junction
/// index ("0", "1", ...), a style name ("all_way_stop" / "traffic_light"),
/// or the name of one of the junction's entrance vertices. Style and vertex
/// selectors raise CampaignError when no junction matches or when several
/// do; an index selector disambiguates.
std::size_t find_junction(const MapModel& map, const std::string& selector);

/// Reference verdict grid shipped with a bundled campaign, keyed
/// "class/row/column/property".
std::map<std::string, std::string> reference_grid(
    const std::string& campaign_name);

/// Cells of `result` that disagree with the bundled reference grid, as
/// human-readable "key: got X, want Y" lines. Empty means full agreement.
std::vector<std::string> reference_mismatches(const CampaignResult& result);

}  // namespace crossway
