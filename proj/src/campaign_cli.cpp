// campaign_cli.cpp — the `crossway` command line tool: campaign grid
// validation over a junction map, scenario-space enumeration, safe-speed
// curves, single-trace replay, bundled fixture export and the bundled
// reference tables.
//
// Exit codes: 0 when no monitored property failed, 1 when at least one cell
// failed, 2 for configuration or infrastructure errors.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crossway/campaign.h"
#include "crossway/fixtures.h"

namespace crossway {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, ',')) parts.push_back(part);
  return parts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CampaignError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Map selection shared by the subcommands: an explicit document, or one of
/// the bundled fixtures when only a junction type is named.
MapModel resolve_map(const std::string& map_path,
                     const std::string& junction_type) {
  if (!map_path.empty()) return MapModel::from_json(read_file(map_path));
  if (junction_type == "traffic_light") return four_way_lights_map(0);
  return four_way_stop_map();
}

/// Junction selection: --junction wins, then --junction-type, then index 0.
std::size_t resolve_junction(const MapModel& map, const std::string& junction,
                             const std::string& junction_type) {
  if (!junction.empty()) return find_junction(map, junction);
  if (!junction_type.empty()) return find_junction(map, junction_type);
  return find_junction(map, "0");
}

FaultSet parse_faults(const std::vector<std::string>& raw) {
  FaultSet faults;
  for (const std::string& item : raw) {
    for (const std::string& token : split_csv(item)) {
      if (token == "i1" || token == "spawn_burst") {
        faults.spawn_burst = true;
      } else if (token == "i2" || token == "early_release") {
        faults.early_release = true;
      } else if (token == "i3" || token == "init_order_priority") {
        faults.init_order_priority = true;
      } else if (token == "i4" || token == "right_on_red_timer") {
        faults.right_on_red_timer = true;
      } else if (token == "i5" || token == "left_yield_off") {
        faults.left_yield_off = true;
      } else if (token == "none") {
        faults = FaultSet{};
      } else {
        throw CampaignError("unknown fault '" + token +
                            "' (use i1..i5 or the long names)");
      }
    }
  }
  return faults;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

/// Each --properties value is either a comma list of rule names
/// ("builtin:p1,builtin:p2" or "p1,p2") or one property text in the surface
/// syntax. Texts get short labels q1, q2, ... for the reports.
void parse_properties(const std::vector<std::string>& raw,
                      std::vector<std::string>& sources,
                      std::vector<std::string>& labels) {
  const auto& builtins = builtin_property_names();
  auto is_builtin = [&](const std::string& name) {
    return std::find(builtins.begin(), builtins.end(), name) != builtins.end();
  };
  std::size_t texts = 0;
  for (const std::string& item : raw) {
    std::vector<std::string> names;
    bool all_names = true;
    for (std::string token : split_csv(item)) {
      if (token.rfind("builtin:", 0) == 0) token = token.substr(8);
      if (!is_identifier(token) || !is_builtin(token)) {
        all_names = false;
        break;
      }
      names.push_back(token);
    }
    if (all_names && !names.empty()) {
      for (const std::string& name : names) {
        sources.push_back(name);
        labels.push_back(name);
      }
    } else {
      sources.push_back(item);
      labels.push_back("q" + std::to_string(++texts));
    }
  }
}

/// One per-arm double vector: a scalar broadcasts to every arm.
std::vector<double> parse_arm_vector(const std::string& text, std::size_t arms,
                                     const char* what) {
  std::vector<double> values;
  for (const std::string& token : split_csv(text)) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw CampaignError(std::string(what) + ": '" + token +
                          "' is not a number");
    }
  }
  if (values.size() == 1) values.assign(arms, values.front());
  if (values.size() != arms) {
    throw CampaignError(std::string(what) + " needs 1 or " +
                        std::to_string(arms) + " values, got " +
                        std::to_string(values.size()));
  }
  return values;
}

void write_reports(const CampaignResult& result, const std::string& out_dir,
                   bool timing, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / (stem + "verdicts.csv");
  const fs::path json_path = fs::path(out_dir) / (stem + "diagnostics.json");
  std::ofstream csv(csv_path);
  csv << campaign_csv(result);
  std::ofstream json(json_path);
  json << campaign_json(result, timing);
  if (!csv || !json) throw CampaignError("cannot write into " + out_dir);
  std::cout << "wrote " << csv_path.string() << "\n";
  std::cout << "wrote " << json_path.string() << "\n";
}

int fail_exit(const CampaignResult& result) {
  for (const CampaignCell& cell : result.cells) {
    if (!cell.infeasible && cell.verdict.status == Status::Fail) {
      return kExitFail;
    }
  }
  return kExitOk;
}

void print_summary(const CampaignResult& result) {
  std::size_t pass = 0, fail = 0, na = 0, infeasible = 0;
  for (const CampaignCell& cell : result.cells) {
    if (cell.infeasible) {
      ++infeasible;
    } else if (cell.verdict.status == Status::Pass) {
      ++pass;
    } else if (cell.verdict.status == Status::Fail) {
      ++fail;
    } else {
      ++na;
    }
  }
  std::cerr << result.cells.size() << " cells: " << pass << " pass, " << fail
            << " fail, " << na << " not applicable, " << infeasible
            << " infeasible\n";
}

struct ValidateArgs {
  std::string map_path;
  std::string junction;
  std::string junction_type;
  std::string classes = "all";
  std::vector<std::string> distances;
  std::vector<std::string> speeds;
  std::vector<std::string> properties;
  std::vector<std::string> faults;
  std::vector<std::string> release_offsets;
  std::uint64_t seed = 0;
  int aggression = 2;
  double delta_t = 0.01;
  double horizon = 60.0;
  unsigned threads = 0;
  bool timing = false;
  bool rotate_context = false;
  std::string out_dir;
  std::string trace_dir;
};

int cmd_validate(const ValidateArgs& args) {
  const MapModel map = resolve_map(args.map_path, args.junction_type);
  const std::size_t junction =
      resolve_junction(map, args.junction, args.junction_type);
  const JunctionStyle style = junction_style(map, junction);

  CampaignDef def;
  def.name = "validate";
  def.lights = style == JunctionStyle::TrafficLight;
  if (!args.map_path.empty()) {
    def.map_json = map.to_json();
    def.junction = junction;
  }

  SimConfig config;
  config.delta_t_s = args.delta_t;
  config.horizon_s = args.horizon;
  config.creep_speed_mps = 0.003;
  config.target_speed_right_mps = 2.2;
  config.target_speed_left_mps = 2.2;
  config.target_speed_straight_mps = 4.5;
  config.seed = args.seed;
  config.faults = parse_faults(args.faults);
  if (config.faults.early_release) {
    config.release_offset_m = bundled_release_offsets();
  }
  for (const std::string& item : args.release_offsets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw CampaignError("--release-offset expects LANE=METRES, got '" +
                          item + "'");
    }
    config.release_offset_m[item.substr(0, eq)] =
        std::stod(item.substr(eq + 1));
  }
  def.config = config;
  def.aggression = args.aggression;
  def.trace_dir = args.trace_dir;

  if (args.properties.empty()) {
    def.properties = def.lights
                         ? std::vector<std::string>{"p4", "p5", "p6"}
                         : std::vector<std::string>{"p1", "p2", "p3"};
  } else {
    parse_properties(args.properties, def.properties, def.property_labels);
  }

  ScenarioSpace space(map, junction);
  const std::size_t arms = space.arm_count();
  const std::size_t rows = space.rotation_symmetric() ? arms : 1;
  if (args.classes == "all") {
    for (const RotationClass& cls : space.rotation_classes()) {
      def.classes.push_back({space.key(cls.base), cls.base, rows, 0});
    }
  } else {
    for (const std::string& key : split_csv(args.classes)) {
      bool found = false;
      for (const RotationClass& cls : space.rotation_classes()) {
        // Accept any member key; the named member becomes row 1.
        for (const SymbolicScenario& member : cls.members) {
          if (space.key(member) == key) {
            def.classes.push_back({key, member, rows, 0});
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) {
        throw CampaignError("no scenario with key '" + key +
                            "' (see `crossway enumerate`)");
      }
    }
  }

  std::vector<std::string> distances = args.distances;
  std::vector<std::string> speeds = args.speeds;
  if (distances.empty()) distances = {"20"};
  if (speeds.empty()) speeds = {"0"};
  if (speeds.size() == 1 && distances.size() > 1) {
    speeds.assign(distances.size(), speeds.front());
  }
  if (speeds.size() != distances.size()) {
    throw CampaignError("--speeds given " + std::to_string(speeds.size()) +
                        " times but --distances " +
                        std::to_string(distances.size()) + " times");
  }
  for (std::size_t i = 0; i < distances.size(); ++i) {
    CampaignColumn col;
    col.name = "G" + std::to_string(i + 1);
    col.gaps_m = parse_arm_vector(distances[i], arms, "--distances");
    col.speeds_mps = parse_arm_vector(speeds[i], arms, "--speeds");
    col.rotate_with_row = args.rotate_context;
    def.columns.push_back(std::move(col));
  }

  const CampaignResult result = run_campaign(def, args.threads);
  if (args.out_dir.empty()) {
    std::cout << campaign_csv(result);
  } else {
    write_reports(result, args.out_dir, args.timing, "");
  }
  print_summary(result);
  return fail_exit(result);
}

int cmd_enumerate(int arms) {
  const MapModel map = arms == 3 ? three_way_stop_map() : four_way_stop_map();
  ScenarioSpace space(map, 0);
  const auto classes = space.rotation_classes();
  std::size_t scenarios = 0;
  for (const RotationClass& cls : classes) {
    std::cout << "class " << space.key(cls.base) << " size "
              << cls.members.size() << ":";
    for (const SymbolicScenario& member : cls.members) {
      std::cout << ' ' << space.key(member);
    }
    std::cout << "\n";
    scenarios += cls.members.size();
  }
  std::cout << "classes: " << classes.size() << "  scenarios: " << scenarios
            << "  burnside: " << space.class_count_by_counting() << "\n";
  return kExitOk;
}

int cmd_safe_speed(const std::string& map_path,
                   const std::string& junction_type,
                   const std::string& junction, int aggression,
                   const std::string& distances, double delta_t,
                   const std::vector<std::string>& faults) {
  const MapModel map = resolve_map(map_path, junction_type);
  const std::size_t j = resolve_junction(map, junction, junction_type);
  SimConfig config;
  config.delta_t_s = delta_t;
  config.faults = parse_faults(faults);
  const VertexId entrance = map.junctions().at(j).entrances.at(0);
  std::cout << "distance_m,safe_speed_mps\n";
  for (const std::string& token : split_csv(distances)) {
    const double d = std::stod(token);
    const auto v = estimate_safe_speed(map, entrance, d, aggression, config);
    std::cout << token << ',';
    if (v) {
      std::cout << *v;
    } else {
      std::cout << "unsafe";
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_check(const std::string& trace_path, const std::string& map_path,
              const std::string& junction_type, const std::string& junction,
              const std::vector<std::string>& properties) {
  const MapModel map = resolve_map(map_path, junction_type);
  const std::size_t j = resolve_junction(map, junction, junction_type);
  std::ifstream in(trace_path);
  if (!in) throw CampaignError("cannot open " + trace_path);
  const Trace trace = Trace::read_jsonl(in, map);

  std::vector<std::string> sources, labels;
  parse_properties(properties, sources, labels);
  if (sources.empty()) throw CampaignError("no --property given");

  Monitor monitor(map, j);
  const auto& builtins = builtin_property_names();
  int exit = kExitOk;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const bool is_builtin = std::find(builtins.begin(), builtins.end(),
                                      sources[i]) != builtins.end();
    const FormulaId fid = is_builtin ? monitor.builtin(sources[i])
                                     : monitor.property(sources[i]);
    const Verdict verdict = monitor.run(fid, trace);
    std::cout << labels[i] << ": " << to_string(verdict.status);
    if (verdict.na_reason != NaReason::None) {
      std::cout << " (" << to_string(verdict.na_reason) << ")";
    }
    if (verdict.status == Status::Fail) {
      exit = kExitFail;
      if (verdict.witness_tick) {
        std::cout << " witness_tick=" << *verdict.witness_tick;
      }
      if (const auto vb = monitor.violating_binding(fid, trace)) {
        std::cout << " binding:";
        for (const auto& [var, value] : vb->binding) {
          std::cout << ' ' << var << '=' << value;
        }
      }
    }
    std::cout << "\n";
  }
  return exit;
}

int cmd_fixture(const std::string& name, int green_pair) {
  if (name == "four_way_stop") {
    std::cout << four_way_stop_map().to_json();
  } else if (name == "four_way_lights") {
    std::cout << four_way_lights_map(green_pair).to_json();
  } else if (name == "three_way_stop") {
    std::cout << three_way_stop_map().to_json();
  } else {
    throw CampaignError("unknown fixture '" + name + "'");
  }
  return kExitOk;
}

int cmd_table(const std::string& which, unsigned threads, bool timing,
              bool check, const std::string& out_dir) {
  int exit = kExitOk;
  bool any = false;
  for (const CampaignDef& def : bundled_campaigns()) {
    if (which != "all" && def.name != which) continue;
    any = true;
    const CampaignResult result = run_campaign(def, threads);
    if (out_dir.empty()) {
      std::cout << campaign_csv(result);
    } else {
      write_reports(result, out_dir, timing, def.name + "_");
    }
    print_summary(result);
    if (check) {
      for (const std::string& line : reference_mismatches(result)) {
        std::cerr << "mismatch " << line << "\n";
        exit = kExitFail;
      }
    } else if (fail_exit(result) == kExitFail) {
      exit = kExitFail;
    }
  }
  if (!any) throw CampaignError("unknown campaign '" + which + "'");
  return exit;
}

}  // namespace
}  // namespace crossway

int main(int argc, char** argv) {
  using namespace crossway;
  CLI::App app{
      "crossway — deterministic junction traffic validation: simulate "
      "scenario grids over a junction map and check temporal driving rules "
      "on the recorded traces"};
  app.require_subcommand(1);

  ValidateArgs v;
  CLI::App* validate = app.add_subcommand(
      "validate",
      "Run a campaign grid (rotation classes x approach contexts) and report "
      "one verdict per cell and rule");
  validate->add_option("--map", v.map_path,
                       "Map document (default: bundled four-way fixture)");
  validate->add_option("--junction", v.junction,
                       "Junction selector: index, style name or entrance "
                       "vertex name");
  validate->add_option("--junction-type", v.junction_type,
                       "all_way_stop or traffic_light; picks the bundled "
                       "fixture and the junction")
      ->check(CLI::IsMember({"all_way_stop", "traffic_light"}));
  validate->add_option("--classes", v.classes,
                       "Rotation classes: 'all' or a comma list of keys "
                       "(e.g. SRRR)");
  validate->add_option("--distances", v.distances,
                       "Per-column start gaps in metres: scalar or one value "
                       "per arm (repeat for more columns)");
  validate->add_option("--speeds", v.speeds,
                       "Per-column start speeds in m/s, like --distances");
  validate->add_option("--properties", v.properties,
                       "Rules to monitor: builtin:p1..p6 (comma list) or a "
                       "property text (repeatable)");
  validate->add_option("--faults", v.faults,
                       "Injected deficiencies: comma list of i1..i5 or long "
                       "names; default none");
  validate->add_option("--release-offset", v.release_offsets,
                       "Early-release override LANE=METRES (repeatable)");
  validate->add_option("--seed", v.seed, "Campaign random seed");
  validate->add_option("--aggression", v.aggression,
                       "Driver aggression 1..3 (default 2)")
      ->check(CLI::Range(1, 3));
  validate->add_option("--delta-t", v.delta_t, "Tick length in seconds");
  validate->add_option("--horizon", v.horizon, "Run horizon in seconds");
  validate->add_option("--threads", v.threads,
                       "Worker threads (0 = hardware)");
  validate->add_flag("--timing", v.timing,
                     "Include wall-clock timings in diagnostics.json");
  validate->add_flag("--rotate-context", v.rotate_context,
                     "Rotate the context vectors along with the scenario "
                     "rows");
  validate->add_option("--out", v.out_dir,
                       "Write verdicts.csv and diagnostics.json here instead "
                       "of stdout");
  validate->add_option("--save-traces", v.trace_dir,
                       "Also store every run's trace (JSON lines) here");

  int enum_arms = 4;
  CLI::App* enumerate = app.add_subcommand(
      "enumerate", "List the rotation classes of the bundled junction");
  enumerate->add_option("--arms", enum_arms, "Junction arity (3 or 4)")
      ->check(CLI::IsMember({3, 4}));

  std::string ss_map, ss_junction_type, ss_junction;
  int ss_aggression = 1;
  std::string ss_distances = "0.1,0.5,1,2,5,10,20";
  double ss_delta_t = 0.1;
  std::vector<std::string> ss_faults;
  CLI::App* safe_speed = app.add_subcommand(
      "safe-speed",
      "Print the maximum safe start speed per start distance as CSV");
  safe_speed->add_option("--map", ss_map, "Map document");
  safe_speed->add_option("--junction", ss_junction, "Junction selector");
  safe_speed->add_option("--junction-type", ss_junction_type,
                         "all_way_stop or traffic_light")
      ->check(CLI::IsMember({"all_way_stop", "traffic_light"}));
  safe_speed->add_option("--aggression", ss_aggression,
                         "Driver aggression 1..3")
      ->check(CLI::Range(1, 3));
  safe_speed->add_option("--distances", ss_distances,
                         "Comma list of start distances in metres");
  safe_speed->add_option("--delta-t", ss_delta_t, "Tick length in seconds");
  safe_speed->add_option("--faults", ss_faults,
                         "Deficiencies active while estimating (i1..i5)");

  std::string ck_trace, ck_map, ck_junction_type, ck_junction;
  std::vector<std::string> ck_properties;
  CLI::App* check = app.add_subcommand(
      "check", "Re-check properties against a recorded trace");
  check->add_option("--trace", ck_trace, "Trace in JSON-lines form")
      ->required();
  check->add_option("--map", ck_map,
                    "Map the trace was recorded on (default: bundled "
                    "fixture)");
  check->add_option("--junction", ck_junction, "Junction selector");
  check->add_option("--junction-type", ck_junction_type,
                    "all_way_stop or traffic_light")
      ->check(CLI::IsMember({"all_way_stop", "traffic_light"}));
  check->add_option("--property", ck_properties,
                    "builtin:p1..p6 or a property text (repeatable)")
      ->required();

  std::string fx_name = "four_way_stop";
  int fx_green_pair = 0;
  CLI::App* fixture = app.add_subcommand(
      "fixture", "Print a bundled junction map as JSON");
  fixture->add_option("--name", fx_name,
                      "four_way_stop, four_way_lights or three_way_stop");
  fixture->add_option("--green-pair", fx_green_pair,
                      "Arm pair starting green (0 -> {0,2}, 1 -> {1,3})")
      ->check(CLI::Range(0, 1));

  std::string tb_which = "all";
  unsigned tb_threads = 0;
  bool tb_timing = false, tb_check = false;
  std::string tb_out;
  CLI::App* table = app.add_subcommand(
      "table", "Run the bundled deficiency campaigns (stop and lights)");
  table->add_option("--campaign", tb_which, "stop, lights or all");
  table->add_option("--threads", tb_threads, "Worker threads (0 = hardware)");
  table->add_flag("--timing", tb_timing,
                  "Include wall-clock timings in the diagnostics");
  table->add_flag("--check", tb_check,
                  "Compare against the bundled reference grid; exit 1 on any "
                  "mismatch instead of on failed cells");
  table->add_option("--out", tb_out, "Write reports here instead of stdout");

  try {
    app.parse(argc, argv);
    if (*validate) return cmd_validate(v);
    if (*enumerate) return cmd_enumerate(enum_arms);
    if (*safe_speed) {
      return cmd_safe_speed(ss_map, ss_junction_type, ss_junction,
                            ss_aggression, ss_distances, ss_delta_t,
                            ss_faults);
    }
    if (*check) {
      return cmd_check(ck_trace, ck_map, ck_junction_type, ck_junction,
                       ck_properties);
    }
    if (*fixture) return cmd_fixture(fx_name, fx_green_pair);
    if (*table) {
      return cmd_table(tb_which, tb_threads, tb_timing, tb_check, tb_out);
    }
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
