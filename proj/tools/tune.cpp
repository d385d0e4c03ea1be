// tune.cpp — developer harness for the bundled campaigns: prints the verdict
// grid against the reference, replays single cells with scheduler timings and
// entrance windows, and scans seeds for the mixed-context light cell.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "crossway/campaign.h"
#include "crossway/fixtures.h"

using namespace crossway;

namespace {

int cmd_grid(const std::string& which) {
  int bad = 0;
  for (const CampaignDef& def : bundled_campaigns()) {
    if (which != "all" && def.name != which) continue;
    const CampaignResult result = run_campaign(def);
    const auto grid = reference_grid(def.name);
    std::printf("== campaign %s ==\n", def.name.c_str());
    for (const CampaignCell& c : result.cells) {
      const std::string key = c.class_name + "/" + std::to_string(c.row) +
                              "/" + c.column + "/" + c.property;
      const std::string got = status_token(c.verdict);
      const auto it = grid.find(key);
      const std::string want = it == grid.end() ? "?" : it->second;
      const bool ok = got == want;
      if (!ok) ++bad;
      std::printf("%-14s %-12s got %-4s want %-4s %s", key.c_str(),
                  c.scenario_key.c_str(), got.c_str(), want.c_str(),
                  ok ? "" : "  <-- MISMATCH");
      if (c.verdict.witness_tick)
        std::printf("  witness %zu", *c.verdict.witness_tick);
      if (c.verdict.na_reason != NaReason::None)
        std::printf("  (%s)", to_string(c.verdict.na_reason).c_str());
      std::printf("\n");
    }
  }
  std::printf("mismatches: %d\n", bad);
  return bad == 0 ? 0 : 1;
}

const CampaignDef& find_campaign(std::vector<CampaignDef>& defs,
                                 const std::string& name) {
  for (CampaignDef& d : defs)
    if (d.name == name) return d;
  std::fprintf(stderr, "no campaign named %s\n", name.c_str());
  std::exit(2);
}

int cmd_cell(const std::string& campaign, const std::string& cls,
             std::size_t row, const std::string& column) {
  std::vector<CampaignDef> defs = bundled_campaigns();
  const CampaignDef& def = find_campaign(defs, campaign);
  const CellSetup setup = cell_setup(def, cls, row, column);
  const double dt = setup.config.delta_t_s;
  std::printf("cell %s/%s/%zu/%s scenario %s seed %llu\n", campaign.c_str(),
              cls.c_str(), row, column.c_str(), setup.scenario_key.c_str(),
              static_cast<unsigned long long>(setup.config.seed));
  std::printf("init_order:");
  for (std::size_t i : setup.config.init_order) std::printf(" %zu", i);
  std::printf("\n");
  for (const VehicleSpec& v : setup.vehicles)
    std::printf("  %-6s gap-start %.3f  v0 %.2f  wait %.3f\n", v.name.c_str(),
                v.itinerary.front().from, v.start_speed_mps,
                v.red_right_wait_s);

  const Simulator sim(setup.map, setup.config);
  const SimResult res = sim.run(setup.vehicles);

  for (const auto& g : res.diag.grants)
    std::printf("grant   t=%8.2f tick %6zu agent %zu%s\n", g.tick * dt, g.tick,
                g.agent, g.rolling ? " (rolling)" : "");
  for (const auto& r : res.diag.releases)
    std::printf("release t=%8.2f tick %6zu agent %zu\n", r.tick * dt, r.tick,
                r.agent);
  std::printf("deadlock_breaks: %zu\n", res.diag.deadlock_breaks);

  const std::size_t agents = res.trace.agents().size();
  for (std::size_t i = 0; i < agents; ++i) {
    std::printf("agent %zu %-6s", i, res.trace.agents()[i].name.c_str());
    if (res.diag.entry_tick[i])
      std::printf("  entry t=%8.2f (tick %zu)", *res.diag.entry_tick[i] * dt,
                  *res.diag.entry_tick[i]);
    else
      std::printf("  entry -");
    if (res.diag.exit_tick[i])
      std::printf("  exit t=%8.2f (tick %zu)", *res.diag.exit_tick[i] * dt,
                  *res.diag.exit_tick[i]);
    else
      std::printf("  exit -");
    std::printf("\n");
  }

  // At-entrance windows and first-stop times per agent.
  const Junction& j = setup.map.junctions().at(0);
  for (std::size_t i = 0; i < agents; ++i) {
    const AgentMeta& meta = res.trace.agents()[i];
    bool in_window = false;
    std::printf("agent %zu windows:", i);
    std::optional<std::size_t> stop_tick;
    for (std::size_t t = 0; t < res.trace.size(); ++t) {
      const AgentSnapshot& snap = res.trace.at(t).agents[i];
      if (!snap.active) break;
      bool at_en = false;
      for (VertexId en : j.entrances)
        if (at_entrance(setup.map, meta, snap, en)) at_en = true;
      if (at_en && !in_window) std::printf(" [%.2f", t * dt);
      if (!at_en && in_window) std::printf(", %.2f)", t * dt);
      in_window = at_en;
      if (!stop_tick && at_en && agent_stopped(snap)) stop_tick = t;
    }
    if (in_window) std::printf(", end)");
    if (stop_tick) std::printf("  first-stop t=%.2f", *stop_tick * dt);
    std::printf("\n");
  }

  // Handover margins between consecutive grants (positive = co-occupancy).
  for (std::size_t k = 1; k < res.diag.grants.size(); ++k) {
    const auto& prev = res.diag.grants[k - 1];
    const auto& cur = res.diag.grants[k];
    if (!res.diag.exit_tick[prev.agent] || !res.diag.entry_tick[cur.agent]) {
      std::printf("handover %zu->%zu: incomplete\n", prev.agent, cur.agent);
      continue;
    }
    const long long margin =
        static_cast<long long>(*res.diag.exit_tick[prev.agent]) -
        static_cast<long long>(*res.diag.entry_tick[cur.agent]);
    std::printf("handover %zu->%zu: exit %zu entry %zu margin %+lld ticks\n",
                prev.agent, cur.agent, *res.diag.exit_tick[prev.agent],
                *res.diag.entry_tick[cur.agent], margin);
  }

  // First co-occupancy tick, if any.
  for (std::size_t t = 0; t < res.trace.size(); ++t) {
    std::size_t inside = 0;
    for (std::size_t i = 0; i < agents; ++i) {
      const AgentSnapshot& snap = res.trace.at(t).agents[i];
      if (snap.active && in_junction(setup.map, res.trace.agents()[i], snap, 0))
        ++inside;
    }
    if (inside >= 2) {
      std::printf("first co-occupancy at t=%.2f (tick %zu, %zu inside)\n",
                  t * dt, t, inside);
      break;
    }
  }

  Monitor mon(setup.map, 0);
  for (const std::string& p : def.properties) {
    const Verdict v = mon.run(mon.builtin(p), res.trace);
    std::printf("%s: %s", p.c_str(), status_token(v).c_str());
    if (v.witness_tick) std::printf(" witness %zu", *v.witness_tick);
    if (v.na_reason != NaReason::None)
      std::printf(" (%s)", to_string(v.na_reason).c_str());
    std::printf("\n");
  }
  return 0;
}

int cmd_correct() {
  int fails = 0;
  for (CampaignDef def : bundled_campaigns()) {
    def.config.faults = FaultSet{};
    def.config.release_offset_m.clear();
    const CampaignResult result = run_campaign(def);
    for (const CampaignCell& c : result.cells) {
      if (c.verdict.status != Status::Fail) continue;
      ++fails;
      std::printf("FAIL %s %s/%zu/%s/%s witness %zu\n", def.name.c_str(),
                  c.class_name.c_str(), c.row, c.column.c_str(),
                  c.property.c_str(),
                  c.verdict.witness_tick ? *c.verdict.witness_tick : 0);
    }
  }
  std::printf("correct-mode Fail cells: %d\n", fails);
  return fails == 0 ? 0 : 1;
}

int cmd_seeds(std::uint64_t from, std::uint64_t to) {
  std::vector<CampaignDef> defs = bundled_campaigns();
  CampaignDef def = find_campaign(defs, "lights");
  for (std::uint64_t seed = from; seed <= to; ++seed) {
    def.config.seed = seed;
    const CellSetup setup = cell_setup(def, "4", 1, "J");
    const Simulator sim(setup.map, setup.config);
    const SimResult res = sim.run(setup.vehicles);
    Monitor mon(setup.map, 0);
    const Verdict v = mon.run(mon.builtin("p5"), res.trace);
    std::printf("seed %4llu: p5 %-4s  waits %.3f %.3f\n",
                static_cast<unsigned long long>(seed),
                status_token(v).c_str(), setup.vehicles[1].red_right_wait_s,
                setup.vehicles[3].red_right_wait_s);
  }
  return 0;
}

int cmd_json(const std::string& campaign, const std::string& cls,
             std::size_t rows, const std::string& column) {
  std::vector<CampaignDef> defs = bundled_campaigns();
  CampaignDef def = find_campaign(defs, campaign);
  std::vector<CampaignClassDef> keep;
  for (const CampaignClassDef& c : def.classes)
    if (c.name == cls) keep.push_back(c);
  def.classes = keep;
  def.classes.at(0).rows = rows;
  std::vector<CampaignColumn> cols;
  for (const CampaignColumn& c : def.columns)
    if (c.name == column) cols.push_back(c);
  def.columns = cols;
  const CampaignResult result = run_campaign(def);
  std::printf("%s", campaign_json(result).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::string mode = argc > 1 ? argv[1] : "grid";
    if (mode == "grid")
      return cmd_grid(argc > 2 ? argv[2] : "all");
    if (mode == "correct") return cmd_correct();
    if (mode == "cell" && argc == 6)
      return cmd_cell(argv[2], argv[3],
                      static_cast<std::size_t>(std::atoi(argv[4])), argv[5]);
    if (mode == "json" && argc == 6)
      return cmd_json(argv[2], argv[3],
                      static_cast<std::size_t>(std::atoi(argv[4])), argv[5]);
    if (mode == "seeds" && argc == 4)
      return cmd_seeds(std::strtoull(argv[2], nullptr, 10),
                       std::strtoull(argv[3], nullptr, 10));
    std::fprintf(stderr,
                 "usage: cw_tune [grid [stop|lights|all]]\n"
                 "       cw_tune cell <campaign> <class> <row> <column>\n"
                 "       cw_tune json <campaign> <class> <rows> <column>\n"
                 "       cw_tune seeds <from> <to>\n");
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
