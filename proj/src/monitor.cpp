// monitor.cpp — progression engine and table-based cross-check evaluator.

#include "crossway/monitor.h"

#include <algorithm>

namespace crossway {

std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "Pass";
    case Status::Fail: return "Fail";
    case Status::NotApplicable: return "NA";
  }
  throw MonitorError("unknown status");
}

std::string to_string(NaReason r) {
  switch (r) {
    case NaReason::None: return "none";
    case NaReason::RuleNotApplicable: return "rule_not_applicable";
    case NaReason::TriviallySatisfied: return "trivially_satisfied";
  }
  throw MonitorError("unknown NA reason");
}

namespace {

using Memo = std::unordered_map<FormulaId, FormulaId>;

/// One progression step: rewrites `id` into the obligation on the trace
/// suffix after consuming `state`.
FormulaId progress(FormulaArena& arena, FormulaId id, const GroundContext& ctx,
                   const Trace& trace, const WorldState& state, Memo& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  // The arena vector may grow while building the rewritten formula, so the
  // node is copied before recursing.
  const FormulaNode node = arena.node(id);
  FormulaId out = 0;
  switch (node.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      out = id;
      break;
    case FormulaKind::Not:
      out = arena.negation(progress(arena, node.a, ctx, trace, state, memo));
      break;
    case FormulaKind::And:
      out = arena.conj(progress(arena, node.a, ctx, trace, state, memo),
                       progress(arena, node.b, ctx, trace, state, memo));
      break;
    case FormulaKind::Or:
      out = arena.disj(progress(arena, node.a, ctx, trace, state, memo),
                       progress(arena, node.b, ctx, trace, state, memo));
      break;
    case FormulaKind::Implies:
      out = arena.implies(progress(arena, node.a, ctx, trace, state, memo),
                          progress(arena, node.b, ctx, trace, state, memo));
      break;
    case FormulaKind::Next:
      // X phi: the obligation moves wholesale to the next tick.
      out = node.a;
      break;
    case FormulaKind::Until: {
      // a U b  =  b  or  (a and X(a U b)).
      FormulaId pb = progress(arena, node.b, ctx, trace, state, memo);
      FormulaId pa = progress(arena, node.a, ctx, trace, state, memo);
      out = arena.disj(pb, arena.conj(pa, id));
      break;
    }
    case FormulaKind::Globally: {
      FormulaId pa = progress(arena, node.a, ctx, trace, state, memo);
      out = arena.conj(pa, id);
      break;
    }
    default:
      if (is_dynamic_atom(node.kind)) {
        out = arena.truth(eval_atom(arena, id, ctx, trace, state));
      } else {
        throw MonitorError("progression reached a non-ground formula: " +
                           arena.to_string(id));
      }
  }
  memo.emplace(id, out);
  return out;
}

/// Finite-trace evaluation of the residual formula on the final state:
/// X is false, a U b reduces to b, G a reduces to a.
bool eval_final(const FormulaArena& arena, FormulaId id,
                const GroundContext& ctx, const Trace& trace,
                const WorldState& state,
                std::unordered_map<FormulaId, bool>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  const FormulaNode& node = arena.node(id);
  bool out = false;
  switch (node.kind) {
    case FormulaKind::True: out = true; break;
    case FormulaKind::False: out = false; break;
    case FormulaKind::Not:
      out = !eval_final(arena, node.a, ctx, trace, state, memo);
      break;
    case FormulaKind::And:
      out = eval_final(arena, node.a, ctx, trace, state, memo) &&
            eval_final(arena, node.b, ctx, trace, state, memo);
      break;
    case FormulaKind::Or:
      out = eval_final(arena, node.a, ctx, trace, state, memo) ||
            eval_final(arena, node.b, ctx, trace, state, memo);
      break;
    case FormulaKind::Implies:
      out = !eval_final(arena, node.a, ctx, trace, state, memo) ||
            eval_final(arena, node.b, ctx, trace, state, memo);
      break;
    case FormulaKind::Next:
      out = false;  // no next tick exists
      break;
    case FormulaKind::Until:
      out = eval_final(arena, node.b, ctx, trace, state, memo);
      break;
    case FormulaKind::Globally:
      out = eval_final(arena, node.a, ctx, trace, state, memo);
      break;
    default:
      if (is_dynamic_atom(node.kind)) {
        out = eval_atom(arena, id, ctx, trace, state);
      } else {
        throw MonitorError("final evaluation reached a non-ground formula: " +
                           arena.to_string(id));
      }
  }
  memo.emplace(id, out);
  return out;
}

/// Collects the ids reachable from `root`, returned in ascending order.
/// Children are always interned before their parents, so ascending id order
/// is a bottom-up topological order of the subformula DAG.
std::vector<FormulaId> reachable_sorted(const FormulaArena& arena,
                                        FormulaId root) {
  std::unordered_set<FormulaId> seen;
  std::vector<FormulaId> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    FormulaId id = stack.back();
    stack.pop_back();
    const FormulaNode& node = arena.node(id);
    switch (node.kind) {
      case FormulaKind::Not:
      case FormulaKind::Next:
      case FormulaKind::Globally:
        if (seen.insert(node.a).second) stack.push_back(node.a);
        break;
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
      case FormulaKind::Until:
        if (seen.insert(node.a).second) stack.push_back(node.a);
        if (seen.insert(node.b).second) stack.push_back(node.b);
        break;
      default:
        break;  // atoms and constants
    }
  }
  std::vector<FormulaId> ids(seen.begin(), seen.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

OracleResult oracle_evaluate(const FormulaArena& arena, FormulaId root,
                             const GroundContext& ctx, const Trace& trace,
                             const std::vector<FormulaId>& track) {
  const std::size_t n = trace.states().size();
  if (n == 0) throw MonitorError("oracle: empty trace");

  std::vector<FormulaId> ids = reachable_sorted(arena, root);
  std::unordered_map<FormulaId, std::size_t> slot;
  slot.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) slot.emplace(ids[i], i);

  OracleResult result;
  for (FormulaId id : track) result.ever_true.emplace(id, false);

  // cur[j] is the value of subformula ids[j] at the tick being processed;
  // nxt[j] the value at the following tick.  Filled from the last tick down.
  std::vector<char> cur(ids.size(), 0), nxt(ids.size(), 0);
  for (std::size_t back = 0; back < n; ++back) {
    const std::size_t i = n - 1 - back;
    const bool has_next = i + 1 < n;
    const WorldState& state = trace.states()[i];
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const FormulaNode& node = arena.node(ids[j]);
      bool v = false;
      switch (node.kind) {
        case FormulaKind::True: v = true; break;
        case FormulaKind::False: v = false; break;
        case FormulaKind::Not: v = !cur[slot.at(node.a)]; break;
        case FormulaKind::And:
          v = cur[slot.at(node.a)] && cur[slot.at(node.b)];
          break;
        case FormulaKind::Or:
          v = cur[slot.at(node.a)] || cur[slot.at(node.b)];
          break;
        case FormulaKind::Implies:
          v = !cur[slot.at(node.a)] || cur[slot.at(node.b)];
          break;
        case FormulaKind::Next:
          v = has_next && nxt[slot.at(node.a)];
          break;
        case FormulaKind::Until:
          v = cur[slot.at(node.b)] ||
              (cur[slot.at(node.a)] && has_next && nxt[j]);
          break;
        case FormulaKind::Globally:
          v = cur[slot.at(node.a)] && (!has_next || nxt[j]);
          break;
        default:
          if (!is_dynamic_atom(node.kind)) {
            throw MonitorError("oracle reached a non-ground formula: " +
                               arena.to_string(ids[j]));
          }
          v = eval_atom(arena, ids[j], ctx, trace, state);
      }
      cur[j] = v ? 1 : 0;
      if (v) {
        if (auto it = result.ever_true.find(ids[j]);
            it != result.ever_true.end()) {
          it->second = true;
        }
      }
    }
    std::swap(cur, nxt);
  }
  // After the final swap, nxt holds the values at tick 0.
  result.holds = nxt[slot.at(root)] != 0;
  return result;
}

Monitor::Monitor(const MapModel& map, std::size_t junction)
    : map_(&map), junction_(junction) {
  if (junction >= map.junctions().size()) {
    throw MonitorError("junction index out of range");
  }
}

FormulaId Monitor::property(const std::string& text) {
  return parse_property(arena_, text);
}

FormulaId Monitor::builtin(const std::string& name) {
  return builtin_property(arena_, name);
}

GroundContext Monitor::context_for(const Trace& trace) const {
  return GroundContext::for_junction(
      *map_, junction_, static_cast<std::uint32_t>(trace.agents().size()));
}

std::vector<FormulaId> Monitor::guard_antecedents(FormulaId unfolded) const {
  std::vector<FormulaId> antecedents;
  std::vector<FormulaId> stack{unfolded};
  std::unordered_set<FormulaId> seen{unfolded};
  while (!stack.empty()) {
    FormulaId id = stack.back();
    stack.pop_back();
    const FormulaNode& node = arena_.node(id);
    if (node.kind == FormulaKind::And) {
      if (seen.insert(node.a).second) stack.push_back(node.a);
      if (seen.insert(node.b).second) stack.push_back(node.b);
    } else if (node.kind == FormulaKind::Globally) {
      const FormulaNode& body = arena_.node(node.a);
      if (body.kind == FormulaKind::Implies) antecedents.push_back(body.a);
    }
  }
  return antecedents;
}

Verdict Monitor::finish_pass(FormulaId unfolded, const GroundContext& ctx,
                             const Trace& trace, std::size_t states) const {
  Verdict v;
  v.status = Status::Pass;
  v.automaton_states = states;
  std::vector<FormulaId> antecedents = guard_antecedents(unfolded);
  if (antecedents.empty()) return v;  // nothing guarded: a plain pass
  OracleResult scan =
      oracle_evaluate(arena_, unfolded, ctx, trace, antecedents);
  for (FormulaId a : antecedents) {
    if (scan.ever_true.at(a)) return v;  // some guard fired: genuine pass
  }
  v.status = Status::NotApplicable;
  v.na_reason = NaReason::TriviallySatisfied;
  return v;
}

Verdict Monitor::run(FormulaId surface, const Trace& trace) {
  if (trace.states().empty()) throw MonitorError("cannot monitor empty trace");
  const GroundContext ctx = context_for(trace);
  const FormulaId unfolded = unfold(arena_, surface, ctx);

  Verdict v;
  if (unfolded == arena_.truth(true)) {
    // The rule constrains nothing on this map and junction.
    v.status = Status::NotApplicable;
    v.na_reason = NaReason::RuleNotApplicable;
    v.automaton_states = 1;
    return v;
  }

  std::unordered_set<FormulaId> distinct{unfolded};
  FormulaId cur = unfolded;
  const std::size_t n = trace.states().size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Memo memo;
    cur = progress(arena_, cur, ctx, trace, trace.states()[i], memo);
    distinct.insert(cur);
    if (distinct.size() > kStateBudget) {
      throw MonitorError("residual state budget exceeded");
    }
    if (cur == arena_.truth(false)) {
      v.status = Status::Fail;
      v.witness_tick = i;
      v.automaton_states = distinct.size();
      return v;
    }
    if (cur == arena_.truth(true)) {
      return finish_pass(unfolded, ctx, trace, distinct.size());
    }
  }
  std::unordered_map<FormulaId, bool> memo;
  if (!eval_final(arena_, cur, ctx, trace, trace.states()[n - 1], memo)) {
    v.status = Status::Fail;
    v.witness_tick = n - 1;
    v.automaton_states = distinct.size();
    return v;
  }
  return finish_pass(unfolded, ctx, trace, distinct.size());
}

Verdict Monitor::run_oracle(FormulaId surface, const Trace& trace) {
  if (trace.states().empty()) throw MonitorError("cannot monitor empty trace");
  const GroundContext ctx = context_for(trace);
  const FormulaId unfolded = unfold(arena_, surface, ctx);

  Verdict v;
  if (unfolded == arena_.truth(true)) {
    v.status = Status::NotApplicable;
    v.na_reason = NaReason::RuleNotApplicable;
    return v;
  }
  OracleResult res = oracle_evaluate(arena_, unfolded, ctx, trace);
  if (!res.holds) {
    v.status = Status::Fail;
    return v;
  }
  return finish_pass(unfolded, ctx, trace, 0);
}

std::optional<std::size_t> Monitor::fail_witness(FormulaId surface,
                                                 const Trace& trace,
                                                 std::size_t last_tick) {
  const GroundContext ctx = context_for(trace);
  const FormulaId unfolded = unfold(arena_, surface, ctx);
  if (unfolded == arena_.truth(true)) return std::nullopt;
  std::unordered_set<FormulaId> distinct{unfolded};
  FormulaId cur = unfolded;
  const std::size_t n = trace.states().size();
  for (std::size_t i = 0; i + 1 < n && i <= last_tick; ++i) {
    Memo memo;
    cur = progress(arena_, cur, ctx, trace, trace.states()[i], memo);
    distinct.insert(cur);
    if (distinct.size() > kStateBudget) {
      throw MonitorError("residual state budget exceeded");
    }
    if (cur == arena_.truth(false)) return i;
    if (cur == arena_.truth(true)) return std::nullopt;
  }
  if (last_tick >= n - 1) {
    std::unordered_map<FormulaId, bool> memo;
    if (!eval_final(arena_, cur, ctx, trace, trace.states()[n - 1], memo)) {
      return n - 1;
    }
  }
  return std::nullopt;
}

std::optional<ViolatingBinding> Monitor::violating_binding(FormulaId surface,
                                                           const Trace& trace) {
  if (trace.states().empty()) return std::nullopt;
  const GroundContext ctx = context_for(trace);
  auto value_name = [&](Domain d, std::uint32_t v) -> std::string {
    switch (d) {
      case Domain::Agent:
        if (v < trace.agents().size()) return trace.agents()[v].name;
        break;
      case Domain::Entrance:
        return map_->graph().vertex_name(v);
      case Domain::Light: {
        auto lights = map_->objects_of(MapObject::Kind::TrafficLight);
        if (v < lights.size()) return lights[v]->id;
        break;
      }
    }
    return std::to_string(v);
  };

  ViolatingBinding out;
  FormulaId cur = surface;
  std::optional<std::size_t> witness;
  while (arena_.node(cur).kind == FormulaKind::Forall) {
    // Instantiate the outermost variable and descend into the value whose
    // sub-formula fails earliest; its failure is what the conjunction over
    // the domain reports as the overall witness.
    const FormulaNode n = arena_.node(cur);
    FormulaId best = 0;
    std::optional<std::size_t> best_witness;
    std::string best_name;
    for (std::uint32_t v : domain_values(n.domain, ctx)) {
      if (best_witness && *best_witness == 0) break;  // cannot fail earlier
      // Later values only matter if they fail strictly before the current
      // best, so their progression can stop there.
      const std::size_t cap =
          best_witness ? *best_witness - 1 : trace.states().size() - 1;
      FormulaId inst = substitute(arena_, n.a, n.var, v);
      auto w = fail_witness(inst, trace, cap);
      if (!w) continue;
      best = inst;
      best_witness = w;
      best_name = value_name(n.domain, v);
    }
    if (!best_witness) return std::nullopt;  // no failing instance here
    out.binding.emplace_back(n.var, best_name);
    witness = best_witness;
    cur = best;
  }
  if (out.binding.empty()) {
    // No leading universal quantifier: report the bare witness.
    witness = fail_witness(cur, trace, trace.states().size() - 1);
    if (!witness) return std::nullopt;
  }
  out.witness_tick = *witness;
  return out;
}

}  // namespace crossway
