// monitor.h — finite-trace runtime verification of ground temporal formulas.
//
// The monitor consumes a recorded trace tick by tick and rewrites the formula
// by progression: after each state the formula is replaced by what must hold
// of the remaining suffix.  Reaching `false` yields a Fail verdict with the
// index of the offending tick; reaching `true` yields an early Pass.  At the
// last tick the residual formula is evaluated under finite-trace semantics
// (strong Next/Until, weak Globally).
//
// A second, independent evaluator (`oracle_evaluate`) computes the same
// semantics by dynamic programming over the trace.  It shares no code with
// the progression engine and is used to cross-check verdicts.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crossway/property_logic.h"

namespace crossway {

/// Error raised when monitoring cannot proceed (empty trace, state explosion,
/// or a formula that is not ground).
class MonitorError : public std::runtime_error {
 public:
  explicit MonitorError(const std::string& what) : std::runtime_error(what) {}
};

enum class Status { Pass, Fail, NotApplicable };

/// Why a verdict is NotApplicable.
///   RuleNotApplicable  — the unfolded formula is vacuously true on this map
///                        (for example a traffic-light rule on a stop map).
///   TriviallySatisfied — the run never exercised any guarded condition: the
///                        formula passed but no antecedent of any top-level
///                        `G (A -> C)` conjunct ever fired.
enum class NaReason { None, RuleNotApplicable, TriviallySatisfied };

std::string to_string(Status s);
std::string to_string(NaReason r);

struct Verdict {
  Status status = Status::Pass;
  NaReason na_reason = NaReason::None;
  /// Index of the tick whose consumption produced `false` (Fail only).
  std::optional<std::size_t> witness_tick;
  /// Number of distinct residual formulas seen while progressing.
  std::size_t automaton_states = 0;

  bool operator==(const Verdict&) const = default;
};

/// Result of the table-based evaluator.
struct OracleResult {
  bool holds = false;
  /// For every requested formula id: whether it was true at any tick.
  std::unordered_map<FormulaId, bool> ever_true;
};

/// Evaluates a ground formula over the whole trace by dynamic programming
/// (two-column table over the reachable subformula DAG, filled from the last
/// tick backwards).  `track` lists subformula ids whose per-trace
/// "true at some tick" bit should be reported.
OracleResult oracle_evaluate(const FormulaArena& arena, FormulaId root,
                             const GroundContext& ctx, const Trace& trace,
                             const std::vector<FormulaId>& track = {});

/// One concrete quantifier assignment that violates a property on a trace:
/// variable name paired with a display value (agent name, entrance vertex
/// name, or traffic-light id), plus the tick at which that instance fails.
struct ViolatingBinding {
  std::vector<std::pair<std::string, std::string>> binding;
  std::size_t witness_tick = 0;
};

/// Runtime monitor bound to one junction of a map.  Owns the formula arena in
/// which properties for this junction are built or parsed.
class Monitor {
 public:
  Monitor(const MapModel& map, std::size_t junction);

  FormulaArena& arena() { return arena_; }
  const FormulaArena& arena() const { return arena_; }

  /// Parses a property in the surface syntax (see parse_property).
  FormulaId property(const std::string& text);
  /// Interns one of the built-in junction rules (see builtin_property).
  FormulaId builtin(const std::string& name);

  /// Checks a quantified surface formula against a recorded trace using the
  /// progression engine.
  Verdict run(FormulaId surface, const Trace& trace);

  /// Same semantics, computed with the independent table evaluator.  Produces
  /// no witness tick and no state count.
  Verdict run_oracle(FormulaId surface, const Trace& trace);

  /// For a failed run: walks the leading universal quantifiers of `surface`,
  /// at each level instantiating the bound variable and descending into the
  /// value whose sub-formula fails earliest, and returns that fully
  /// instantiated assignment. The returned witness tick equals the overall
  /// run's witness. Formulas without a leading universal quantifier yield an
  /// empty binding list with just the witness tick. Empty optional when the
  /// run does not fail.
  std::optional<ViolatingBinding> violating_binding(FormulaId surface,
                                                    const Trace& trace);

  /// Residual-state budget before MonitorError is raised.
  static constexpr std::size_t kStateBudget = 1'000'000;

 private:
  GroundContext context_for(const Trace& trace) const;
  /// Progression-only check used by the binding descent: the tick at which
  /// `surface` fails, if it fails at a tick <= last_tick. Skips the
  /// NotApplicable analysis entirely.
  std::optional<std::size_t> fail_witness(FormulaId surface,
                                          const Trace& trace,
                                          std::size_t last_tick);
  /// Collects antecedents of top-level `G (A -> C)` conjuncts of `unfolded`.
  std::vector<FormulaId> guard_antecedents(FormulaId unfolded) const;
  /// Applies the NotApplicable analysis shared by both engines to a passing
  /// run: Pass stands only if some guard antecedent fired.
  Verdict finish_pass(FormulaId unfolded, const GroundContext& ctx,
                      const Trace& trace, std::size_t states) const;

  const MapModel* map_;
  std::size_t junction_;
  FormulaArena arena_;
};

}  // namespace crossway
