// property_logic.h — first-order finite-trace LTL over the junction
// predicates: a hash-consed formula arena, a textual property language with
// a parser, the built-in junction rules p1..p6, quantifier unfolding against
// a concrete map and agent set, and evaluation of ground atoms on world
// states.
#pragma once

#include "crossway/semantic_state.h"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace crossway {

/// Raised for malformed property texts and ill-typed formulas.
class PropertyError : public std::runtime_error {
 public:
  explicit PropertyError(const std::string& what)
      : std::runtime_error(what) {}
};

enum class FormulaKind : std::uint8_t {
  // Constants.
  True,
  False,
  // Atoms evaluated on a world state (ground terms only).
  AtEntrance,  // x: agent, y: entrance
  AtJunction,  // x: agent (the context junction)
  TurnIs,      // x: agent, turn
  WtEq,        // x, y: agents, equal waiting time
  WtLt,        // x, y: agents, x waited strictly less than y
  LightIs,     // x: light, color
  // Static atoms: collapse to constants during unfolding.
  LightAt,   // x: light, y: entrance — the light guards that entrance
  RightOf,   // x, y: entrances
  Opposite,  // x, y: entrances
  AgentNe,   // x, y: agents — distinct identity
  // Connectives.
  Not,
  And,
  Or,
  Implies,
  // Temporal operators (finite-trace semantics).
  Next,      // strong: false at the last tick
  Until,     // strong: the right side must eventually hold
  Globally,  // weak: holds on an exhausted suffix
  // Quantifiers (surface formulas only; removed by unfolding).
  Forall,
  Exists,
};

/// Variable domains a quantifier can range over.
enum class Domain : std::uint8_t { Agent, Entrance, Light };

const char* to_string(Domain d);

/// An atom operand: either a bound variable (surface formulas) or a concrete
/// index — agent index, entrance vertex id, or traffic-light index — whose
/// meaning follows from the atom kind.
struct Term {
  std::string var;          // non-empty for variables
  std::uint32_t index = 0;  // concrete value otherwise

  bool is_var() const { return !var.empty(); }
  static Term variable(std::string name) { return {std::move(name), 0}; }
  static Term concrete(std::uint32_t index) { return {{}, index}; }

  friend bool operator==(const Term&, const Term&) = default;
};

using FormulaId = std::uint32_t;

/// Interned formula node. Children are ids into the owning arena, so
/// structurally equal formulas share one id.
struct FormulaNode {
  FormulaKind kind = FormulaKind::True;
  Term x, y;                          // atom operands
  Turn turn = Turn::Straight;         // TurnIs
  LightColor color = LightColor::Red; // LightIs
  FormulaId a = 0, b = 0;             // children
  std::string var;                    // quantified variable
  Domain domain = Domain::Agent;      // quantifier domain

  friend bool operator==(const FormulaNode&, const FormulaNode&) = default;
};

/// Owns and interns formula nodes. Constructors fold constants and
/// canonicalize commutative connectives (children ordered by id), so equal
/// formulas get equal ids and progression states stay small.
class FormulaArena {
 public:
  FormulaArena();

  FormulaId truth(bool v) const { return v ? true_id_ : false_id_; }

  FormulaId at_entrance(Term agent, Term entrance);
  FormulaId at_junction(Term agent);
  FormulaId turn_is(Term agent, Turn d);
  FormulaId wt_eq(Term a, Term b);
  FormulaId wt_lt(Term a, Term b);
  FormulaId light_is(Term light, LightColor c);
  FormulaId light_at(Term light, Term entrance);
  FormulaId right_of(Term a, Term b);
  FormulaId opposite(Term a, Term b);
  FormulaId agents_ne(Term a, Term b);

  FormulaId negation(FormulaId a);
  FormulaId conj(FormulaId a, FormulaId b);
  FormulaId disj(FormulaId a, FormulaId b);
  FormulaId implies(FormulaId a, FormulaId b);
  FormulaId next(FormulaId a);
  FormulaId until(FormulaId a, FormulaId b);
  FormulaId globally(FormulaId a);
  /// Sugar: eventually(a) == until(true, a).
  FormulaId eventually(FormulaId a);
  FormulaId forall(std::string var, Domain d, FormulaId body);
  FormulaId exists(std::string var, Domain d, FormulaId body);

  /// The take macro: agent at the entrance, and at the entrance until it is
  /// inside the junction heading in direction `d`.
  FormulaId take(Term agent, Term entrance, Turn d);

  const FormulaNode& node(FormulaId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  /// Fully parenthesized canonical rendering (diagnostics, tests).
  std::string to_string(FormulaId id) const;

 private:
  FormulaId intern(FormulaNode n);

  struct NodeHash {
    std::size_t operator()(const FormulaNode& n) const;
  };
  std::vector<FormulaNode> nodes_;
  std::unordered_map<FormulaNode, FormulaId, NodeHash> index_;
  FormulaId true_id_, false_id_;
};

/// Parses one property. Grammar sketch (binding loosest to tightest):
///   forall x:domain. φ | exists x:domain. φ      (body extends rightwards)
///   φ -> ψ      (right associative)
///   φ | ψ
///   φ & ψ
///   φ U ψ      (right associative)
///   !φ, G φ, F φ, X φ (N is a synonym for X)
///   atoms: at(a, J) | at(a, e) | at(lt, e) | turn(a, right|straight|left)
///          | wt(a) == wt(b) | wt(a) < wt(b) | color(lt) == red|yellow|green
///          | rightof(e, f) | opposite(e, f) | a != b
///          | take(a, e, right|straight|left) | true | false
/// Lines starting with # are comments. Variables must be bound by a
/// quantifier; atom argument domains are checked against the binders.
FormulaId parse_property(FormulaArena& arena, const std::string& text);

/// Built-in junction rules. p1..p3 guard stop junctions (mutual exclusion,
/// right-of-way on ties, first-come-first-served); p4..p6 guard traffic
/// light junctions (hold on red unless turning right, right-on-red yields
/// to the left arm, left turn on green gives way).
FormulaId builtin_property(FormulaArena& arena, const std::string& name);

/// The source text of a built-in (what builtin_property parses).
const std::string& builtin_property_text(const std::string& name);

/// Names of all built-ins, in order.
const std::vector<std::string>& builtin_property_names();

/// Everything needed to ground a surface formula: the map, which junction
/// the property speaks about, how many agents the run has, and which
/// traffic lights (indices into the map's traffic-light list, which is also
/// the trace's light order) guard this junction.
struct GroundContext {
  const MapModel* map = nullptr;
  std::size_t junction = 0;
  std::uint32_t agent_count = 0;
  std::vector<std::uint32_t> lights;

  /// Builds the context for a junction of `map` with all of the map's
  /// lights that guard one of its entrances.
  static GroundContext for_junction(const MapModel& map, std::size_t junction,
                                    std::uint32_t agent_count);
};

/// Replaces quantifiers by finite conjunctions/disjunctions over the context
/// domains and collapses static atoms (right-of, opposite, light placement,
/// agent identity) to constants. A universal quantifier over an empty domain
/// yields true. The result contains only constants, dynamic atoms,
/// connectives and temporal operators.
FormulaId unfold(FormulaArena& arena, FormulaId id, const GroundContext& ctx);

/// Replaces every free occurrence of variable `var` by the concrete index
/// `value`, respecting shadowing by inner quantifiers of the same name. Used
/// to instantiate one quantifier at a time when attributing a violation to a
/// specific binding.
FormulaId substitute(FormulaArena& arena, FormulaId id, const std::string& var,
                     std::uint32_t value);

/// The concrete values a quantifier over `d` ranges over in `ctx`: agent
/// indices, entrance vertex ids of the context junction, or the context's
/// traffic-light indices.
std::vector<std::uint32_t> domain_values(Domain d, const GroundContext& ctx);

/// True when the formula contains no variables and no quantifiers.
bool is_ground(const FormulaArena& arena, FormulaId id);

/// True for the state-atom kinds (evaluated by eval_atom).
bool is_dynamic_atom(FormulaKind k);

/// Evaluates a ground dynamic atom on one world state. Waiting-time
/// comparisons only hold between agents that are both standing still with
/// accumulated waiting time; they compare with half-tick tolerance so equal
/// tick counts compare equal.
bool eval_atom(const FormulaArena& arena, FormulaId id,
               const GroundContext& ctx, const Trace& trace,
               const WorldState& state);

}  // namespace crossway
