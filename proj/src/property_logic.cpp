#include "crossway/property_logic.h"

#include <algorithm>
#include <cmath>
#include <functional>

namespace crossway {

const char* to_string(Domain d) {
  switch (d) {
    case Domain::Agent: return "agent";
    case Domain::Entrance: return "entrance";
    case Domain::Light: return "light";
  }
  return "?";
}

namespace {

std::size_t combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

std::size_t hash_term(const Term& t) {
  return combine(std::hash<std::string>{}(t.var), t.index);
}

}  // namespace

std::size_t FormulaArena::NodeHash::operator()(const FormulaNode& n) const {
  std::size_t h = static_cast<std::size_t>(n.kind);
  h = combine(h, hash_term(n.x));
  h = combine(h, hash_term(n.y));
  h = combine(h, static_cast<std::size_t>(n.turn));
  h = combine(h, static_cast<std::size_t>(n.color));
  h = combine(h, n.a);
  h = combine(h, n.b);
  h = combine(h, std::hash<std::string>{}(n.var));
  h = combine(h, static_cast<std::size_t>(n.domain));
  return h;
}

FormulaArena::FormulaArena() {
  FormulaNode t;
  t.kind = FormulaKind::True;
  true_id_ = intern(std::move(t));
  FormulaNode f;
  f.kind = FormulaKind::False;
  false_id_ = intern(std::move(f));
}

FormulaId FormulaArena::intern(FormulaNode n) {
  auto it = index_.find(n);
  if (it != index_.end()) return it->second;
  FormulaId id = static_cast<FormulaId>(nodes_.size());
  nodes_.push_back(n);
  index_.emplace(std::move(n), id);
  return id;
}

FormulaId FormulaArena::at_entrance(Term agent, Term entrance) {
  FormulaNode n;
  n.kind = FormulaKind::AtEntrance;
  n.x = std::move(agent);
  n.y = std::move(entrance);
  return intern(std::move(n));
}

FormulaId FormulaArena::at_junction(Term agent) {
  FormulaNode n;
  n.kind = FormulaKind::AtJunction;
  n.x = std::move(agent);
  return intern(std::move(n));
}

FormulaId FormulaArena::turn_is(Term agent, Turn d) {
  FormulaNode n;
  n.kind = FormulaKind::TurnIs;
  n.x = std::move(agent);
  n.turn = d;
  return intern(std::move(n));
}

FormulaId FormulaArena::wt_eq(Term a, Term b) {
  FormulaNode n;
  n.kind = FormulaKind::WtEq;
  n.x = std::move(a);
  n.y = std::move(b);
  return intern(std::move(n));
}

FormulaId FormulaArena::wt_lt(Term a, Term b) {
  if (a == b) return truth(false);  // strictly-less is irreflexive
  FormulaNode n;
  n.kind = FormulaKind::WtLt;
  n.x = std::move(a);
  n.y = std::move(b);
  return intern(std::move(n));
}

FormulaId FormulaArena::light_is(Term light, LightColor c) {
  FormulaNode n;
  n.kind = FormulaKind::LightIs;
  n.x = std::move(light);
  n.color = c;
  return intern(std::move(n));
}

FormulaId FormulaArena::light_at(Term light, Term entrance) {
  FormulaNode n;
  n.kind = FormulaKind::LightAt;
  n.x = std::move(light);
  n.y = std::move(entrance);
  return intern(std::move(n));
}

FormulaId FormulaArena::right_of(Term a, Term b) {
  if (a == b) return truth(false);
  FormulaNode n;
  n.kind = FormulaKind::RightOf;
  n.x = std::move(a);
  n.y = std::move(b);
  return intern(std::move(n));
}

FormulaId FormulaArena::opposite(Term a, Term b) {
  if (a == b) return truth(false);
  FormulaNode n;
  n.kind = FormulaKind::Opposite;
  n.x = std::move(a);
  n.y = std::move(b);
  return intern(std::move(n));
}

FormulaId FormulaArena::agents_ne(Term a, Term b) {
  if (a == b) return truth(false);
  if (!a.is_var() && !b.is_var()) return truth(a.index != b.index);
  FormulaNode n;
  n.kind = FormulaKind::AgentNe;
  n.x = std::move(a);
  n.y = std::move(b);
  return intern(std::move(n));
}

FormulaId FormulaArena::negation(FormulaId a) {
  if (a == true_id_) return false_id_;
  if (a == false_id_) return true_id_;
  if (node(a).kind == FormulaKind::Not) return node(a).a;
  FormulaNode n;
  n.kind = FormulaKind::Not;
  n.a = a;
  return intern(std::move(n));
}

FormulaId FormulaArena::conj(FormulaId a, FormulaId b) {
  if (a == false_id_ || b == false_id_) return false_id_;
  if (a == true_id_) return b;
  if (b == true_id_) return a;
  if (a == b) return a;
  if (a > b) std::swap(a, b);
  FormulaNode n;
  n.kind = FormulaKind::And;
  n.a = a;
  n.b = b;
  return intern(std::move(n));
}

FormulaId FormulaArena::disj(FormulaId a, FormulaId b) {
  if (a == true_id_ || b == true_id_) return true_id_;
  if (a == false_id_) return b;
  if (b == false_id_) return a;
  if (a == b) return a;
  if (a > b) std::swap(a, b);
  FormulaNode n;
  n.kind = FormulaKind::Or;
  n.a = a;
  n.b = b;
  return intern(std::move(n));
}

FormulaId FormulaArena::implies(FormulaId a, FormulaId b) {
  if (a == false_id_ || b == true_id_) return true_id_;
  if (a == true_id_) return b;
  if (b == false_id_) return negation(a);
  if (a == b) return true_id_;
  FormulaNode n;
  n.kind = FormulaKind::Implies;
  n.a = a;
  n.b = b;
  return intern(std::move(n));
}

FormulaId FormulaArena::next(FormulaId a) {
  // No folding: on finite traces even (X true) is false at the last tick.
  FormulaNode n;
  n.kind = FormulaKind::Next;
  n.a = a;
  return intern(std::move(n));
}

FormulaId FormulaArena::until(FormulaId a, FormulaId b) {
  if (b == true_id_) return true_id_;
  if (b == false_id_) return false_id_;
  if (a == false_id_) return b;  // right side must hold immediately
  if (a == b) return a;
  FormulaNode n;
  n.kind = FormulaKind::Until;
  n.a = a;
  n.b = b;
  return intern(std::move(n));
}

FormulaId FormulaArena::globally(FormulaId a) {
  if (a == true_id_ || a == false_id_) return a;
  if (node(a).kind == FormulaKind::Globally) return a;
  FormulaNode n;
  n.kind = FormulaKind::Globally;
  n.a = a;
  return intern(std::move(n));
}

FormulaId FormulaArena::eventually(FormulaId a) { return until(true_id_, a); }

FormulaId FormulaArena::forall(std::string var, Domain d, FormulaId body) {
  // forall x. true is true over any domain, including the empty one.
  if (body == true_id_) return true_id_;
  FormulaNode n;
  n.kind = FormulaKind::Forall;
  n.var = std::move(var);
  n.domain = d;
  n.a = body;
  return intern(std::move(n));
}

FormulaId FormulaArena::exists(std::string var, Domain d, FormulaId body) {
  if (body == false_id_) return false_id_;
  FormulaNode n;
  n.kind = FormulaKind::Exists;
  n.var = std::move(var);
  n.domain = d;
  n.a = body;
  return intern(std::move(n));
}

FormulaId FormulaArena::take(Term agent, Term entrance, Turn d) {
  FormulaId here = at_entrance(agent, entrance);
  FormulaId crossed = conj(at_junction(agent), turn_is(agent, d));
  return conj(here, until(here, crossed));
}

namespace {

std::string term_string(const Term& t) {
  if (t.is_var()) return t.var;
  return "#" + std::to_string(t.index);
}

}  // namespace

std::string FormulaArena::to_string(FormulaId id) const {
  const FormulaNode& n = node(id);
  switch (n.kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::AtEntrance:
    case FormulaKind::LightAt:
      return "at(" + term_string(n.x) + ", " + term_string(n.y) + ")";
    case FormulaKind::AtJunction:
      return "at(" + term_string(n.x) + ", J)";
    case FormulaKind::TurnIs:
      return "turn(" + term_string(n.x) + ", " +
             std::string(crossway::to_string(n.turn)) + ")";
    case FormulaKind::WtEq:
      return "wt(" + term_string(n.x) + ") == wt(" + term_string(n.y) + ")";
    case FormulaKind::WtLt:
      return "wt(" + term_string(n.x) + ") < wt(" + term_string(n.y) + ")";
    case FormulaKind::LightIs:
      return "color(" + term_string(n.x) + ") == " +
             std::string(crossway::to_string(n.color));
    case FormulaKind::RightOf:
      return "rightof(" + term_string(n.x) + ", " + term_string(n.y) + ")";
    case FormulaKind::Opposite:
      return "opposite(" + term_string(n.x) + ", " + term_string(n.y) + ")";
    case FormulaKind::AgentNe:
      return term_string(n.x) + " != " + term_string(n.y);
    case FormulaKind::Not: return "!" + to_string(n.a);
    case FormulaKind::And:
      return "(" + to_string(n.a) + " & " + to_string(n.b) + ")";
    case FormulaKind::Or:
      return "(" + to_string(n.a) + " | " + to_string(n.b) + ")";
    case FormulaKind::Implies:
      return "(" + to_string(n.a) + " -> " + to_string(n.b) + ")";
    case FormulaKind::Next: return "(X " + to_string(n.a) + ")";
    case FormulaKind::Until:
      return "(" + to_string(n.a) + " U " + to_string(n.b) + ")";
    case FormulaKind::Globally: return "(G " + to_string(n.a) + ")";
    case FormulaKind::Forall:
      return "forall " + n.var + ":" +
             std::string(crossway::to_string(n.domain)) + ". " +
             to_string(n.a);
    case FormulaKind::Exists:
      return "exists " + n.var + ":" +
             std::string(crossway::to_string(n.domain)) + ". " +
             to_string(n.a);
  }
  return "?";
}

GroundContext GroundContext::for_junction(const MapModel& map,
                                          std::size_t junction,
                                          std::uint32_t agent_count) {
  GroundContext ctx;
  ctx.map = &map;
  ctx.junction = junction;
  ctx.agent_count = agent_count;
  const auto& entrances = map.junctions().at(junction).entrances;
  auto lights = map.objects_of(MapObject::Kind::TrafficLight);
  for (std::uint32_t i = 0; i < lights.size(); ++i) {
    VertexId en = map.guarded_entrance(*lights[i]);
    if (std::find(entrances.begin(), entrances.end(), en) !=
        entrances.end()) {
      ctx.lights.push_back(i);
    }
  }
  return ctx;
}

namespace {

struct Binding {
  Domain domain;
  std::uint32_t value;
};

using Env = std::unordered_map<std::string, Binding>;

std::uint32_t resolve(const Term& t, Domain expected, const Env& env) {
  if (!t.is_var()) return t.index;
  auto it = env.find(t.var);
  if (it == env.end()) {
    throw PropertyError("unbound variable '" + t.var + "'");
  }
  if (it->second.domain != expected) {
    throw PropertyError("variable '" + t.var + "' has domain " +
                        to_string(it->second.domain) + " but is used as " +
                        to_string(expected));
  }
  return it->second.value;
}

FormulaId unfold_rec(FormulaArena& arena, FormulaId id,
                     const GroundContext& ctx, Env& env) {
  // Copy: interning below may grow the arena and invalidate references.
  const FormulaNode n = arena.node(id);
  switch (n.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      return id;
    case FormulaKind::AtEntrance:
      return arena.at_entrance(
          Term::concrete(resolve(n.x, Domain::Agent, env)),
          Term::concrete(resolve(n.y, Domain::Entrance, env)));
    case FormulaKind::AtJunction:
      return arena.at_junction(
          Term::concrete(resolve(n.x, Domain::Agent, env)));
    case FormulaKind::TurnIs:
      return arena.turn_is(Term::concrete(resolve(n.x, Domain::Agent, env)),
                           n.turn);
    case FormulaKind::WtEq:
      return arena.wt_eq(Term::concrete(resolve(n.x, Domain::Agent, env)),
                         Term::concrete(resolve(n.y, Domain::Agent, env)));
    case FormulaKind::WtLt:
      return arena.wt_lt(Term::concrete(resolve(n.x, Domain::Agent, env)),
                         Term::concrete(resolve(n.y, Domain::Agent, env)));
    case FormulaKind::LightIs:
      return arena.light_is(Term::concrete(resolve(n.x, Domain::Light, env)),
                            n.color);
    case FormulaKind::LightAt: {
      std::uint32_t light = resolve(n.x, Domain::Light, env);
      VertexId en = resolve(n.y, Domain::Entrance, env);
      auto lights = ctx.map->objects_of(MapObject::Kind::TrafficLight);
      bool guards = light < lights.size() &&
                    ctx.map->guarded_entrance(*lights[light]) == en;
      return arena.truth(guards);
    }
    case FormulaKind::RightOf:
      return arena.truth(
          ctx.map->right_of(resolve(n.x, Domain::Entrance, env),
                            resolve(n.y, Domain::Entrance, env)));
    case FormulaKind::Opposite:
      return arena.truth(
          ctx.map->opposite(resolve(n.x, Domain::Entrance, env),
                            resolve(n.y, Domain::Entrance, env)));
    case FormulaKind::AgentNe:
      return arena.truth(resolve(n.x, Domain::Agent, env) !=
                         resolve(n.y, Domain::Agent, env));
    case FormulaKind::Not:
      return arena.negation(unfold_rec(arena, n.a, ctx, env));
    case FormulaKind::And:
      return arena.conj(unfold_rec(arena, n.a, ctx, env),
                        unfold_rec(arena, n.b, ctx, env));
    case FormulaKind::Or:
      return arena.disj(unfold_rec(arena, n.a, ctx, env),
                        unfold_rec(arena, n.b, ctx, env));
    case FormulaKind::Implies:
      return arena.implies(unfold_rec(arena, n.a, ctx, env),
                           unfold_rec(arena, n.b, ctx, env));
    case FormulaKind::Next:
      return arena.next(unfold_rec(arena, n.a, ctx, env));
    case FormulaKind::Until:
      return arena.until(unfold_rec(arena, n.a, ctx, env),
                         unfold_rec(arena, n.b, ctx, env));
    case FormulaKind::Globally:
      return arena.globally(unfold_rec(arena, n.a, ctx, env));
    case FormulaKind::Forall: {
      FormulaId acc = arena.truth(true);
      for (std::uint32_t v : domain_values(n.domain, ctx)) {
        auto saved = env.find(n.var) != env.end()
                         ? std::optional<Binding>(env[n.var])
                         : std::nullopt;
        env[n.var] = Binding{n.domain, v};
        acc = arena.conj(acc, unfold_rec(arena, n.a, ctx, env));
        if (saved) {
          env[n.var] = *saved;
        } else {
          env.erase(n.var);
        }
      }
      return acc;
    }
    case FormulaKind::Exists: {
      FormulaId acc = arena.truth(false);
      for (std::uint32_t v : domain_values(n.domain, ctx)) {
        auto saved = env.find(n.var) != env.end()
                         ? std::optional<Binding>(env[n.var])
                         : std::nullopt;
        env[n.var] = Binding{n.domain, v};
        acc = arena.disj(acc, unfold_rec(arena, n.a, ctx, env));
        if (saved) {
          env[n.var] = *saved;
        } else {
          env.erase(n.var);
        }
      }
      return acc;
    }
  }
  throw PropertyError("unknown formula node");
}

}  // namespace

std::vector<std::uint32_t> domain_values(Domain d, const GroundContext& ctx) {
  std::vector<std::uint32_t> out;
  switch (d) {
    case Domain::Agent:
      for (std::uint32_t i = 0; i < ctx.agent_count; ++i) out.push_back(i);
      break;
    case Domain::Entrance:
      for (VertexId v : ctx.map->junctions().at(ctx.junction).entrances) {
        out.push_back(v);
      }
      break;
    case Domain::Light:
      out = ctx.lights;
      break;
  }
  return out;
}

FormulaId unfold(FormulaArena& arena, FormulaId id, const GroundContext& ctx) {
  Env env;
  return unfold_rec(arena, id, ctx, env);
}

FormulaId substitute(FormulaArena& arena, FormulaId id, const std::string& var,
                     std::uint32_t value) {
  // Copy: interning below may grow the arena and invalidate references.
  const FormulaNode n = arena.node(id);
  auto sub = [&](const Term& t) {
    return t.is_var() && t.var == var ? Term::concrete(value) : t;
  };
  switch (n.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      return id;
    case FormulaKind::AtEntrance:
      return arena.at_entrance(sub(n.x), sub(n.y));
    case FormulaKind::AtJunction:
      return arena.at_junction(sub(n.x));
    case FormulaKind::TurnIs:
      return arena.turn_is(sub(n.x), n.turn);
    case FormulaKind::WtEq:
      return arena.wt_eq(sub(n.x), sub(n.y));
    case FormulaKind::WtLt:
      return arena.wt_lt(sub(n.x), sub(n.y));
    case FormulaKind::LightIs:
      return arena.light_is(sub(n.x), n.color);
    case FormulaKind::LightAt:
      return arena.light_at(sub(n.x), sub(n.y));
    case FormulaKind::RightOf:
      return arena.right_of(sub(n.x), sub(n.y));
    case FormulaKind::Opposite:
      return arena.opposite(sub(n.x), sub(n.y));
    case FormulaKind::AgentNe:
      return arena.agents_ne(sub(n.x), sub(n.y));
    case FormulaKind::Not:
      return arena.negation(substitute(arena, n.a, var, value));
    case FormulaKind::And:
      return arena.conj(substitute(arena, n.a, var, value),
                        substitute(arena, n.b, var, value));
    case FormulaKind::Or:
      return arena.disj(substitute(arena, n.a, var, value),
                        substitute(arena, n.b, var, value));
    case FormulaKind::Implies:
      return arena.implies(substitute(arena, n.a, var, value),
                           substitute(arena, n.b, var, value));
    case FormulaKind::Next:
      return arena.next(substitute(arena, n.a, var, value));
    case FormulaKind::Until:
      return arena.until(substitute(arena, n.a, var, value),
                         substitute(arena, n.b, var, value));
    case FormulaKind::Globally:
      return arena.globally(substitute(arena, n.a, var, value));
    case FormulaKind::Forall:
      if (n.var == var) return id;  // shadowed below this binder
      return arena.forall(n.var, n.domain, substitute(arena, n.a, var, value));
    case FormulaKind::Exists:
      if (n.var == var) return id;  // shadowed below this binder
      return arena.exists(n.var, n.domain, substitute(arena, n.a, var, value));
  }
  throw PropertyError("unknown formula node");
}

bool is_ground(const FormulaArena& arena, FormulaId id) {
  const FormulaNode& n = arena.node(id);
  switch (n.kind) {
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return false;
    case FormulaKind::True:
    case FormulaKind::False:
      return true;
    case FormulaKind::AtEntrance:
    case FormulaKind::LightAt:
    case FormulaKind::WtEq:
    case FormulaKind::WtLt:
    case FormulaKind::RightOf:
    case FormulaKind::Opposite:
    case FormulaKind::AgentNe:
      return !n.x.is_var() && !n.y.is_var();
    case FormulaKind::AtJunction:
    case FormulaKind::TurnIs:
    case FormulaKind::LightIs:
      return !n.x.is_var();
    case FormulaKind::Not:
    case FormulaKind::Next:
    case FormulaKind::Globally:
      return is_ground(arena, n.a);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Until:
      return is_ground(arena, n.a) && is_ground(arena, n.b);
  }
  return false;
}

bool is_dynamic_atom(FormulaKind k) {
  switch (k) {
    case FormulaKind::AtEntrance:
    case FormulaKind::AtJunction:
    case FormulaKind::TurnIs:
    case FormulaKind::WtEq:
    case FormulaKind::WtLt:
    case FormulaKind::LightIs:
      return true;
    default:
      return false;
  }
}

bool eval_atom(const FormulaArena& arena, FormulaId id,
               const GroundContext& ctx, const Trace& trace,
               const WorldState& state) {
  const FormulaNode& n = arena.node(id);
  auto agent = [&](const Term& t) -> std::pair<const AgentMeta&,
                                               const AgentSnapshot&> {
    return {trace.agents().at(t.index), state.agents.at(t.index)};
  };
  switch (n.kind) {
    case FormulaKind::AtEntrance: {
      auto [meta, snap] = agent(n.x);
      return at_entrance(*ctx.map, meta, snap,
                         static_cast<VertexId>(n.y.index));
    }
    case FormulaKind::AtJunction: {
      auto [meta, snap] = agent(n.x);
      return in_junction(*ctx.map, meta, snap, ctx.junction);
    }
    case FormulaKind::TurnIs: {
      auto [meta, snap] = agent(n.x);
      return next_junction_turn(*ctx.map, meta, snap) == n.turn;
    }
    case FormulaKind::WtEq:
    case FormulaKind::WtLt: {
      const AgentSnapshot& a = state.agents.at(n.x.index);
      const AgentSnapshot& b = state.agents.at(n.y.index);
      // "Arrived at the same time / earlier" compares accumulated waiting:
      // only meaningful between two vehicles that are both standing still.
      if (!a.active || !b.active) return false;
      if (!agent_stopped(a) || !agent_stopped(b)) return false;
      if (!(a.waiting_s > 0.0) || !(b.waiting_s > 0.0)) return false;
      const double tol = trace.delta_t() / 2.0;
      if (n.kind == FormulaKind::WtEq) {
        return std::fabs(a.waiting_s - b.waiting_s) <= tol;
      }
      return a.waiting_s < b.waiting_s - tol;
    }
    case FormulaKind::LightIs:
      return state.lights.at(n.x.index) == n.color;
    default:
      throw PropertyError("eval_atom on a non-atom node");
  }
}

}  // namespace crossway
