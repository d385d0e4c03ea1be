// Parser for the property language plus the built-in junction rules, which
// are themselves defined as property texts and parsed on demand.
#include "crossway/property_logic.h"

#include <cctype>
#include <unordered_map>
#include <utility>

namespace crossway {

namespace {

struct Token {
  enum Kind {
    Ident,
    LParen,
    RParen,
    Dot,
    Comma,
    Colon,
    Amp,
    Pipe,
    Bang,
    Arrow,
    EqEq,
    BangEq,
    Less,
    End,
  };
  Kind kind;
  std::string text;
  int line;
  int col;
};

[[noreturn]] void fail_at(const std::string& msg, int line, int col) {
  throw PropertyError(msg + " at " + std::to_string(line) + ":" +
                      std::to_string(col));
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::string t) {
    out.push_back({k, std::move(t), line, col});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_')) {
        ++j;
      }
      push(Token::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = [&](char second) {
      return i + 1 < text.size() && text[i + 1] == second;
    };
    switch (c) {
      case '(': push(Token::LParen, "("); break;
      case ')': push(Token::RParen, ")"); break;
      case '.': push(Token::Dot, "."); break;
      case ',': push(Token::Comma, ","); break;
      case ':': push(Token::Colon, ":"); break;
      case '&': push(Token::Amp, "&"); break;
      case '|': push(Token::Pipe, "|"); break;
      case '<': push(Token::Less, "<"); break;
      case '!':
        if (two('=')) {
          push(Token::BangEq, "!=");
          ++i;
          ++col;
        } else {
          push(Token::Bang, "!");
        }
        break;
      case '-':
        if (two('>')) {
          push(Token::Arrow, "->");
          ++i;
          ++col;
        } else {
          fail_at("stray '-'", line, col);
        }
        break;
      case '=':
        if (two('=')) {
          push(Token::EqEq, "==");
          ++i;
          ++col;
        } else {
          fail_at("stray '='", line, col);
        }
        break;
      default:
        fail_at(std::string("unexpected character '") + c + "'", line, col);
    }
    ++i;
    ++col;
  }
  out.push_back({Token::End, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(FormulaArena& arena, std::vector<Token> toks)
      : arena_(arena), toks_(std::move(toks)) {}

  FormulaId parse() {
    FormulaId f = formula();
    if (peek().kind != Token::End) {
      fail("trailing input after the formula", peek());
    }
    return f;
  }

 private:
  FormulaArena& arena_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, Domain> scope_;

  const Token& peek() const { return toks_[pos_]; }
  const Token& get() { return toks_[pos_++]; }
  bool accept(Token::Kind k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(Token::Kind k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what, peek());
    return get();
  }
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    fail_at(msg + (at.text.empty() ? "" : " before '" + at.text + "'"),
            at.line, at.col);
  }

  bool peek_ident(const char* word) const {
    return peek().kind == Token::Ident && peek().text == word;
  }

  FormulaId formula() {
    if (peek_ident("forall") || peek_ident("exists")) {
      const bool universal = get().text == "forall";
      const Token& name = expect(Token::Ident, "a variable name");
      expect(Token::Colon, "':'");
      const Token& dom = expect(Token::Ident, "a domain name");
      Domain d;
      if (dom.text == "agent") {
        d = Domain::Agent;
      } else if (dom.text == "entrance") {
        d = Domain::Entrance;
      } else if (dom.text == "light") {
        d = Domain::Light;
      } else {
        fail("unknown domain '" + dom.text + "'", dom);
      }
      expect(Token::Dot, "'.'");
      auto shadowed = scope_.find(name.text) != scope_.end()
                          ? std::optional<Domain>(scope_[name.text])
                          : std::nullopt;
      scope_[name.text] = d;
      FormulaId body = formula();
      if (shadowed) {
        scope_[name.text] = *shadowed;
      } else {
        scope_.erase(name.text);
      }
      return universal ? arena_.forall(name.text, d, body)
                       : arena_.exists(name.text, d, body);
    }
    return implies_level();
  }

  FormulaId implies_level() {
    FormulaId l = or_level();
    if (accept(Token::Arrow)) {
      return arena_.implies(l, implies_level());  // right associative
    }
    return l;
  }

  FormulaId or_level() {
    FormulaId l = and_level();
    while (accept(Token::Pipe)) l = arena_.disj(l, and_level());
    return l;
  }

  FormulaId and_level() {
    FormulaId l = until_level();
    while (accept(Token::Amp)) l = arena_.conj(l, until_level());
    return l;
  }

  FormulaId until_level() {
    FormulaId l = unary();
    if (peek_ident("U")) {
      get();
      return arena_.until(l, until_level());  // right associative
    }
    return l;
  }

  FormulaId unary() {
    if (accept(Token::Bang)) return arena_.negation(unary());
    if (peek_ident("G")) {
      get();
      return arena_.globally(unary());
    }
    if (peek_ident("F")) {
      get();
      return arena_.eventually(unary());
    }
    if (peek_ident("X") || peek_ident("N")) {
      get();
      return arena_.next(unary());
    }
    return primary();
  }

  std::pair<Term, Domain> bound_var() {
    const Token& name = expect(Token::Ident, "a variable name");
    auto it = scope_.find(name.text);
    if (it == scope_.end()) {
      fail("unbound variable '" + name.text + "'", name);
    }
    return {Term::variable(name.text), it->second};
  }

  Term typed_var(Domain expected, const char* role) {
    const Token& at = peek();
    auto [term, domain] = bound_var();
    if (domain != expected) {
      fail(std::string("expected ") + role + " but '" + term.var +
               "' has domain " + to_string(domain),
           at);
    }
    return term;
  }

  Turn direction() {
    const Token& t = expect(Token::Ident, "a direction");
    auto d = turn_from_string(t.text);
    if (!d) fail("unknown direction '" + t.text + "'", t);
    return *d;
  }

  LightColor colorword() {
    const Token& t = expect(Token::Ident, "a color");
    auto c = light_color_from_string(t.text);
    if (!c) fail("unknown color '" + t.text + "'", t);
    return *c;
  }

  FormulaId primary() {
    if (accept(Token::LParen)) {
      FormulaId f = formula();
      expect(Token::RParen, "')'");
      return f;
    }
    const Token& t = peek();
    if (t.kind != Token::Ident) fail("expected a formula", t);

    if (t.text == "true") {
      get();
      return arena_.truth(true);
    }
    if (t.text == "false") {
      get();
      return arena_.truth(false);
    }
    if (t.text == "at") {
      get();
      expect(Token::LParen, "'('");
      const Token& first = peek();
      auto [subject, domain] = bound_var();
      expect(Token::Comma, "','");
      if (peek_ident("J")) {
        get();
        expect(Token::RParen, "')'");
        if (domain != Domain::Agent) {
          fail("at(x, J) needs an agent variable", first);
        }
        return arena_.at_junction(subject);
      }
      Term place = typed_var(Domain::Entrance, "an entrance variable");
      expect(Token::RParen, "')'");
      if (domain == Domain::Agent) return arena_.at_entrance(subject, place);
      if (domain == Domain::Light) return arena_.light_at(subject, place);
      fail("at(x, e) needs an agent or light variable", first);
    }
    if (t.text == "turn") {
      get();
      expect(Token::LParen, "'('");
      Term a = typed_var(Domain::Agent, "an agent variable");
      expect(Token::Comma, "','");
      Turn d = direction();
      expect(Token::RParen, "')'");
      return arena_.turn_is(a, d);
    }
    if (t.text == "wt") {
      get();
      expect(Token::LParen, "'('");
      Term a = typed_var(Domain::Agent, "an agent variable");
      expect(Token::RParen, "')'");
      bool eq;
      if (accept(Token::EqEq)) {
        eq = true;
      } else if (accept(Token::Less)) {
        eq = false;
      } else {
        fail("expected '==' or '<' after wt(...)", peek());
      }
      if (!peek_ident("wt")) fail("expected wt(...) on the right", peek());
      get();
      expect(Token::LParen, "'('");
      Term b = typed_var(Domain::Agent, "an agent variable");
      expect(Token::RParen, "')'");
      return eq ? arena_.wt_eq(a, b) : arena_.wt_lt(a, b);
    }
    if (t.text == "color") {
      get();
      expect(Token::LParen, "'('");
      Term lt = typed_var(Domain::Light, "a light variable");
      expect(Token::RParen, "')'");
      expect(Token::EqEq, "'=='");
      return arena_.light_is(lt, colorword());
    }
    if (t.text == "rightof" || t.text == "opposite") {
      const bool is_right = t.text == "rightof";
      get();
      expect(Token::LParen, "'('");
      Term a = typed_var(Domain::Entrance, "an entrance variable");
      expect(Token::Comma, "','");
      Term b = typed_var(Domain::Entrance, "an entrance variable");
      expect(Token::RParen, "')'");
      return is_right ? arena_.right_of(a, b) : arena_.opposite(a, b);
    }
    if (t.text == "take") {
      get();
      expect(Token::LParen, "'('");
      Term a = typed_var(Domain::Agent, "an agent variable");
      expect(Token::Comma, "','");
      Term e = typed_var(Domain::Entrance, "an entrance variable");
      expect(Token::Comma, "','");
      Turn d = direction();
      expect(Token::RParen, "')'");
      return arena_.take(a, e, d);
    }

    // A bare variable can only start an agent-identity atom: a != b.
    auto [a, domain] = bound_var();
    if (domain != Domain::Agent) {
      fail("expected a formula, found variable '" + a.var + "'", t);
    }
    expect(Token::BangEq, "'!='");
    Term b = typed_var(Domain::Agent, "an agent variable");
    return arena_.agents_ne(a, b);
  }
};

const std::vector<std::pair<std::string, std::string>>& builtin_table() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"p1",
       "forall a:agent. forall b:agent. "
       "G ((at(a, J) & a != b) -> !at(b, J))"},
      {"p2",
       "forall e:entrance. forall f:entrance. forall a:agent. "
       "forall b:agent. "
       "G ((at(a, e) & at(b, f) & wt(a) == wt(b) & rightof(e, f)) -> "
       "((X at(b, f)) U at(a, J)))"},
      {"p3",
       "forall e:entrance. forall f:entrance. forall a:agent. "
       "forall b:agent. "
       "G ((at(a, e) & at(b, f) & wt(a) < wt(b)) -> "
       "((X at(a, e)) U at(b, J)))"},
      {"p4",
       "forall e:entrance. forall a:agent. forall lt:light. "
       "G ((at(a, e) & at(lt, e) & color(lt) == red & !take(a, e, right)) -> "
       "(at(a, e) U color(lt) == green))"},
      {"p5",
       "forall e:entrance. forall f:entrance. forall a:agent. "
       "forall b:agent. forall lt:light. "
       "G ((at(a, e) & at(b, f) & rightof(e, f) & at(lt, e) & "
       "color(lt) == red & take(a, e, right)) -> "
       "((X at(a, e)) U at(b, J)))"},
      {"p6",
       "forall e:entrance. forall f:entrance. forall a:agent. "
       "forall b:agent. "
       "G ((at(a, e) & at(b, f) & opposite(e, f) & take(a, e, left) & "
       "!take(b, f, left)) -> ((X at(a, e)) U at(b, J)))"},
  };
  return table;
}

}  // namespace

FormulaId parse_property(FormulaArena& arena, const std::string& text) {
  return Parser(arena, lex(text)).parse();
}

const std::string& builtin_property_text(const std::string& name) {
  for (const auto& [key, text] : builtin_table()) {
    if (key == name) return text;
  }
  throw PropertyError("unknown built-in property '" + name + "'");
}

FormulaId builtin_property(FormulaArena& arena, const std::string& name) {
  return parse_property(arena, builtin_property_text(name));
}

const std::vector<std::string>& builtin_property_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [key, text] : builtin_table()) out.push_back(key);
    return out;
  }();
  return names;
}

}  // namespace crossway
