#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmn/links.hpp"
#include "lmn/printer.hpp"
#include "lmn/process.hpp"

namespace lmn {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

enum class Tok {
  Name,      // lowercase ident, number, quoted, module-qualified
  Link,      // Uppercase or _ ident
  Context,   // $name
  RuleCtx,   // @name
  RuleName,  // @@
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Period, Neck, Bar, Star, Eq, Plus, Minus,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
  bool glued = false;  // no whitespace before this token
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      bool ws = skip_space();
      Token t = next();
      t.glued = !ws;
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  bool skip_space() {
    bool any = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
        any = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        any = true;
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }
  void advance() {
    ++pos_;
    ++col_;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string ident() {
    std::string s;
    while (ident_char(peek())) {
      s += peek();
      advance();
    }
    return s;
  }

  Token next() {
    int line = line_, col = col_;
    auto make = [&](Tok k, std::string text = {}) { return Token{k, std::move(text), line, col}; };
    if (pos_ >= src_.size()) return make(Tok::End);
    char c = peek();
    auto u = static_cast<unsigned char>(c);
    if (std::islower(u)) {
      std::string s = ident();
      // module qualifier: `mell.copy` with no surrounding whitespace
      while (peek() == '.' && std::islower(static_cast<unsigned char>(peek(1)))) {
        advance();
        s += '.';
        s += ident();
      }
      return make(Tok::Name, s);
    }
    if (std::isdigit(u)) return make(Tok::Name, ident());
    if (std::isupper(u) || c == '_') return make(Tok::Link, ident());
    if (c == '\'') {
      advance();
      std::string s;
      while (true) {
        if (pos_ >= src_.size()) throw ParseError("unterminated quoted name", line, col);
        char d = peek();
        if (d == '\n') throw ParseError("newline in quoted name", line, col);
        advance();
        if (d == '\'') {
          if (peek() == '\'') {
            s += '\'';
            advance();
            continue;
          }
          break;
        }
        s += d;
      }
      return make(Tok::Name, s);
    }
    if (c == '$') {
      advance();
      std::string s = ident();
      if (s.empty()) throw ParseError("expected context name after '$'", line, col);
      return make(Tok::Context, s);
    }
    if (c == '@') {
      advance();
      if (peek() == '@') {
        advance();
        return make(Tok::RuleName);
      }
      std::string s = ident();
      if (s.empty()) throw ParseError("expected rule context name after '@'", line, col);
      return make(Tok::RuleCtx, s);
    }
    if (c == ':' && peek(1) == '-') {
      advance();
      advance();
      return make(Tok::Neck);
    }
    advance();
    switch (c) {
      case '(': return make(Tok::LParen);
      case ')': return make(Tok::RParen);
      case '{': return make(Tok::LBrace);
      case '}': return make(Tok::RBrace);
      case '[': return make(Tok::LBracket);
      case ']': return make(Tok::RBracket);
      case ',': return make(Tok::Comma);
      case '.': return make(Tok::Period);
      case '|': return make(Tok::Bar);
      case '*': return make(Tok::Star);
      case '=': return make(Tok::Eq);
      case '+': return make(Tok::Plus);
      case '-': return make(Tok::Minus);
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Raw syntax tree, already desugared: nested terms and membrane arguments
// have been flattened onto links named `~N`, which users cannot write.

struct RawArg {
  std::string name;
  bool bundle = false;
};

struct RawAtom {
  std::string functor;
  std::vector<RawArg> args;
  int line = 0, column = 0;
};

struct RawRule;
struct RawCell;

struct RawContext {
  std::string name;
  std::vector<RawArg> args;
  std::optional<std::string> bundle;
  bool open = false;
  int line = 0, column = 0;
};

struct RawProc {
  std::vector<RawAtom> atoms;
  std::vector<RawCell> cells;
  std::vector<RawContext> contexts;
  std::vector<std::string> rule_contexts;
  std::vector<std::shared_ptr<RawRule>> rules;
  int line = 0, column = 0;  // first token, for "context outside rule" errors

  void merge(RawProc&& other);
};

struct RawCell {
  std::string name;
  RawProc body;
};

struct RawRule {
  std::string name;
  RawProc lhs, rhs;
  int line = 0, column = 0;
};

inline void RawProc::merge(RawProc&& other) {
  for (auto& a : other.atoms) atoms.push_back(std::move(a));
  for (auto& c : other.cells) cells.push_back(std::move(c));
  for (auto& c : other.contexts) contexts.push_back(std::move(c));
  for (auto& r : other.rule_contexts) rule_contexts.push_back(std::move(r));
  for (auto& r : other.rules) rules.push_back(std::move(r));
}

struct RawItem {
  std::optional<RawRule> rule;
  RawProc proc;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<RawItem> program() {
    std::vector<RawItem> items;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Period) {
        next();
        continue;
      }
      items.push_back(item());
      if (peek().kind == Tok::End) break;
      expect(Tok::Period, "'.'");
    }
    return items;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what, peek());
    return next();
  }

  std::string fresh() { return "~" + std::to_string(counter_++); }

  static bool ends_sequence(Tok k) {
    return k == Tok::Period || k == Tok::RParen || k == Tok::RBrace || k == Tok::End || k == Tok::Neck;
  }

  // item := [name '@@'] seq [':-' seq]
  RawItem item() {
    RawItem it;
    const Token& start = peek();
    std::string rule_name;
    if (peek().kind == Tok::Name && peek(1).kind == Tok::RuleName) {
      rule_name = next().text;
      next();
    }
    RawProc head = sequence();
    head.line = start.line;
    head.column = start.column;
    if (peek().kind == Tok::Neck) {
      next();
      RawRule r;
      r.name = rule_name;
      r.lhs = std::move(head);
      r.rhs = sequence();
      r.line = start.line;
      r.column = start.column;
      it.rule = std::move(r);
    } else {
      if (!rule_name.empty()) fail("rule name without a rule", start);
      it.proc = std::move(head);
    }
    return it;
  }

  RawProc sequence() {
    RawProc p;
    if (ends_sequence(peek().kind)) return p;
    element(p);
    while (peek().kind == Tok::Comma) {
      next();
      if (ends_sequence(peek().kind)) break;  // trailing comma
      element(p);
    }
    return p;
  }

  // cell body: period- or comma-separated items, rules allowed
  RawProc cell_body() {
    RawProc p;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::Period) {
        next();
        continue;
      }
      RawItem it = item();
      if (it.rule) {
        p.rules.push_back(std::make_shared<RawRule>(std::move(*it.rule)));
      } else {
        p.merge(std::move(it.proc));
      }
      if (peek().kind == Tok::Period) continue;
      if (peek().kind != Tok::RBrace) fail("expected '}'", peek());
    }
    next();
    return p;
  }

  void element(RawProc& out) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        next();
        RawItem it = item();
        expect(Tok::RParen, "')'");
        if (it.rule) {
          out.rules.push_back(std::make_shared<RawRule>(std::move(*it.rule)));
        } else {
          out.merge(std::move(it.proc));
        }
        return;
      }
      case Tok::Context: out.contexts.push_back(context()); return;
      case Tok::RuleCtx: out.rule_contexts.push_back(next().text); return;
      case Tok::Plus:
      case Tok::Minus: {
        const Token& op = next();
        std::string link = argument(out).name;
        out.atoms.push_back({op.kind == Tok::Plus ? "+" : "-", {{link}}, op.line, op.column});
        return;
      }
      case Tok::Link: {
        const Token& lhs = next();
        expect(Tok::Eq, "'=' after link name");
        RawArg rhs = argument(out);
        if (rhs.bundle) fail("bundle in connector", lhs);
        out.atoms.push_back({"=", {{lhs.text}, rhs}, lhs.line, lhs.column});
        return;
      }
      case Tok::Name:
      case Tok::LBrace: {
        if (t.kind == Tok::LBrace || peek(1).kind == Tok::LBrace) {
          RawCell c = cell();
          if (peek().kind == Tok::Eq) fail("membrane on the left of '='", peek());
          out.cells.push_back(std::move(c));
          return;
        }
        RawAtom a = atom_term(out);
        if (peek().kind == Tok::Eq) {
          next();
          const Token& l = expect(Tok::Link, "link name after '='");
          a.args.push_back({l.text});
        }
        out.atoms.push_back(std::move(a));
        return;
      }
      default: fail("unexpected token", t);
    }
  }

  RawCell cell() {
    RawCell c;
    if (peek().kind == Tok::Name) c.name = next().text;
    expect(Tok::LBrace, "'{'");
    c.body = cell_body();
    return c;
  }

  RawAtom atom_term(RawProc& out) {
    const Token& name = expect(Tok::Name, "atom name");
    RawAtom a{name.text, {}, name.line, name.column};
    if (peek().kind == Tok::LParen && peek().glued) {
      next();
      if (peek().kind != Tok::RParen) {
        a.args.push_back(argument(out));
        while (peek().kind == Tok::Comma) {
          next();
          a.args.push_back(argument(out));
        }
      }
      expect(Tok::RParen, "')'");
    }
    return a;
  }

  // Term notation: a nested atom gets a fresh link as its last argument;
  // a membrane argument gets `+L` inside.
  RawArg argument(RawProc& out) {
    const Token& t = peek();
    if (t.kind == Tok::Link) return {next().text};
    if (t.kind == Tok::Star) {
      next();
      return {expect(Tok::Link, "bundle name after '*'").text, true};
    }
    if (t.kind == Tok::LBrace || (t.kind == Tok::Name && peek(1).kind == Tok::LBrace)) {
      RawCell c = cell();
      std::string l = fresh();
      c.body.atoms.insert(c.body.atoms.begin(), RawAtom{"+", {{l}}, t.line, t.column});
      out.cells.push_back(std::move(c));
      return {l};
    }
    if (t.kind == Tok::Name) {
      RawAtom a = atom_term(out);
      std::string l = fresh();
      a.args.push_back({l});
      out.atoms.push_back(std::move(a));
      return {l};
    }
    fail("expected link, atom or membrane argument", t);
  }

  RawContext context() {
    const Token& t = next();
    RawContext c{t.text, {}, std::nullopt, false, t.line, t.column};
    if (!(peek().kind == Tok::LBracket && peek().glued)) {
      c.open = true;
      return c;
    }
    next();
    if (peek().kind != Tok::RBracket && peek().kind != Tok::Bar) {
      c.args.push_back(context_arg());
      while (peek().kind == Tok::Comma) {
        next();
        c.args.push_back(context_arg());
      }
    }
    if (peek().kind == Tok::Bar) {
      next();
      if (peek().kind == Tok::Star) {
        next();
        c.bundle = expect(Tok::Link, "bundle name").text;
      } else {
        expect(Tok::LBracket, "'*X' or '[]' after '|'");
        expect(Tok::RBracket, "']'");
      }
    }
    expect(Tok::RBracket, "']'");
    return c;
  }

  RawArg context_arg() {
    if (peek().kind == Tok::Star) {
      next();
      return {expect(Tok::Link, "bundle name").text, true};
    }
    return {expect(Tok::Link, "link name").text};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int counter_ = 0;
};

// ---------------------------------------------------------------------------
// Raw tree -> model

class Lowering {
 public:
  Process process(const RawProc& raw) {
    if (!raw.contexts.empty()) {
      const auto& c = raw.contexts.front();
      throw ParseError("process context $" + c.name + " outside a rule", c.line, c.column);
    }
    if (!raw.rule_contexts.empty())
      throw ParseError("rule context @" + raw.rule_contexts.front() + " outside a rule", raw.line,
                       raw.column);
    Process p;
    for (const RawAtom& a : raw.atoms) {
      Atom atom{intern(a.functor), {}};
      for (const RawArg& arg : a.args) {
        if (arg.bundle)
          throw ParseError("aggregate " + a.functor + " outside a rule", a.line, a.column);
        atom.args.push_back(link(arg.name));
      }
      p.atoms.push_back(std::move(atom));
    }
    for (const RawCell& c : raw.cells) p.cells.push_back({intern(c.name), process(c.body)});
    for (const auto& r : raw.rules) p.rules.push_back(rule(*r));
    return p;
  }

  static RulePtr rule(const RawRule& raw) {
    auto r = std::make_shared<Rule>();
    r->name = raw.name;
    RuleBuilder b{*r};
    r->lhs = b.build(raw.lhs);
    r->rhs = b.build(raw.rhs);
    // desugaring links get printable names that do not clash with the user's
    std::set<std::string> taken(r->links.begin(), r->links.end());
    int next = 0;
    for (auto& name : r->links) {
      if (!name.starts_with('~')) continue;
      while (taken.count("_" + std::to_string(next))) ++next;
      name = "_" + std::to_string(next++);
    }
    ValidationReport rep = validate_link_condition(*r);
    if (!rep.ok()) {
      std::string what = rep.to_string();
      if (!what.empty() && what.back() == '\n') what.pop_back();
      throw ParseError("invalid rule" + (raw.name.empty() ? std::string() : " " + raw.name) + ": " + what,
                       raw.line, raw.column);
    }
    return r;
  }

 private:
  LinkId link(const std::string& name) {
    if (name.starts_with('~')) {
      auto [it, inserted] = fresh_.try_emplace(name, kNoLink);
      if (inserted) it->second = fresh_link();
      return it->second;
    }
    return named_link(name);
  }

  struct RuleBuilder {
    Rule& rule;
    std::unordered_map<std::string, VarId> links{};
    std::unordered_map<std::string, VarId> bundles{};

    VarId link(const std::string& n) {
      auto [it, inserted] = links.try_emplace(n, static_cast<VarId>(rule.links.size()));
      if (inserted) rule.links.push_back(n);
      return it->second;
    }
    VarId bundle(const std::string& n) {
      auto [it, inserted] = bundles.try_emplace(n, static_cast<VarId>(rule.bundles.size()));
      if (inserted) rule.bundles.push_back(n);
      return it->second;
    }

    Template build(const RawProc& raw) {
      Template t;
      for (const RawAtom& a : raw.atoms) {
        bool any_bundle = false, all_bundle = true;
        for (const auto& arg : a.args) {
          any_bundle |= arg.bundle;
          all_bundle &= arg.bundle;
        }
        if (any_bundle) {
          if (!all_bundle)
            throw ParseError("aggregate " + a.functor + " mixes links and bundles", a.line, a.column);
          TemplateAggregate agg{intern(a.functor), {}};
          for (const auto& arg : a.args) agg.bundles.push_back(bundle(arg.name));
          t.aggregates.push_back(std::move(agg));
          continue;
        }
        TemplateAtom ta{intern(a.functor), {}};
        for (const auto& arg : a.args) ta.args.push_back(link(arg.name));
        t.atoms.push_back(std::move(ta));
      }
      for (const RawCell& c : raw.cells) t.cells.push_back({intern(c.name), build(c.body)});
      for (const RawContext& c : raw.contexts) {
        bool any_bundle = false, all_bundle = !c.args.empty();
        for (const auto& arg : c.args) {
          any_bundle |= arg.bundle;
          all_bundle &= arg.bundle;
        }
        if (any_bundle) {
          if (!all_bundle || c.bundle)
            throw ParseError("context $" + c.name + " mixes links and bundles", c.line, c.column);
          AggregateContext ac{c.name, {}};
          for (const auto& arg : c.args) ac.bundles.push_back(bundle(arg.name));
          t.aggregate_contexts.push_back(std::move(ac));
          continue;
        }
        ProcessContext pc{c.name, {}, std::nullopt, c.open};
        for (const auto& arg : c.args) pc.links.push_back(link(arg.name));
        if (c.bundle) pc.bundle = bundle(*c.bundle);
        t.contexts.push_back(std::move(pc));
      }
      for (const auto& r : raw.rule_contexts) t.rule_contexts.push_back({r});
      for (const auto& r : raw.rules) t.rules.push_back(Lowering::rule(*r));
      return t;
    }
  };

  std::unordered_map<std::string, LinkId> fresh_;
};

}  // namespace detail

/// Parses period-terminated items. Nested terms and membrane arguments are
/// desugared; the composed process items must satisfy the Link Condition.
inline SourceProgram parse_program(std::string_view text) {
  detail::Parser parser(detail::Lexer(text).run());
  std::vector<detail::RawItem> raw = parser.program();
  detail::Lowering lower;
  SourceProgram prog;
  Process composed;
  for (const auto& it : raw) {
    if (it.rule) {
      prog.items.emplace_back(detail::Lowering::rule(*it.rule));
    } else {
      Process p = lower.process(it.proc);
      composed.append(p);
      prog.items.emplace_back(std::move(p));
    }
  }
  ValidationReport rep = validate_link_condition(composed);
  if (!rep.ok()) {
    std::string what = rep.to_string();
    if (!what.empty() && what.back() == '\n') what.pop_back();
    throw LinkConditionError("Link Condition violated: " + what);
  }
  return prog;
}

/// All items composed in parallel: process items and top-level rules.
inline Process to_process(const SourceProgram& prog) {
  Process out;
  for (const auto& it : prog.items) {
    if (const auto* p = std::get_if<Process>(&it)) {
      out.append(*p);
    } else {
      out.rules.push_back(std::get<RulePtr>(it));
    }
  }
  return out;
}

inline Process parse_process(std::string_view text) { return to_process(parse_program(text)); }

/// Parses text containing exactly one rule.
inline RulePtr parse_rule(std::string_view text) {
  SourceProgram prog = parse_program(text);
  RulePtr found;
  for (const auto& it : prog.items) {
    if (const auto* r = std::get_if<RulePtr>(&it)) {
      if (found) throw Error("expected exactly one rule");
      found = *r;
    } else if (!std::get<Process>(it).empty()) {
      throw Error("expected a rule, found a process");
    }
  }
  if (!found) throw Error("expected a rule");
  return found;
}

inline std::vector<RulePtr> parse_rules(std::string_view text) {
  std::vector<RulePtr> out;
  for (const auto& it : parse_program(text).items) {
    if (const auto* r = std::get_if<RulePtr>(&it)) {
      out.push_back(*r);
    } else if (!std::get<Process>(it).empty()) {
      throw Error("expected only rules");
    }
  }
  return out;
}

}  // namespace lmn
