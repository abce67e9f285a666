#pragma once

#include <cctype>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lmn/process.hpp"

namespace lmn {

/// One period-terminated item of a source file.
using ProgramItem = std::variant<Process, RulePtr>;

struct SourceProgram {
  std::vector<ProgramItem> items;
};

namespace detail {

inline bool is_plain_name(const std::string& s) {
  if (s.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0]))) {
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }
  bool segment_start = true;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (segment_start) {
      if (!std::islower(u)) return false;
      segment_start = false;
    } else if (c == '.') {
      segment_start = true;
    } else if (!std::isalnum(u) && c != '_') {
      return false;
    }
  }
  return !segment_start;
}

inline std::string quote_name(const std::string& s) {
  if (is_plain_name(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

inline void print_atom(std::ostream& os, Symbol functor, const std::vector<std::string>& args) {
  const std::string& name = symbol_text(functor);
  if (functor == sym::connector() && args.size() == 2) {
    os << args[0] << '=' << args[1];
    return;
  }
  if ((functor == sym::plus() || functor == sym::minus()) && args.size() == 1) {
    os << name << args[0];
    return;
  }
  os << quote_name(name);
  if (args.empty()) return;
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) os << (i ? "," : "") << args[i];
  os << ')';
}

inline void print_cell_head(std::ostream& os, Symbol name) {
  if (name != 0) os << quote_name(symbol_text(name));
}

class Separator {
 public:
  explicit Separator(std::ostream& os) : os_(os) {}
  void operator()() {
    if (!first_) os_ << ", ";
    first_ = false;
  }

 private:
  std::ostream& os_;
  bool first_ = true;
};

void print_rule(std::ostream& os, const Rule& rule);

inline void print_process(std::ostream& os, const Process& p,
                          const std::function<std::string(LinkId)>& name_of) {
  Separator sep(os);
  for (const Atom& a : p.atoms) {
    sep();
    std::vector<std::string> args;
    args.reserve(a.args.size());
    for (LinkId l : a.args) args.push_back(name_of(l));
    print_atom(os, a.functor, args);
  }
  for (const Cell& c : p.cells) {
    sep();
    print_cell_head(os, c.name);
    os << '{';
    print_process(os, c.body, name_of);
    os << '}';
  }
  for (const RulePtr& r : p.rules) {
    sep();
    os << '(';
    print_rule(os, *r);
    os << ')';
  }
}

inline void print_template(std::ostream& os, const Template& t, const Rule& rule) {
  Separator sep(os);
  auto link = [&](VarId v) { return rule.links[v]; };
  auto bundle = [&](VarId v) { return "*" + rule.bundles[v]; };
  for (const TemplateAtom& a : t.atoms) {
    sep();
    std::vector<std::string> args;
    for (VarId v : a.args) args.push_back(link(v));
    print_atom(os, a.functor, args);
  }
  for (const TemplateAggregate& a : t.aggregates) {
    sep();
    std::vector<std::string> args;
    for (VarId v : a.bundles) args.push_back(bundle(v));
    print_atom(os, a.functor, args);
  }
  for (const TemplateCell& c : t.cells) {
    sep();
    print_cell_head(os, c.name);
    os << '{';
    print_template(os, c.body, rule);
    os << '}';
  }
  for (const ProcessContext& c : t.contexts) {
    sep();
    os << '$' << c.name;
    if (c.open) continue;
    os << '[';
    for (std::size_t i = 0; i < c.links.size(); ++i) os << (i ? "," : "") << link(c.links[i]);
    if (c.bundle) os << '|' << bundle(*c.bundle);
    os << ']';
  }
  for (const AggregateContext& c : t.aggregate_contexts) {
    sep();
    os << '$' << c.name << '[';
    for (std::size_t i = 0; i < c.bundles.size(); ++i) os << (i ? "," : "") << bundle(c.bundles[i]);
    os << ']';
  }
  for (const RuleContext& c : t.rule_contexts) {
    sep();
    os << '@' << c.name;
  }
  for (const RulePtr& r : t.rules) {
    sep();
    os << '(';
    print_rule(os, *r);
    os << ')';
  }
}

inline void print_rule(std::ostream& os, const Rule& rule) {
  if (!rule.name.empty()) os << rule.name << "@@ ";
  print_template(os, rule.lhs, rule);
  os << " :- ";
  print_template(os, rule.rhs, rule);
}

}  // namespace detail

/// Deterministic rendering; link names are printed as stored (user names
/// verbatim, anonymous links as `_L<n>`). Reparses to a congruent value.
inline std::string pretty_print(const Process& p) {
  std::ostringstream os;
  detail::print_process(os, p, [](LinkId l) { return link_text(l); });
  return os.str();
}

inline std::string pretty_print(const Rule& r) {
  std::ostringstream os;
  detail::print_rule(os, r);
  return os.str();
}

inline std::string pretty_print(const SourceProgram& prog) {
  std::ostringstream os;
  for (const ProgramItem& item : prog.items) {
    if (const auto* p = std::get_if<Process>(&item)) {
      if (p->empty()) continue;
      os << pretty_print(*p) << ".\n";
    } else {
      os << pretty_print(*std::get<RulePtr>(item)) << ".\n";
    }
  }
  return os.str();
}

}  // namespace lmn
