#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmn/printer.hpp"
#include "lmn/process.hpp"

namespace lmn {

struct LinkViolation {
  std::string link;
  int count = 0;
  std::vector<std::string> locations;
};

struct ValidationReport {
  std::vector<LinkViolation> violations;
  std::vector<std::string> problems;  // structural rule errors (context placement etc.)

  bool ok() const { return violations.empty() && problems.empty(); }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) {
      os << "link " << v.link << " occurs " << v.count << " time(s)";
      if (!v.locations.empty()) {
        os << " at";
        for (const auto& loc : v.locations) os << ' ' << loc;
      }
      os << '\n';
    }
    for (const auto& p : problems) os << p << '\n';
    return os.str();
  }
};

namespace detail {

struct Occurrence {
  int count = 0;
  std::vector<std::string> locations;
};

inline void count_links(const Process& p, const std::string& path,
                        std::unordered_map<LinkId, Occurrence>& occ) {
  for (std::size_t i = 0; i < p.atoms.size(); ++i) {
    const Atom& a = p.atoms[i];
    for (std::size_t k = 0; k < a.args.size(); ++k) {
      auto& o = occ[a.args[k]];
      ++o.count;
      o.locations.push_back(path + ":" + quote_name(symbol_text(a.functor)) + "[" +
                            std::to_string(k) + "]");
    }
  }
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    const Cell& c = p.cells[i];
    std::string name = c.name ? quote_name(symbol_text(c.name)) : std::string("{}");
    count_links(c.body, path + "/" + name + "#" + std::to_string(i), occ);
  }
}

// Occurrence counts only, for hot paths.
inline void tally_links(const Process& p, std::unordered_map<LinkId, int>& occ) {
  for (const Atom& a : p.atoms)
    for (LinkId l : a.args) ++occ[l];
  for (const Cell& c : p.cells) tally_links(c.body, occ);
}

struct RuleLinkCount {
  int lhs_atoms = 0, rhs_atoms = 0, lhs_ctx = 0, rhs_ctx = 0;
};

inline void count_template(const Template& t, bool lhs, std::vector<RuleLinkCount>& counts) {
  for (const TemplateAtom& a : t.atoms)
    for (VarId v : a.args) ++(lhs ? counts[v].lhs_atoms : counts[v].rhs_atoms);
  for (const ProcessContext& c : t.contexts)
    for (VarId v : c.links) ++(lhs ? counts[v].lhs_ctx : counts[v].rhs_ctx);
  for (const TemplateCell& c : t.cells) count_template(c.body, lhs, counts);
}

inline void check_contexts(const Template& t, bool lhs, bool top, std::set<std::string>& seen,
                           std::vector<std::string>& problems) {
  if (t.contexts.size() + t.aggregate_contexts.size() > 1 && lhs)
    problems.push_back("a membrane in the head contains more than one process context");
  for (const ProcessContext& c : t.contexts) {
    if (lhs && top) problems.push_back("process context $" + c.name + " at the top level of a head");
    if (lhs && !seen.insert(c.name).second)
      problems.push_back("process context $" + c.name + " occurs more than once in the head");
  }
  if (lhs) {
    for (const auto& c : t.aggregate_contexts)
      problems.push_back("aggregate context $" + c.name + " in a head");
    for (const auto& a : t.aggregates)
      problems.push_back("aggregate " + symbol_text(a.functor) + " in a head");
    if (t.rule_contexts.size() > 1)
      problems.push_back("a membrane in the head contains more than one rule context");
    for (const auto& r : t.rule_contexts)
      if (top) problems.push_back("rule context @" + r.name + " at the top level of a head");
    for (const TemplateAtom& a : t.atoms)
      if (a.functor == sym::connector()) problems.push_back("connector in a head");
  }
  for (const TemplateCell& c : t.cells) check_contexts(c.body, lhs, false, seen, problems);
}

inline void collect_context_names(const Template& t, std::set<std::string>& names,
                                  std::set<std::string>& rule_names) {
  for (const auto& c : t.contexts) names.insert(c.name);
  for (const auto& c : t.aggregate_contexts) names.insert(c.name);
  for (const auto& r : t.rule_contexts) rule_names.insert(r.name);
  for (const auto& c : t.cells) collect_context_names(c.body, names, rule_names);
}

}  // namespace detail

/// Each link occurs at most twice in a process.
inline ValidationReport validate_link_condition(const Process& p) {
  std::unordered_map<LinkId, detail::Occurrence> occ;
  detail::count_links(p, "", occ);
  std::map<std::string, LinkViolation> sorted;
  for (auto& [link, o] : occ) {
    if (o.count <= 2) continue;
    std::string name = link_text(link);
    sorted[name] = LinkViolation{name, o.count, std::move(o.locations)};
  }
  ValidationReport report;
  for (auto& [_, v] : sorted) report.violations.push_back(std::move(v));
  return report;
}

/// Each link of a rule occurs exactly twice: once per side (a free link of
/// the head), or twice within a side. A name local to the head may be reused
/// as a local name of the body.
inline ValidationReport validate_link_condition(const Rule& r) {
  std::vector<detail::RuleLinkCount> counts(r.links.size());
  detail::count_template(r.lhs, true, counts);
  detail::count_template(r.rhs, false, counts);
  ValidationReport report;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    const auto& c = counts[v];
    int lhs = c.lhs_atoms + c.lhs_ctx, rhs = c.rhs_atoms + c.rhs_ctx;
    bool ok = (lhs == 1 && rhs == 1) || ((lhs == 0 || lhs == 2) && (rhs == 0 || rhs == 2) && lhs + rhs > 0);
    if (!ok) {
      std::vector<std::string> where;
      if (lhs) where.push_back("head");
      if (rhs) where.push_back("body");
      report.violations.push_back({r.links[v], lhs + rhs, where});
    }
  }
  std::set<std::string> seen;
  detail::check_contexts(r.lhs, true, true, seen, report.problems);
  std::set<std::string> unused;
  detail::check_contexts(r.rhs, false, true, unused, report.problems);

  std::set<std::string> lhs_ctx, lhs_rules, rhs_ctx, rhs_rules;
  detail::collect_context_names(r.lhs, lhs_ctx, lhs_rules);
  detail::collect_context_names(r.rhs, rhs_ctx, rhs_rules);
  for (const auto& n : rhs_ctx)
    if (!lhs_ctx.count(n)) report.problems.push_back("process context $" + n + " not bound by the head");
  for (const auto& n : rhs_rules)
    if (!lhs_rules.count(n)) report.problems.push_back("rule context @" + n + " not bound by the head");
  return report;
}

/// Links occurring exactly once anywhere in `p` (membrane-crossing links are
/// counted across the whole process).
inline std::set<LinkId> free_links(const Process& p) {
  std::unordered_map<LinkId, int> occ;
  detail::tally_links(p, occ);
  std::set<LinkId> out;
  for (auto [l, n] : occ) {
    if (n > 2) throw LinkConditionError("Link Condition violated: " + link_text(l) + " occurs " +
                                        std::to_string(n) + " times");
    if (n == 1) out.insert(l);
  }
  return out;
}

inline std::set<std::string> free_link_names(const Process& p) {
  std::set<std::string> out;
  for (LinkId l : free_links(p)) out.insert(link_text(l));
  return out;
}

}  // namespace lmn
