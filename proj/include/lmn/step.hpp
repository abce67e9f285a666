#pragma once

#include <string>
#include <vector>

#include "lmn/match.hpp"
#include "lmn/mell.hpp"

namespace lmn {

struct Successor {
  std::string rule;  // rule name, or the API name for built-in steps
  Process state;
  bool builtin = false;
};

inline std::string rule_label(const Rule& r) { return r.name.empty() ? std::string("_") : r.name; }

namespace detail {

inline void local_rule_steps(const HostView& view, std::vector<Successor>& out) {
  for (int c = 1; c < static_cast<int>(view.cells().size()); ++c) {
    for (const RulePtr& r : view.cell(c).proc->rules)
      for (const Match& m : find_matches(r, view, c)) out.push_back({rule_label(*r), apply_match(view, m), false});
  }
}

}  // namespace detail

/// Built-in successors only: one per pending API call.
inline std::vector<Successor> builtin_steps(const Process& host) {
  std::vector<Successor> out;
  for (const PendingApiCall& call : find_api_calls(host)) out.push_back({api_name(call), fire_api_call(host, call), true});
  return out;
}

/// Every one-step successor of `host`: the given rules and the rules at the
/// root rewrite the root, rules inside a membrane rewrite that membrane (R2),
/// and each pending API call fires as its own step.
inline std::vector<Successor> step_all(const Process& host, const std::vector<RulePtr>& rules,
                                       bool include_builtins = true) {
  std::vector<Successor> out;
  HostView view(host);
  for (const RulePtr& r : rules)
    for (const Match& m : find_matches(r, view, 0)) out.push_back({rule_label(*r), apply_match(view, m), false});
  for (const RulePtr& r : host.rules)
    for (const Match& m : find_matches(r, view, 0)) out.push_back({rule_label(*r), apply_match(view, m), false});
  detail::local_rule_steps(view, out);
  if (include_builtins) {
    auto b = builtin_steps(host);
    out.insert(out.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
  }
  return out;
}

}  // namespace lmn
