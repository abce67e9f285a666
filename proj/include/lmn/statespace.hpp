#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmn/canonical.hpp"
#include "lmn/step.hpp"

namespace lmn {

struct ExploreOptions {
  std::size_t state_cap = 100000;
  bool collapse_api = true;  // API micro-steps fold into the user-rule edge
  bool count_multi = false;  // count parallel (from, rule, to) edges separately
  unsigned threads = 1;
};

struct Transition {
  std::uint32_t from = 0;
  std::string rule;
  std::uint32_t to = 0;
  std::uint32_t multiplicity = 1;
};

struct TransitionSystem {
  std::vector<std::string> canonical;
  std::vector<Process> states;
  std::vector<char> collapsed;  // reached through a folded API step
  std::vector<char> expanded;
  std::vector<Transition> transitions;  // distinct (from, rule, to), sorted
  std::uint32_t initial = 0;
  bool capped = false;
  bool collapse_api = false;
  bool count_multi = false;

  std::size_t state_count() const { return states.size(); }

  std::size_t transition_count() const {
    if (!count_multi) return transitions.size();
    std::size_t n = 0;
    for (const auto& t : transitions) n += t.multiplicity;
    return n;
  }

  /// Expanded states without successors; a lower bound when capped.
  std::vector<std::uint32_t> end_state_ids() const {
    std::vector<char> has_out(states.size(), 0);
    for (const auto& t : transitions) has_out[t.from] = 1;
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = 0; s < states.size(); ++s)
      if (expanded[s] && !has_out[s]) out.push_back(s);
    return out;
  }
};

namespace detail {

struct Outcome {
  std::string rule;
  Process state;
  std::string text;
  bool collapsed = false;
};

// Runs built-in steps until no API atom remains; every resulting state.
inline void resolve_transient(const Process& p, std::vector<Process>& out, int depth = 0) {
  if (!is_transient(p)) {
    out.push_back(p);
    return;
  }
  if (depth > 64) throw RewriteError("API calls do not terminate");
  auto next = builtin_steps(p);
  if (next.empty()) throw RewriteError("transient state without an enabled built-in");
  for (const auto& s : next) resolve_transient(s.state, out, depth + 1);
}

inline std::vector<Outcome> expand(const Process& p, const std::vector<RulePtr>& rules, bool collapse) {
  std::vector<Outcome> out;
  for (auto& s : step_all(p, rules, !collapse)) {
    if (collapse && is_transient(s.state)) {
      std::vector<Process> finals;
      resolve_transient(s.state, finals);
      for (auto& f : finals) {
        std::string text = canonical_form_normalized(f).text;
        out.push_back({s.rule, std::move(f), std::move(text), true});
      }
    } else {
      std::string text = canonical_form_normalized(s.state).text;
      out.push_back({s.rule, std::move(s.state), std::move(text), false});
    }
  }
  return out;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) f(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Level-synchronous breadth-first closure of the reduction relation with
/// states identified up to structural congruence. Successors of a level are
/// computed (possibly in parallel) and merged in a fixed order, so ids and
/// counts do not depend on the thread count.
inline TransitionSystem explore(const Process& initial, const std::vector<RulePtr>& rules,
                                const ExploreOptions& opts = {}) {
  TransitionSystem ts;
  ts.collapse_api = opts.collapse_api;
  ts.count_multi = opts.count_multi;
  std::unordered_map<std::string, std::uint32_t> index;

  auto add_state = [&](Process p, std::string text, bool collapsed) -> std::uint32_t {
    auto id = static_cast<std::uint32_t>(ts.states.size());
    index.emplace(text, id);
    ts.canonical.push_back(std::move(text));
    ts.states.push_back(std::move(p));
    ts.collapsed.push_back(collapsed);
    ts.expanded.push_back(0);
    return id;
  };

  Process start = normalize_connectors(initial);
  if (opts.collapse_api && is_transient(start)) {
    std::vector<Process> finals;
    detail::resolve_transient(start, finals);
    if (finals.size() != 1) throw RewriteError("initial state resolves to several states");
    start = std::move(finals.front());
  }
  std::string text = canonical_form_normalized(start).text;
  ts.initial = add_state(std::move(start), std::move(text), false);

  std::vector<std::uint32_t> frontier{ts.initial};
  while (!frontier.empty() && !ts.capped) {
    std::vector<std::vector<detail::Outcome>> results(frontier.size());
    detail::parallel_for(frontier.size(), opts.threads, [&](std::size_t i) {
      results[i] = detail::expand(ts.states[frontier[i]], rules, opts.collapse_api);
    });
    std::vector<std::uint32_t> next;
    for (std::size_t i = 0; i < frontier.size() && !ts.capped; ++i) {
      std::uint32_t from = frontier[i];
      std::vector<Transition> edges;
      for (auto& o : results[i]) {
        auto it = index.find(o.text);
        std::uint32_t to;
        if (it != index.end()) {
          to = it->second;
          if (o.collapsed) ts.collapsed[to] = 1;
        } else {
          if (ts.states.size() >= opts.state_cap) {
            ts.capped = true;
            break;
          }
          to = add_state(std::move(o.state), std::move(o.text), o.collapsed);
          next.push_back(to);
        }
        edges.push_back({from, o.rule, to, 1});
      }
      if (ts.capped) break;
      ts.expanded[from] = 1;
      std::sort(edges.begin(), edges.end(), [](const Transition& a, const Transition& b) {
        return std::tie(a.to, a.rule) < std::tie(b.to, b.rule);
      });
      for (auto& e : edges) {
        if (!ts.transitions.empty() && ts.transitions.back().from == e.from &&
            ts.transitions.back().to == e.to && ts.transitions.back().rule == e.rule) {
          ++ts.transitions.back().multiplicity;
        } else {
          ts.transitions.push_back(std::move(e));
        }
      }
    }
    frontier = std::move(next);
  }
  return ts;
}

inline std::vector<Process> end_states(const TransitionSystem& ts) {
  std::vector<Process> out;
  for (auto id : ts.end_state_ids()) out.push_back(ts.states[id]);
  return out;
}

/// Longest path (in transitions) from the initial state; nullopt if a cycle
/// is reachable.
inline std::optional<std::size_t> longest_path(const TransitionSystem& ts) {
  std::size_t n = ts.states.size();
  std::vector<std::vector<std::uint32_t>> succ(n);
  for (const auto& t : ts.transitions) succ[t.from].push_back(t.to);
  std::vector<int> mark(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> best(n, 0);
  // iterative DFS post-order
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{ts.initial, 0}};
  mark[ts.initial] = 1;
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    if (i < succ[v].size()) {
      std::uint32_t w = succ[v][i++];
      if (mark[w] == 1) return std::nullopt;
      if (mark[w] == 0) {
        mark[w] = 1;
        stack.push_back({w, 0});
      }
      continue;
    }
    for (auto w : succ[v]) best[v] = std::max(best[v], best[w] + 1);
    mark[v] = 2;
    stack.pop_back();
  }
  return best[ts.initial];
}

inline std::string export_dot(const TransitionSystem& ts) {
  std::ostringstream os;
  std::vector<char> end(ts.states.size(), 0);
  for (auto id : ts.end_state_ids()) end[id] = 1;
  os << "digraph statespace {\n  node [shape=circle, fontsize=10];\n";
  for (std::size_t s = 0; s < ts.states.size(); ++s) {
    os << "  s" << s << " [label=\"" << s << "\"";
    if (ts.collapsed[s]) os << ", shape=square";
    if (end[s]) os << ", style=filled, fillcolor=\"#f4a261\", peripheries=2";
    if (s == ts.initial) os << ", penwidth=2";
    os << "];\n";
  }
  for (const auto& t : ts.transitions) {
    os << "  s" << t.from << " -> s" << t.to << " [label=\"" << t.rule << "\"";
    if (ts.count_multi && t.multiplicity > 1) os << ", taillabel=\"x" << t.multiplicity << "\"";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

inline nlohmann::json to_json(const TransitionSystem& ts) {
  nlohmann::json j;
  j["states"] = nlohmann::json::array();
  for (std::size_t s = 0; s < ts.states.size(); ++s)
    j["states"].push_back({{"id", s}, {"canonical", ts.canonical[s]}, {"collapsed", bool(ts.collapsed[s])}});
  j["transitions"] = nlohmann::json::array();
  for (const auto& t : ts.transitions) {
    nlohmann::json e{{"from", t.from}, {"rule", t.rule}, {"to", t.to}};
    if (ts.count_multi) e["multiplicity"] = t.multiplicity;
    j["transitions"].push_back(std::move(e));
  }
  j["initial"] = ts.initial;
  auto ends = ts.end_state_ids();
  j["end_states"] = ends;
  j["capped"] = ts.capped;
  j["counts"] = {{"states", ts.state_count()}, {"transitions", ts.transition_count()}, {"end_states", ends.size()}};
  return j;
}

inline std::string export_json(const TransitionSystem& ts) { return to_json(ts).dump(2) + "\n"; }

}  // namespace lmn
