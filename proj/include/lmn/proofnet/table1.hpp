#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "lmn/proofnet/library.hpp"
#include "lmn/statespace.hpp"

namespace lmn::pn {

struct Table1Row {
  int row;
  std::string rules;  // rule_selection() argument
  std::optional<std::size_t> states, transitions, end_states;  // published; empty = diverges
};

/// Push-equivalence experiment on fig9: one row per rule-set selection.
inline const std::vector<Table1Row>& table1_rows() {
  static const std::vector<Table1Row> rows{
      {1, "base", 476, 1592, 1},
      {2, "base+c_pull", 1808, 7204, 1},
      {3, "base+c_push", 476, 1592, 1},
      {4, "base+c_pull+c_push", 1808, 7832, 1},
      {5, "base+w_pull", 756, 2700, 1},
      {6, "base+w_push", 41216, 204680, 16},
      {7, "base+w_pull+w_push", std::nullopt, std::nullopt, std::nullopt}};
  return rows;
}

struct Table1Result {
  Table1Row expected;
  std::size_t states = 0, transitions = 0, end_states = 0;
  bool capped = false;
  double seconds = 0;
};

inline Table1Result run_table1_row(const Table1Row& row, const ExploreOptions& opts) {
  Table1Result r{row};
  auto t0 = std::chrono::steady_clock::now();
  TransitionSystem ts = explore(fixture("fig9"), rule_selection(row.rules), opts);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.states = ts.state_count();
  r.transitions = ts.transition_count();
  r.end_states = ts.end_state_ids().size();
  r.capped = ts.capped;
  return r;
}

}  // namespace lmn::pn
