// Acceptance runner: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 only if every hard criterion passes.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>
#include <sstream>

#include "support.hpp"

using namespace lmn;
namespace t = lmn::testing;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool all_ok = true;
std::vector<std::string> pending;  // detail lines, printed after the criterion lines they belong to

void report(int n, bool pass, const std::string& what, bool hard = true) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << (hard ? "" : " (soft)") << "  " << what
            << std::endl;
  if (hard && !pass) all_ok = false;
}

void detail(const std::string& s) { pending.push_back(s); }

void flush() {
  for (const std::string& s : pending) {
    std::istringstream lines(s);
    for (std::string line; std::getline(lines, line);) std::cout << "    " << line << '\n';
  }
  pending.clear();
  std::cout.flush();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion1() {
  auto t0 = Clock::now();
  TransitionSystem ts = explore(pn::fixture("fig2a"), pn::cut_elimination_rules());
  double secs = since(t0);
  auto ends = end_states(ts);
  auto lp = longest_path(ts);
  bool one = ends.size() == 1;
  bool literal = one && congruent(ends[0], pn::fixture("fig2b"));
  bool contracted = one && congruent(ends[0], pn::fixture("fig2b_contracted"));
  bool deep = lp && *lp >= 10;
  bool fast = secs < 5.0;
  report(1, one && literal && deep && fast, "fig2a normalizes to fig2b");
  std::ostringstream os;
  os << "states=" << ts.state_count() << " transitions=" << ts.transition_count() << " end_states=" << ends.size()
     << " longest_path=" << (lp ? std::to_string(*lp) : "inf") << " seconds=" << secs;
  detail(os.str());
  detail(std::string("end state congruent to fig2b: ") + (literal ? "yes" : "no"));
  detail(std::string("end state congruent to fig2b_contracted: ") + (contracted ? "yes" : "no"));
  if (one) detail("end state: " + pretty_print(ends[0]));
}

void criteria2and3() {
  bool counts_ok = true, states_match = true, time_ok = true, cap_ok = false;
  for (const pn::Table1Row& row : pn::table1_rows()) {
    pn::Table1Result r = pn::run_table1_row(row, {.state_cap = 100000});
    std::ostringstream os;
    os << "row " << row.row << " " << row.rules << ": states=" << r.states << " transitions=" << r.transitions
       << " end_states=" << r.end_states << (r.capped ? " capped" : "") << " seconds=" << r.seconds;
    if (row.states)
      os << "  (reference " << *row.states << "/" << *row.transitions << "/" << *row.end_states << ")";
    else
      os << "  (reference: diverges)";
    detail(os.str());
    if (row.end_states) {
      counts_ok = counts_ok && !r.capped && r.end_states == *row.end_states;
      states_match = states_match && r.states == *row.states && r.transitions == *row.transitions;
      time_ok = time_ok && r.seconds < (row.row == 6 ? 600.0 : 30.0);
    } else {
      cap_ok = r.capped && r.states == 100000;
    }
  }
  report(2, counts_ok && cap_ok, "Table 1 end states (1,1,1,1,1,16), row 7 capped at 100000");
  report(3, states_match && time_ok, "Table 1 state and transition counts", false);
  detail(std::string("time bounds (rows 1-5 < 30 s, row 6 < 600 s): ") + (time_ok ? "met" : "missed"));
  if (!states_match) detail("counts differ from the reference; see README, section State counts");
}

void criterion4() {
  TransitionSystem ts = explore(pn::fixture("fig2a"), pn::cut_elimination_rules());
  std::size_t checked = 0, bad = 0;
  for (const Process& s : ts.states) {
    if (is_transient(s)) continue;
    ++checked;
    try {
      if (!pn::check_dr(pn::decode_lmntal(s))) ++bad;
    } catch (const std::exception& e) {
      ++bad;
      detail(std::string("decode failed: ") + e.what());
    }
  }
  report(4, bad == 0 && checked == ts.state_count(), "every fig2a state decodes and is a proof net");
  detail("states checked=" + std::to_string(checked) + " failing=" + std::to_string(bad));
}

void criterion5() {
  std::string dir = LMN_DATA_DIR;
  bool fig2a = pn::check_dr(pn::decode_lmntal(pn::fixture("fig2a"))) &&
               pn::check_dr(pn::parse_net_json(read_file(dir + "/nets/fig2a.json")));
  pn::DrResult bad = pn::check_dr_witness(pn::parse_net_json(read_file(dir + "/nets/ax_tensor.json")));
  bool witness = !bad.ok && !bad.cycle_wires.empty();
  t::Rng rng(2024);
  int agree = 0, nets = 200, correct = 0;
  for (int i = 0; i < nets; ++i) {
    pn::ProofStructure s = t::random_net(rng);
    bool got = pn::check_dr(s);
    agree += got == t::dr_oracle(s);
    correct += got;
  }
  report(5, fig2a && witness && agree == nets, "DR checker");
  detail(std::string("fig2a is a proof net: ") + (fig2a ? "yes" : "no"));
  detail("ax into tensor rejected: " + std::string(bad.ok ? "no" : "yes") + "; " + bad.witness());
  detail("random nets agreeing with oracle: " + std::to_string(agree) + "/" + std::to_string(nets) + " (" +
         std::to_string(correct) + " correct)");
}

void criterion6() {
  t::Rng rng(6);
  const int n = 1000;
  int canon_bad = 0, links_bad = 0, idem_bad = 0, trip_bad = 0, applied = 0, equal_pairs = 0;
  for (int i = 0; i < n; ++i) {
    Process p = t::random_process(rng, {.connector_rate = 0.2});
    Process q = t::shuffle_rename(i % 3 ? p : t::mutate(p, rng), rng);
    bool c = canonical_form(p) == canonical_form(q);
    equal_pairs += c;
    canon_bad += c != t::brute_congruent(p, q);

    Process host = normalize_connectors(p);
    for (const RulePtr& r : t::property_rules())
      for (const Match& m : find_matches(r, host)) {
        Process out = apply_match(host, m);
        ++applied;
        links_bad += !validate_link_condition(out).ok() || free_links(out) != free_links(host);
      }

    Process once = normalize_connectors(p);
    idem_bad += !t::brute_isomorphic(normalize_connectors(once), once);

    trip_bad += !t::brute_congruent(parse_process(pretty_print(p) + "."), p);
  }
  report(6, canon_bad + links_bad + idem_bad + trip_bad == 0, "properties on " + std::to_string(n) + " processes");
  detail("canonical equality vs brute force: " + std::to_string(canon_bad) + " disagreements (" +
         std::to_string(equal_pairs) + " equal pairs)");
  detail("apply_match: " + std::to_string(links_bad) + " violations in " + std::to_string(applied) + " rewrites");
  detail("normalization idempotence: " + std::to_string(idem_bad) + " failures");
  detail("parse after print: " + std::to_string(trip_bad) + " failures");
}

std::string seq(const std::string& prefix, int k) {
  std::string s;
  for (int i = 1; i <= k; ++i) s += "," + prefix + std::to_string(i);
  return s;
}

void criterion7() {
  bool ok = true;
  for (int k = 0; k <= 3; ++k) {
    std::string caps, want = "{h(X1" + seq("P", k) + ")}, {h(X2" + seq("Q", k) + ")}, e(X1,C1), e(X2,C2), c1(C1), c2(C2)";
    for (int i = 1; i <= k; ++i) {
      std::string n = std::to_string(i);
      caps += ", u" + n + "(Z" + n + ")";
      want += ", t(P" + n + ",Q" + n + ",W" + n + "), u" + n + "(W" + n + ")";
    }
    Process host = parse_process("mell.copy(X,A1,A2,A3,B1,B2,C1,C2), {h(X" + seq("Z", k) +
                                 ")}, {t(A1,A2,A3)}, {e(B1,B2)}" + caps + ", c1(C1), c2(C2).");
    auto calls = find_api_calls(host);
    bool copy_ok = calls.size() == 1;
    if (copy_ok) {
      Process out = fire_api_call(host, calls[0]);
      copy_ok = validate_link_condition(out).ok() && free_links(out) == free_links(host) &&
                t::brute_congruent(out, parse_process(want + "."));
    }
    std::string dcaps, dwant = "keep";
    for (int i = 1; i <= k; ++i) {
      std::string n = std::to_string(i);
      dcaps += ", u" + n + "(Z" + n + ")";
      dwant += ", w(Z" + n + "), u" + n + "(Z" + n + ")";
    }
    Process dhost = parse_process("mell.delete(X,A), {h(X" + seq("Z", k) + ")}, {w(A)}, keep" + dcaps + ".");
    auto dcalls = find_api_calls(dhost);
    bool del_ok = dcalls.size() == 1 &&
                  t::brute_congruent(fire_api_call(dhost, dcalls[0]), parse_process(dwant + "."));
    detail("k=" + std::to_string(k) + " copy " + (copy_ok ? "ok" : "wrong") + ", delete " + (del_ok ? "ok" : "wrong"));
    ok = ok && copy_ok && del_ok;
  }
  report(7, ok, "mell.copy and mell.delete for k = 0..3");
}

void criterion8() {
  auto rules = pn::fixture("ambient_open_repl").rules;
  Process state = pn::fixture("ambient_host");
  std::vector<std::string> trace;
  bool lc = validate_link_condition(state).ok();
  for (int i = 0; i < 8; ++i) {
    auto next = step_all(state, rules, true);
    if (next.empty()) break;
    trace.push_back(next[0].rule);
    state = next[0].state;
    lc = lc && validate_link_condition(state).ok();
  }
  bool order = trace.size() >= 2 && trace[0] == "open_repl" && trace[1] == "mell.copy";
  report(8, order && lc, "ambient open_repl then mell.copy keeps the Link Condition");
  std::string tr;
  for (auto& r : trace) tr += (tr.empty() ? "" : " -> ") + r;
  detail("trace: " + tr);
  detail("final: " + pretty_print(state));
}

}  // namespace

int main() {
  try {
    for (auto run : {criterion1, criteria2and3, criterion4, criterion5, criterion6, criterion7, criterion8}) {
      run();
      flush();
    }
  } catch (const std::exception& e) {
    flush();
    std::cout << "error: " << e.what() << std::endl;
    return 2;
  }
  return all_ok ? 0 : 1;
}
