// lmn: command-line driver for the engine and the proof-net workbench.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lmn/lmn.hpp"

namespace {

enum Exit { kOk = 0, kViolation = 1, kUsage = 2, kCapped = 3 };

struct UsageError : lmn::Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// Program file split into the initial process and the rules at its root.
struct Loaded {
  lmn::Process host;
  std::vector<lmn::RulePtr> rules;
};

Loaded load(const std::string& path, const std::string& selection) {
  Loaded l;
  l.host = lmn::parse_process(read_file(path));
  l.rules = std::move(l.host.rules);
  l.host.rules.clear();
  if (!selection.empty()) {
    auto more = lmn::pn::rule_selection(selection);
    l.rules.insert(l.rules.end(), more.begin(), more.end());
  }
  return l;
}

int cmd_run(const std::string& file, const std::string& rules, std::size_t max_steps) {
  Loaded l = load(file, rules);
  lmn::Process cur = lmn::normalize_connectors(l.host);
  std::cout << "0: " << lmn::canonical_form(cur).text << "\n";
  for (std::size_t i = 1;; ++i) {
    if (i > max_steps) {
      std::cout << "step limit " << max_steps << " reached\n";
      return kOk;
    }
    auto next = lmn::step_all(cur, l.rules);
    if (next.empty()) {
      std::cout << "normal form after " << i - 1 << " steps\n";
      return kOk;
    }
    cur = std::move(next.front().state);
    std::cout << i << " [" << next.front().rule << "]: " << lmn::canonical_form(cur).text << "\n";
  }
}

struct ExploreFlags {
  std::string rules;
  bool no_collapse = false;
  bool count_multi = false;
  std::size_t cap = 100000;
  unsigned threads = 1;
  std::string dot, json;
};

lmn::ExploreOptions options(const ExploreFlags& f) {
  lmn::ExploreOptions o;
  o.state_cap = f.cap;
  o.collapse_api = !f.no_collapse;
  o.count_multi = f.count_multi;
  o.threads = f.threads;
  return o;
}

int cmd_explore(const std::string& file, const ExploreFlags& f) {
  Loaded l = load(file, f.rules);
  lmn::TransitionSystem ts = lmn::explore(l.host, l.rules, options(f));
  if (!f.dot.empty()) write_file(f.dot, lmn::export_dot(ts));
  if (!f.json.empty()) write_file(f.json, lmn::export_json(ts));
  std::cout << "states=" << ts.state_count() << " transitions=" << ts.transition_count()
            << " end_states=" << ts.end_state_ids().size() << " capped=" << (ts.capped ? "true" : "false") << "\n";
  return ts.capped ? kCapped : kOk;
}

int cmd_check(const std::string& file, int limit) {
  lmn::pn::ProofStructure s = lmn::pn::parse_net_json(read_file(file));
  lmn::pn::NetReport rep = lmn::pn::validate_structure(s);
  if (!rep.ok()) {
    std::cerr << "invalid proof structure:\n" << rep.to_string();
    return kUsage;
  }
  lmn::pn::DrResult r = lmn::pn::check_dr_witness(s, limit);
  if (r.ok) {
    std::cout << "proof-net\n";
    return kOk;
  }
  std::cout << "not-a-proof-net\n" << r.witness();
  return kViolation;
}

int cmd_encode(const std::string& file, const std::string& out) {
  lmn::pn::ProofStructure s = lmn::pn::parse_net_json(read_file(file));
  lmn::pn::NetReport rep = lmn::pn::validate_structure(s);
  if (!rep.ok()) {
    std::cerr << "invalid proof structure:\n" << rep.to_string();
    return kUsage;
  }
  std::string text = lmn::pn::encode_text(s) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return kOk;
}

int cmd_fmt(const std::string& file) {
  std::cout << lmn::pretty_print(lmn::parse_program(read_file(file)));
  return kOk;
}

std::string count(std::optional<std::size_t> v) { return v ? std::to_string(*v) : "inf"; }

int cmd_table1(const std::vector<int>& rows, const ExploreFlags& f) {
  lmn::ExploreOptions o = options(f);
  std::cout << std::left << std::setw(4) << "row" << std::setw(20) << "rules" << std::right << std::setw(9)
            << "states" << std::setw(13) << "transitions" << std::setw(6) << "end" << "   |" << std::setw(10)
            << "reference" << std::setw(12) << "" << std::setw(10) << "time" << "\n";
  for (const auto& row : lmn::pn::table1_rows()) {
    if (!rows.empty() && std::find(rows.begin(), rows.end(), row.row) == rows.end()) continue;
    auto r = lmn::pn::run_table1_row(row, o);
    std::cout << std::left << std::setw(4) << row.row << std::setw(20) << row.rules << std::right;
    if (r.capped)
      std::cout << std::setw(9) << (">" + std::to_string(r.states - 1)) << std::setw(13) << "-" << std::setw(6)
                << "-";
    else
      std::cout << std::setw(9) << r.states << std::setw(13) << r.transitions << std::setw(6) << r.end_states;
    std::cout << "   |" << std::setw(8) << count(row.states) << std::setw(9) << count(row.transitions)
              << std::setw(5) << count(row.end_states) << std::setw(9) << std::fixed << std::setprecision(2)
              << r.seconds << "s" << (r.capped ? "  capped" : "") << "\n";
    std::cout.flush();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical graph rewriting with mell.copy / mell.delete, and a MELL proof-net workbench"};
  app.require_subcommand(1);

  std::string file, rules, out;
  std::size_t max_steps = 1000;
  int limit = lmn::pn::kDefaultSwitchingLimit;
  ExploreFlags ef;
  std::vector<int> rows;

  auto* run = app.add_subcommand("run", "follow the first enabled step until a normal form");
  run->add_option("file", file, ".lmn program")->required();
  run->add_option("--rules", rules, "extra rule sets, e.g. base+c_pull");
  run->add_option("--max-steps", max_steps, "step limit")->capture_default_str();

  auto add_explore_flags = [&](CLI::App* c) {
    c->add_flag("--collapse-api,!--no-collapse-api", [&](std::int64_t n) { ef.no_collapse = n < 0; },
                "fold mell.copy / mell.delete steps into the rule that created them (default on)");
    c->add_flag("--count-multi", ef.count_multi, "count parallel edges with the same rule separately");
    c->add_option("--cap", ef.cap, "state cap")->capture_default_str();
    c->add_option("--threads", ef.threads, "worker threads")->capture_default_str();
  };
  auto* explore = app.add_subcommand("explore", "state space up to structural congruence");
  explore->add_option("file", file, ".lmn program")->required();
  explore->add_option("--rules", ef.rules, "extra rule sets: base, c_pull, c_push, w_pull, w_push joined by +");
  explore->add_option("--dot", ef.dot, "write a Graphviz digraph");
  explore->add_option("--json", ef.json, "write the transition system as JSON");
  add_explore_flags(explore);

  auto* check = app.add_subcommand("check", "Danos-Regnier correctness of a net");
  check->add_option("net", file, "net JSON")->required();
  check->add_option("--limit", limit, "maximum switched cells per level")->capture_default_str();

  auto* encode = app.add_subcommand("encode", "net JSON to .lmn");
  encode->add_option("net", file, "net JSON")->required();
  encode->add_option("-o,--output", out, "output file (default stdout)");

  auto* fmt = app.add_subcommand("fmt", "pretty-print a program");
  fmt->add_option("file", file, ".lmn program")->required();

  auto* table1 = app.add_subcommand("table1", "push-equivalence experiment on the fig9 net");
  table1->add_option("--rows", rows, "rows to run (default all)")->delimiter(',')->check(CLI::Range(1, 7));
  add_explore_flags(table1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(file, rules, max_steps);
    if (*explore) return cmd_explore(file, ef);
    if (*check) return cmd_check(file, limit);
    if (*encode) return cmd_encode(file, out);
    if (*fmt) return cmd_fmt(file);
    if (*table1) return cmd_table1(rows, ef);
  } catch (const lmn::LinkConditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const lmn::RewriteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const lmn::pn::SwitchingLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const lmn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
