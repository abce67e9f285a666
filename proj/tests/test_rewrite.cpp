#include <gtest/gtest.h>

#include "support.hpp"

using namespace lmn;
using lmn::testing::brute_congruent;

namespace {

std::multiset<std::string> successor_forms(const Process& host, const std::vector<RulePtr>& rules) {
  std::multiset<std::string> out;
  for (auto& s : step_all(host, rules)) out.insert(s.rule + " " + canonical_form(s.state).text);
  return out;
}

}  // namespace

TEST(Match, Fig1) {
  RulePtr r = parse_rule("o(B),{i(A,B),$p[A|*X]} :- n(A),$p[A|*X].");
  Process host = parse_process("o(B),{i(A,B),a(A,G1),b(G2)},g(G1),g(G2).");
  auto ms = find_matches(r, host);
  ASSERT_EQ(ms.size(), 1u);
  const auto& bundle = *ms[0].bundles.at(0);
  ASSERT_EQ(bundle.size(), 2u);
  EXPECT_EQ(link_text(bundle[0]), "G1");
  EXPECT_EQ(link_text(bundle[1]), "G2");
  EXPECT_TRUE(brute_congruent(apply_match(host, ms[0]), parse_process("n(A),a(A,G1),b(G2),g(G1),g(G2).")));
}

TEST(Match, AxCutUnorderedMembraneArgs) {
  RulePtr ax_cut = pn::cut_elimination_rules()[0];
  Process host = parse_process("cut{+A,+B},ax{+B,+C},f(A),g(C).");
  auto ms = find_matches(ax_cut, host);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(brute_congruent(apply_match(host, ms[0]), parse_process("f(L),g(L).")));
  // the + atoms written the other way round
  Process host2 = parse_process("cut{+B,+A},ax{+C,+B},f(A),g(C).");
  EXPECT_EQ(find_matches(ax_cut, host2).size(), 1u);
}

TEST(Match, TensorPar) {
  RulePtr tp = pn::cut_elimination_rules()[1];
  Process host = parse_process("tensor(X1,Y1,C1),par(X2,Y2,C2),cut{+C1,+C2},a(X1),b(Y1),c(X2),d(Y2).");
  auto ms = find_matches(tp, host);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(brute_congruent(apply_match(host, ms[0]),
                              parse_process("cut{+X1,+X2},cut{+Y1,+Y2},a(X1),b(Y1),c(X2),d(Y2).")));
}

TEST(Match, EmptyHost) {
  for (const RulePtr& r : pn::cut_elimination_rules()) EXPECT_TRUE(find_matches(r, Process{}).empty());
}

TEST(Match, ClosedContextNeedsExactLinks) {
  RulePtr r = parse_rule("{a,$p[X]}, b(X) :- ok.");
  EXPECT_EQ(find_matches(r, parse_process("{a,c(X)}, b(X).")).size(), 1u);
  EXPECT_EQ(find_matches(r, parse_process("{a,c(X),d}, b(X).")).size(), 1u);
  EXPECT_TRUE(find_matches(r, parse_process("{a,c(X),d(Y)}, b(X), e(Y).")).empty());
}

TEST(Match, CellWithoutContextMatchesExactly) {
  RulePtr r = parse_rule("{a} :- ok.");
  EXPECT_EQ(find_matches(r, parse_process("{a}.")).size(), 1u);
  EXPECT_TRUE(find_matches(r, parse_process("{a,b}.")).empty());
}

TEST(Match, ProcessContextsDoNotMatchRules) {
  RulePtr r = parse_rule("{k,$p} :- ok.");
  EXPECT_EQ(find_matches(r, parse_process("{k,x}.")).size(), 1u);
  EXPECT_TRUE(find_matches(r, parse_process("{k,x,(a:-b)}.")).empty());
  RulePtr with_rc = parse_rule("{k,$p,@r} :- {$p,@r}.");
  Process host = parse_process("{k,x,(a:-b)}.");
  auto ms = find_matches(with_rc, host);
  ASSERT_EQ(ms.size(), 1u);
  Process out = apply_match(host, ms[0]);
  ASSERT_EQ(out.cells.size(), 1u);
  ASSERT_EQ(out.cells[0].body.rules.size(), 1u);
  EXPECT_EQ(out.cells[0].body.rules[0].get(), host.cells[0].body.rules[0].get());
}

TEST(Rewrite, AggregateExpansion) {
  RulePtr r = parse_rule("{$p[X|*Z]}, a(X) :- d(*Z).");
  Process three = parse_process("{h(X,Z1,Z2,Z3)}, a(X), u(Z1), u(Z2), u(Z3).");
  auto ms = find_matches(r, three);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(brute_congruent(apply_match(three, ms[0]), parse_process("d(Z1),d(Z2),d(Z3),u(Z1),u(Z2),u(Z3).")));
  Process none = parse_process("{h(X)}, a(X), keep.");
  ms = find_matches(r, none);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(brute_congruent(apply_match(none, ms[0]), parse_process("keep.")));
}

TEST(Rewrite, AggregateLengthMismatch) {
  RulePtr r = parse_rule("{$p[X|*A]}, {$q[Y|*B]}, k(X,Y) :- d(*A,*B).");
  Process host = parse_process("{h(X,A1)}, {h(Y,B1,B2)}, k(X,Y), u(A1), u(B1), u(B2).");
  auto ms = find_matches(r, host);
  ASSERT_FALSE(ms.empty());
  EXPECT_THROW(apply_match(host, ms[0]), RewriteError);
}

TEST(Rewrite, RuleContextKeepsRulesVerbatim) {
  RulePtr pd = pn::cut_elimination_rules()[3];
  ASSERT_EQ(pd->name, "promotion_dereliction");
  Process host = parse_process("{'!'(X1,X2), p(X1), (go :- gone)}, cut{+X2,+X3}, '?d'(X4,X3), q(X4).");
  auto ms = find_matches(pd, host);
  ASSERT_EQ(ms.size(), 1u);
  Process out = apply_match(host, ms[0]);
  ASSERT_EQ(out.rules.size(), 1u);
  EXPECT_EQ(out.rules[0].get(), host.cells[0].body.rules[0].get());
  out.rules.clear();
  EXPECT_TRUE(brute_congruent(out, parse_process("cut{+X1,+X4}, p(X1), q(X4).")));
}

TEST(Rewrite, LocalRulesRewriteTheirMembrane) {
  Process host = parse_process("{a, (a :- b)}, a.");
  auto succ = step_all(host, {});
  ASSERT_EQ(succ.size(), 1u);
  Process want = parse_process("{b, (a :- b)}, a.");
  EXPECT_EQ(canonical_form(succ[0].state), canonical_form(want));
}

TEST(Step, Fig13HasAxCut) {
  auto succ = step_all(pn::fixture("fig2a"), pn::cut_elimination_rules());
  ASSERT_FALSE(succ.empty());
  bool ax_cut = false;
  for (auto& s : succ) {
    ax_cut |= s.rule == "ax_cut";
    EXPECT_TRUE(validate_link_condition(s.state).ok());
  }
  EXPECT_TRUE(ax_cut);
}

TEST(Step, NormalFormsAreIrreducible) {
  EXPECT_TRUE(step_all(pn::fixture("fig2b"), pn::cut_elimination_rules()).empty());
  EXPECT_TRUE(step_all(pn::fixture("fig2b_contracted"), pn::cut_elimination_rules()).empty());
  EXPECT_TRUE(step_all(pn::fixture("fig2a"), {}).empty());
}

TEST(Step, CommutesWithCongruence) {
  lmn::testing::Rng rng(3);
  auto rules = pn::cut_elimination_rules();
  Process fig = pn::fixture("fig9");
  auto want = successor_forms(fig, rules);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(successor_forms(lmn::testing::shuffle_rename(fig, rng), rules), want);
}

TEST(Ambient, OpenReplCopiesThenCleansUp) {
  auto rules = pn::fixture("ambient_open_repl").rules;
  Process state = pn::fixture("ambient_host");
  std::vector<std::string> trace;
  for (int i = 0; i < 8; ++i) {
    auto next = step_all(state, rules, true);
    if (next.empty()) break;
    trace.push_back(next[0].rule);
    state = next[0].state;
    EXPECT_TRUE(validate_link_condition(state).ok()) << pretty_print(state);
  }
  ASSERT_GE(trace.size(), 2u);
  EXPECT_EQ(trace[0], "open_repl");
  EXPECT_EQ(trace[1], "mell.copy");
  EXPECT_FALSE(is_transient(state));
}
