#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lmn/parser.hpp"

namespace lmn::pn {

namespace text {

// Cut elimination for MELL proof nets.
inline constexpr std::string_view kCutElimination = R"(ax_cut@@ cut{+X,+Y}, ax{+Y,+Z} :- X=Z.
tensor_par@@ tensor(X1,Y1,XY1), par(X2,Y2,XY2), cut{+XY1,+XY2} :- cut{+X1,+X2}, cut{+Y1,+Y2}.
promotion_promotion@@ {'!'(X1,X2), $p[X1|*X]}, cut{+X2,+X3}, {$q[X3|*Y]} :- {{'!'(X1,X2), $p[X1|*X]}, cut{+X2,+X3}, $q[X3|*Y]}.
promotion_dereliction@@ {'!'(X1,X2), $p[X1|*X], @r}, cut{+X2,+X3}, '?d'(X4,X3) :- cut{+X1,+X4}, $p[X1|*X], @r.
promotion_weakening@@ {'!'(X1,X2), $p[X1|*X]}, cut{+X2,+X3}, '?w'(X3) :- mell.delete(X1,W), {$p[X1|*X]}, {'?w'(W)}.
promotion_contraction@@ {'!'(X1,X2), $p[X1|*X]}, cut{+X2,+X3}, '?c'({+C1,+C2}, X3) :- mell.copy(X2,A1,A2,A3,B1,B2,C1,C2),{'!'(X1,X2),$p[X1|*X]}, {'?c'({+A1,+A2}, A3)}, {cut{+B1,+B2}}.
)";

// Push / pull of ?c and ?w across a box boundary.
inline constexpr std::string_view kContractionPull = R"(contraction_pull@@ {'!'(X1,X2), '?c'(I,X5), {+I,+X3,+X4}, $p[X1,X3,X4|*X]} :- {'!'(X1,X2), $p[X1,X3,X4|*X]}, '?c'(I,X5), {+I,+X3,+X4}.
)";
inline constexpr std::string_view kContractionPush = R"(contraction_push@@ {'!'(X1,X2), $p[X1,X3,X4|*X]}, '?c'(I,X5), {+I,+X3,+X4} :- {'!'(X1,X2), $p[X1,X3,X4|*X], '?c'(I,X5), {+I,+X3,+X4}}.
)";
inline constexpr std::string_view kWeakeningPull = R"(weakening_pull@@ {'!'(X1,X2), '?w'(X3), $p[X1|*X]} :- {'!'(X1,X2), $p[X1|*X]}, '?w'(X3).
)";
inline constexpr std::string_view kWeakeningPush = R"(weakening_push@@ {'!'(X1,X2), $p[X1|*X]}, '?w'(X3) :- {'!'(X1,X2), '?w'(X3), $p[X1|*X]}.
)";

// (λf.λx.f x)(λx.x)
inline constexpr std::string_view kFig2a = R"(ax{+A1,+A2}, '?d'(A1,A3), '?w'(A4),
{ax{+B1,+B2}, '?d'(B1,B3), '?w'(B4), '!'(B2,B5)},
'?c'({+A3,+B4},C1), '?c'({+A4,+B3},C2),
tensor(B5,T1,D2), ax{+T1,+T2}, cut{+A2,+D2}, par(C2,T2,P1), par(C1,P1,F),
{ax{+E1,+E2}, '?d'(E1,E3), par(E3,E2,E4), '!'(E4,E5)},
tensor(E5,T3,D4), ax{+T3,+T4}, cut{+F,+D4},
formula(T4).
)";

// λx.x as a bare ?d / ⅋ / ax net.
inline constexpr std::string_view kFig2b = R"(ax{+E1,+E2}, '?d'(E1,E3), par(E3,E2,E4), formula(E4).
)";

// λx.x as fig2a actually normalizes: the context of x keeps a ?c joining
// the dereliction with a weakening (no cut elimination rule removes it).
inline constexpr std::string_view kFig2bContracted = R"(ax{+E1,+E2}, '?d'(E1,E3), '?w'(W), '?c'({+E3,+W},C),
par(C,E2,E4), formula(E4).
)";

// (λf.λx.f(f x))(λx.x), built the same way as fig2a: every subterm carries
// its whole context, unused variables are weakened, contexts are merged with
// ?c at each application.
inline constexpr std::string_view kFig9 = R"(ax{+A1,+A2}, '?d'(A1,A3), '?w'(A4),
{ax{+G1,+G2}, '?d'(G1,G3), '?w'(G4),
 {ax{+B1,+B2}, '?d'(B1,B3), '?w'(B4), '!'(B2,B5)},
 '?c'({+G3,+B4},H1), '?c'({+G4,+B3},H2),
 tensor(B5,T1,D2), ax{+T1,+T2}, cut{+G2,+D2}, '!'(T2,K5)},
'?c'({+A3,+H1},C1), '?c'({+A4,+H2},C2),
tensor(K5,U1,U2), ax{+U1,+U3}, cut{+A2,+U2}, par(C2,U3,P1), par(C1,P1,F),
{ax{+E1,+E2}, '?d'(E1,E3), par(E3,E2,E4), '!'(E4,E5)},
tensor(E5,T3,D4), ax{+T3,+T4}, cut{+F,+D4},
formula(T4).
)";

// Ambient calculus: !(open m.P) | m[Q] -> P | Q | !(open m.P)
inline constexpr std::string_view kAmbientOpenRepl = R"(open_repl@@
  open_repl(M,{$p}), {amb(M1),{id,+M1,-M2,$mm},$q,@q}, {id,+M,+M2,$m}
    :- mell.copy({$p},A1,A2,A3,B1,B2,remove,P), {cp(A1,A2,A3)},
       {B1=B2}, $q, {id,+M3,$m,$mm}, open_repl(M3,P).

open_repl_aux@@ remove({$p}):- $p.
)";

// One replication of `open m.p` next to an ambient m holding q.
inline constexpr std::string_view kAmbientHost = R"(open_repl(M,{p}), {amb(M1),{id,+M1,-M2},q}, {id,+M,+M2}.
)";

}  // namespace text

/// The six cut elimination rules.
inline std::vector<RulePtr> cut_elimination_rules() {
  static const std::vector<RulePtr> rules = parse_rules(text::kCutElimination);
  return rules;
}

inline const std::vector<std::string>& push_pull_names() {
  static const std::vector<std::string> names{"c_pull", "c_push", "w_pull", "w_push"};
  return names;
}

/// The selected push / pull rules, in the order c_pull, c_push, w_pull, w_push.
inline std::vector<RulePtr> push_pull_rules(const std::set<std::string>& sel) {
  static const std::map<std::string, std::vector<RulePtr>> all{
      {"c_pull", parse_rules(text::kContractionPull)},
      {"c_push", parse_rules(text::kContractionPush)},
      {"w_pull", parse_rules(text::kWeakeningPull)},
      {"w_push", parse_rules(text::kWeakeningPush)}};
  for (const auto& s : sel)
    if (!all.count(s)) throw Error("unknown rule set '" + s + "' (expected c_pull, c_push, w_pull, w_push)");
  std::vector<RulePtr> out;
  for (const auto& n : push_pull_names())
    if (sel.count(n)) out.insert(out.end(), all.at(n).begin(), all.at(n).end());
  return out;
}

/// `base+c_pull+w_push` and the like; `base` is cut elimination.
inline std::vector<RulePtr> rule_selection(const std::string& selection) {
  std::vector<RulePtr> out;
  std::set<std::string> extra;
  std::stringstream ss(selection);
  for (std::string part; std::getline(ss, part, '+');) {
    if (part == "base")
      out = cut_elimination_rules();
    else if (!part.empty())
      extra.insert(part);
  }
  auto more = push_pull_rules(extra);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

inline const std::map<std::string, std::string_view>& fixture_texts() {
  static const std::map<std::string, std::string_view> texts{
      {"fig2a", text::kFig2a},
      {"fig2b", text::kFig2b},
      {"fig2b_contracted", text::kFig2bContracted},
      {"fig9", text::kFig9},
      {"ambient_open_repl", text::kAmbientOpenRepl},
      {"ambient_host", text::kAmbientHost}};
  return texts;
}

/// Parsed fixtures; rule-only fixtures come back as processes holding rules.
inline std::map<std::string, Process> fixtures() {
  std::map<std::string, Process> out;
  for (const auto& [name, t] : fixture_texts()) out.emplace(name, parse_process(t));
  return out;
}

inline Process fixture(const std::string& name) {
  auto it = fixture_texts().find(name);
  if (it == fixture_texts().end()) throw Error("unknown fixture '" + name + "'");
  return parse_process(it->second);
}

}  // namespace lmn::pn
