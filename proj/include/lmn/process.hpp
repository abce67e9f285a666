#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmn/symbol.hpp"

namespace lmn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Link Condition violated where an operation requires it.
class LinkConditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed rule, bad API usage, aggregate length mismatch.
class RewriteError : public Error {
 public:
  using Error::Error;
};

struct Atom {
  Symbol functor = 0;
  std::vector<LinkId> args;

  std::size_t arity() const { return args.size(); }
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Rule;
using RulePtr = std::shared_ptr<const Rule>;

struct Cell;

/// A process: multisets of atoms, cells and rules. Order of the vectors is
/// not significant; equality modulo congruence lives in canonical.hpp.
struct Process {
  std::vector<Atom> atoms;
  std::vector<Cell> cells;
  std::vector<RulePtr> rules;

  bool empty() const { return atoms.empty() && cells.empty() && rules.empty(); }
  void append(Process other);
};

struct Cell {
  Symbol name = 0;
  Process body;
};

inline void Process::append(Process other) {
  atoms.insert(atoms.end(), std::make_move_iterator(other.atoms.begin()),
               std::make_move_iterator(other.atoms.end()));
  cells.insert(cells.end(), std::make_move_iterator(other.cells.begin()),
               std::make_move_iterator(other.cells.end()));
  rules.insert(rules.end(), other.rules.begin(), other.rules.end());
}

// ---------------------------------------------------------------------------
// Templates. Link arguments are indices into Rule::links, bundles into
// Rule::bundles; both tables hold the names as written in the source.

using VarId = std::uint32_t;

struct TemplateAtom {
  Symbol functor = 0;
  std::vector<VarId> args;
};

/// `p(*X1,...,*Xn)`: |*Xi| atoms, the i-th taking the i-th member of each bundle.
struct TemplateAggregate {
  Symbol functor = 0;
  std::vector<VarId> bundles;
};

/// `$p[X1,...,Xn|*A]`, `$p[X1,...,Xn]` or bare `$p` (open: any extra free links,
/// which keep their identity when the context is re-inserted).
struct ProcessContext {
  std::string name;
  std::vector<VarId> links;
  std::optional<VarId> bundle;
  bool open = false;
};

/// `$p[*X1,...,*Xn]`, n > 0.
struct AggregateContext {
  std::string name;
  std::vector<VarId> bundles;
};

struct RuleContext {
  std::string name;
};

struct TemplateCell;

struct Template {
  std::vector<TemplateAtom> atoms;
  std::vector<TemplateCell> cells;
  std::vector<ProcessContext> contexts;
  std::vector<AggregateContext> aggregate_contexts;
  std::vector<RuleContext> rule_contexts;
  std::vector<TemplateAggregate> aggregates;
  std::vector<RulePtr> rules;
};

struct TemplateCell {
  Symbol name = 0;
  Template body;
};

struct Rule {
  std::string name;
  Template lhs;
  Template rhs;
  std::vector<std::string> links;
  std::vector<std::string> bundles;
};

}  // namespace lmn
