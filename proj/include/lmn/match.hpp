#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lmn/connectors.hpp"
#include "lmn/links.hpp"
#include "lmn/process.hpp"

namespace lmn {

/// Flattened, indexed view of a host process. Cell 0 is the root.
class HostView {
 public:
  struct CellInfo {
    const Process* proc;
    int parent;
    Symbol name;
    int index;  // position in the parent's `cells`
    std::vector<int> atoms;
    std::vector<int> children;
  };
  struct AtomInfo {
    const Atom* atom;
    int cell;
    int index;  // position in the owner's `atoms`
  };
  struct Site {
    int atom = -1;
    int port = -1;
  };

  explicit HostView(const Process& root) : root_(&root) {
    cells_.push_back({&root, -1, 0, -1, {}, {}});
    add(root, 0);
  }

  const Process& root() const { return *root_; }
  const std::vector<CellInfo>& cells() const { return cells_; }
  const std::vector<AtomInfo>& atoms() const { return atoms_; }
  const CellInfo& cell(int c) const { return cells_[c]; }
  const AtomInfo& atom(int a) const { return atoms_[a]; }

  /// The occurrence of `l` other than (atom, port), if any.
  std::optional<Site> other_end(LinkId l, int atom, int port) const {
    auto it = sites_.find(l);
    if (it == sites_.end()) return std::nullopt;
    for (const Site& s : it->second)
      if (s.atom >= 0 && !(s.atom == atom && s.port == port)) return s;
    return std::nullopt;
  }

  /// Path of child indices from the root to cell `c`.
  std::vector<int> path(int c) const {
    std::vector<int> out;
    for (; c > 0; c = cells_[c].parent) out.push_back(cells_[c].index);
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Child of `ancestor` on the way to `c`; -1 if `c` is not strictly below it.
  int child_towards(int ancestor, int c) const {
    while (c > 0 && cells_[c].parent != ancestor) c = cells_[c].parent;
    return c > 0 ? c : -1;
  }

 private:
  void add(const Process& p, int id) {
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
      int a = static_cast<int>(atoms_.size());
      atoms_.push_back({&p.atoms[i], id, static_cast<int>(i)});
      cells_[id].atoms.push_back(a);
      const Atom& atom = p.atoms[i];
      for (std::size_t k = 0; k < atom.args.size(); ++k) {
        auto& s = sites_[atom.args[k]];
        if (s[0].atom < 0) s[0] = {a, static_cast<int>(k)};
        else s[1] = {a, static_cast<int>(k)};
      }
    }
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      int c = static_cast<int>(cells_.size());
      cells_.push_back({&p.cells[i].body, id, p.cells[i].name, static_cast<int>(i), {}, {}});
      cells_[id].children.push_back(c);
      add(p.cells[i].body, c);
    }
  }

  const Process* root_;
  std::vector<CellInfo> cells_;
  std::vector<AtomInfo> atoms_;
  std::unordered_map<LinkId, std::array<Site, 2>> sites_;
};

struct ContextBinding {
  int pattern_cell = -1;
  int host_cell = -1;
  std::vector<LinkId> required;  // host links for the declared links, in order
  std::vector<LinkId> bundle;    // remaining free links (empty for closed contexts)
};

struct Match {
  RulePtr rule;
  int level = 0;                            // host cell the rule rewrites (0: root)
  std::vector<int> atom_map;                // pattern atom -> host atom
  std::vector<int> cell_map;                // pattern cell -> host cell; [0] == level
  std::vector<LinkId> links;                // link variable -> host link (kNoLink: RHS only)
  std::vector<std::optional<std::vector<LinkId>>> bundles;  // bundle variable -> links
  std::unordered_map<std::string, ContextBinding> contexts;
  std::unordered_map<std::string, int> rule_contexts;  // name -> host cell
};

namespace detail {

// Static search plan for one rule head.
struct CompiledRule {
  struct PCell {
    int parent = -1;
    Symbol name = 0;
    const Template* body = nullptr;
    std::vector<int> atoms;
    std::vector<int> children;
  };
  struct PAtom {
    const TemplateAtom* atom;
    int cell;
  };
  enum class StepKind { Link, Enum, CellEnum };
  struct Step {
    StepKind kind;
    int target;           // pattern atom or cell
    int port = -1;        // Link: port of target carrying the variable
    int via_atom = -1;    // Link: already matched pattern atom
    int via_port = -1;
  };

  RulePtr rule;
  std::vector<PCell> cells;
  std::vector<PAtom> atoms;
  std::vector<Step> plan;

  explicit CompiledRule(RulePtr r) : rule(std::move(r)) {
    cells.push_back({-1, 0, &rule->lhs, {}, {}});
    flatten(rule->lhs, 0);
    make_plan();
  }

  void flatten(const Template& t, int id) {
    for (const TemplateAtom& a : t.atoms) {
      cells[id].atoms.push_back(static_cast<int>(atoms.size()));
      atoms.push_back({&a, id});
    }
    for (const TemplateCell& c : t.cells) {
      int child = static_cast<int>(cells.size());
      cells.push_back({id, c.name, &c.body, {}, {}});
      cells[id].children.push_back(child);
      flatten(c.body, child);
    }
  }

  void make_plan() {
    std::vector<std::vector<std::pair<int, int>>> occ(rule->links.size());
    for (std::size_t a = 0; a < atoms.size(); ++a)
      for (std::size_t k = 0; k < atoms[a].atom->args.size(); ++k)
        occ[atoms[a].atom->args[k]].emplace_back(static_cast<int>(a), static_cast<int>(k));
    std::vector<char> atom_done(atoms.size(), 0), cell_done(cells.size(), 0);
    cell_done[0] = 1;
    auto mark_ancestors = [&](int c) {
      for (; c > 0 && !cell_done[c]; c = cells[c].parent) cell_done[c] = 1;
    };
    auto is_sign = [&](int a) {
      Symbol f = atoms[a].atom->functor;
      return f == sym::plus() || f == sym::minus();
    };
    std::size_t remaining = atoms.size() + cells.size() - 1;
    while (remaining > 0) {
      bool progressed = false;
      // 1. an atom reachable through a link from a planned atom
      for (std::size_t a = 0; a < atoms.size() && !progressed; ++a) {
        if (atom_done[a]) continue;
        for (std::size_t k = 0; k < atoms[a].atom->args.size() && !progressed; ++k) {
          for (auto [b, kb] : occ[atoms[a].atom->args[k]]) {
            if (b == static_cast<int>(a) || !atom_done[b]) continue;
            plan.push_back({StepKind::Link, static_cast<int>(a), static_cast<int>(k), b, kb});
            atom_done[a] = 1;
            --remaining;
            for (int c = atoms[a].cell; c > 0 && !cell_done[c]; c = cells[c].parent) --remaining;
            mark_ancestors(atoms[a].cell);
            progressed = true;
            break;
          }
        }
      }
      if (progressed) continue;
      // 2. an atom in a bound cell; sign atoms (`+`, `-`) last, they are plentiful
      for (int pass = 0; pass < 2 && !progressed; ++pass) {
        for (std::size_t a = 0; a < atoms.size(); ++a) {
          if (atom_done[a] || !cell_done[atoms[a].cell] || (pass == 0 && is_sign(static_cast<int>(a))))
            continue;
          if (pass == 1) {
            // prefer binding a cell first when its sign atoms would be enumerated blindly
            bool unbound_cell = false;
            for (std::size_t c = 1; c < cells.size(); ++c)
              if (!cell_done[c] && cell_done[cells[c].parent]) unbound_cell = true;
            if (unbound_cell && atoms[a].cell == 0) continue;
          }
          plan.push_back({StepKind::Enum, static_cast<int>(a)});
          atom_done[a] = 1;
          --remaining;
          progressed = true;
          break;
        }
      }
      if (progressed) continue;
      // 3. a cell under a bound cell
      for (std::size_t c = 1; c < cells.size(); ++c) {
        if (cell_done[c] || !cell_done[cells[c].parent]) continue;
        plan.push_back({StepKind::CellEnum, static_cast<int>(c)});
        cell_done[c] = 1;
        --remaining;
        progressed = true;
        break;
      }
      if (!progressed) {
        // only root sign atoms left while cells remain: enumerate them anyway
        for (std::size_t a = 0; a < atoms.size(); ++a) {
          if (atom_done[a] || !cell_done[atoms[a].cell]) continue;
          plan.push_back({StepKind::Enum, static_cast<int>(a)});
          atom_done[a] = 1;
          --remaining;
          progressed = true;
          break;
        }
      }
      if (!progressed) throw RewriteError("cannot plan rule head: " + rule->name);
    }
  }
};

inline std::shared_ptr<const CompiledRule> compile(const RulePtr& r) {
  static std::mutex mu;
  static std::unordered_map<const Rule*, std::shared_ptr<const CompiledRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[r.get()];
  if (!slot || slot->rule != r) slot = std::make_shared<const CompiledRule>(r);
  return slot;
}

// Links occurring once in the given atoms and cells of one host cell, in
// first-occurrence order (atoms first, then cells depth-first).
inline std::vector<LinkId> remainder_free_links(const HostView& host, const std::vector<int>& atoms,
                                                const std::vector<int>& cells) {
  std::unordered_map<LinkId, int> count;
  std::vector<LinkId> order;
  auto see = [&](LinkId l) {
    if (count[l]++ == 0) order.push_back(l);
  };
  std::function<void(const Process&)> deep = [&](const Process& p) {
    for (const Atom& a : p.atoms)
      for (LinkId l : a.args) see(l);
    for (const Cell& c : p.cells) deep(c.body);
  };
  for (int a : atoms)
    for (LinkId l : host.atom(a).atom->args) see(l);
  for (int c : cells) deep(*host.cell(c).proc);
  std::vector<LinkId> out;
  for (LinkId l : order)
    if (count[l] == 1) out.push_back(l);
  return out;
}

class Matcher {
 public:
  Matcher(const CompiledRule& rule, const HostView& host, int level)
      : rule_(rule), host_(host), level_(level) {
    atom_map_.assign(rule.atoms.size(), -1);
    cell_map_.assign(rule.cells.size(), -1);
    cell_map_[0] = level;
    links_.assign(rule.rule->links.size(), kNoLink);
    bundles_.assign(rule.rule->bundles.size(), std::nullopt);
    used_atom_.assign(host.atoms().size(), 0);
    used_cell_.assign(host.cells().size(), 0);
  }

  std::vector<Match> run(std::size_t limit = static_cast<std::size_t>(-1)) {
    limit_ = limit;
    step(0);
    return std::move(out_);
  }

 private:
  using Step = CompiledRule::Step;
  using StepKind = CompiledRule::StepKind;

  bool full() const { return out_.size() >= limit_; }

  void step(std::size_t i) {
    if (full()) return;
    if (i == rule_.plan.size()) {
      finish_cells(1);
      return;
    }
    const Step& s = rule_.plan[i];
    switch (s.kind) {
      case StepKind::Enum: {
        const auto& pa = rule_.atoms[s.target];
        int hc = cell_map_[pa.cell];
        for (int ha : host_.cell(hc).atoms) {
          if (full()) return;
          try_atom(s.target, ha, [&] { step(i + 1); });
        }
        return;
      }
      case StepKind::Link: {
        VarId v = rule_.atoms[s.target].atom->args[s.port];
        LinkId l = links_[v];
        auto far = host_.other_end(l, atom_map_[s.via_atom], s.via_port);
        if (!far || far->port != s.port) return;
        try_atom(s.target, far->atom, [&] { step(i + 1); });
        return;
      }
      case StepKind::CellEnum: {
        const auto& pc = rule_.cells[s.target];
        int parent = cell_map_[pc.parent];
        for (int hc : host_.cell(parent).children) {
          if (full()) return;
          if (used_cell_[hc] || host_.cell(hc).name != pc.name) continue;
          cell_map_[s.target] = hc;
          used_cell_[hc] = 1;
          step(i + 1);
          used_cell_[hc] = 0;
          cell_map_[s.target] = -1;
        }
        return;
      }
    }
  }

  template <class K>
  void try_atom(int pa, int ha, K&& k) {
    const TemplateAtom& p = *rule_.atoms[pa].atom;
    const Atom& h = *host_.atom(ha).atom;
    if (used_atom_[ha] || h.functor != p.functor || h.args.size() != p.args.size()) return;
    // bind the enclosing cells upwards until a bound one
    std::vector<int> bound_cells;
    bool ok = true;
    int pc = rule_.atoms[pa].cell, hc = host_.atom(ha).cell;
    while (true) {
      if (cell_map_[pc] >= 0) {
        ok = cell_map_[pc] == hc;
        break;
      }
      if (hc <= 0 || hc == level_ || used_cell_[hc] || host_.cell(hc).name != rule_.cells[pc].name) {
        ok = false;
        break;
      }
      cell_map_[pc] = hc;
      used_cell_[hc] = 1;
      bound_cells.push_back(pc);
      pc = rule_.cells[pc].parent;
      hc = host_.cell(hc).parent;
    }
    std::vector<VarId> bound_links;
    if (ok) {
      for (std::size_t j = 0; j < p.args.size(); ++j) {
        VarId v = p.args[j];
        if (links_[v] == kNoLink) {
          links_[v] = h.args[j];
          bound_links.push_back(v);
        } else if (links_[v] != h.args[j]) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      atom_map_[pa] = ha;
      used_atom_[ha] = 1;
      k();
      used_atom_[ha] = 0;
      atom_map_[pa] = -1;
    }
    for (VarId v : bound_links) links_[v] = kNoLink;
    for (int c : bound_cells) {
      used_cell_[cell_map_[c]] = 0;
      cell_map_[c] = -1;
    }
  }

  // Per-cell constraints: exact contents, or the remainder bound by a context.
  void finish_cells(std::size_t c) {
    if (full()) return;
    if (c == rule_.cells.size()) {
      emit();
      return;
    }
    const auto& pc = rule_.cells[c];
    int hc = cell_map_[c];
    const auto& info = host_.cell(hc);
    std::vector<int> rest_atoms, rest_cells;
    for (int a : info.atoms)
      if (!used_atom_[a]) rest_atoms.push_back(a);
    for (int ch : info.children)
      if (!used_cell_[ch]) rest_cells.push_back(ch);
    const Template& t = *pc.body;
    if (t.rule_contexts.empty() && !info.proc->rules.empty()) return;
    if (t.contexts.empty() && t.aggregate_contexts.empty()) {
      if (!rest_atoms.empty() || !rest_cells.empty()) return;
      finish_cells(c + 1);
      return;
    }
    if (t.contexts.empty()) return;  // aggregate contexts never occur in heads
    const ProcessContext& ctx = t.contexts.front();
    std::vector<LinkId> free = remainder_free_links(host_, rest_atoms, rest_cells);
    bind_required(c, ctx, free, 0, {});
  }

  void bind_required(std::size_t c, const ProcessContext& ctx, const std::vector<LinkId>& free,
                     std::size_t i, std::vector<LinkId> taken) {
    if (full()) return;
    if (i < ctx.links.size()) {
      VarId v = ctx.links[i];
      auto available = [&](LinkId l) {
        return std::find(free.begin(), free.end(), l) != free.end() &&
               std::find(taken.begin(), taken.end(), l) == taken.end();
      };
      if (links_[v] != kNoLink) {
        if (!available(links_[v])) return;
        taken.push_back(links_[v]);
        bind_required(c, ctx, free, i + 1, std::move(taken));
        return;
      }
      for (LinkId l : free) {
        if (!available(l)) continue;
        links_[v] = l;
        auto next = taken;
        next.push_back(l);
        bind_required(c, ctx, free, i + 1, std::move(next));
        links_[v] = kNoLink;
      }
      return;
    }
    std::vector<LinkId> rest;
    for (LinkId l : free)
      if (std::find(taken.begin(), taken.end(), l) == taken.end()) rest.push_back(l);
    std::optional<std::vector<LinkId>> saved;
    if (ctx.bundle) {
      auto& slot = bundles_[*ctx.bundle];
      if (slot && *slot != rest) return;
      saved = slot;
      slot = rest;
    } else if (!ctx.open && !rest.empty()) {
      return;
    }
    contexts_[ctx.name] = {static_cast<int>(c), cell_map_[c], taken, ctx.bundle || ctx.open ? rest : std::vector<LinkId>{}};
    finish_cells(c + 1);
    contexts_.erase(ctx.name);
    if (ctx.bundle) bundles_[*ctx.bundle] = saved;
  }

  void emit() {
    Match m;
    m.rule = rule_.rule;
    m.level = level_;
    m.atom_map = atom_map_;
    m.cell_map = cell_map_;
    m.links = links_;
    m.bundles = bundles_;
    m.contexts = contexts_;
    for (std::size_t c = 1; c < rule_.cells.size(); ++c)
      for (const RuleContext& r : rule_.cells[c].body->rule_contexts) m.rule_contexts[r.name] = cell_map_[c];
    out_.push_back(std::move(m));
  }

  const CompiledRule& rule_;
  const HostView& host_;
  int level_;
  std::vector<int> atom_map_, cell_map_;
  std::vector<LinkId> links_;
  std::vector<std::optional<std::vector<LinkId>>> bundles_;
  std::vector<char> used_atom_, used_cell_;
  std::unordered_map<std::string, ContextBinding> contexts_;
  std::vector<Match> out_;
  std::size_t limit_ = 0;
};

// Renames every link of `p`: entries of `map` first, otherwise fresh links
// (one per distinct original), recorded into `map`.
inline void relink(Process& p, std::unordered_map<LinkId, LinkId>& map) {
  for (Atom& a : p.atoms)
    for (LinkId& l : a.args) {
      auto [it, inserted] = map.try_emplace(l, kNoLink);
      if (inserted) it->second = fresh_link();
      l = it->second;
    }
  for (Cell& c : p.cells) relink(c.body, map);
}

inline Process* descend(Process& root, const std::vector<int>& path) {
  Process* p = &root;
  for (int i : path) p = &p->cells[i].body;
  return p;
}

}  // namespace detail

/// All matches of `rule`'s head against the contents of host cell `level`.
inline std::vector<Match> find_matches(const Rule& rule, const HostView& host, int level = 0) {
  // the cache wants ownership; a non-owning alias is fine for the call
  RulePtr alias(std::shared_ptr<const Rule>{}, &rule);
  detail::CompiledRule compiled(alias);
  return detail::Matcher(compiled, host, level).run();
}

inline std::vector<Match> find_matches(const RulePtr& rule, const HostView& host, int level = 0) {
  auto compiled = detail::compile(rule);
  return detail::Matcher(*compiled, host, level).run();
}

inline std::vector<Match> find_matches(const RulePtr& rule, const Process& host) {
  HostView view(host);
  return find_matches(rule, view, 0);
}

/// Rewrites the matched image into the rule body (R6), then connector-normalizes.
inline Process apply_match(const HostView& host, const Match& m) {
  const Rule& rule = *m.rule;
  std::vector<char> used_atom(host.atoms().size(), 0), used_cell(host.cells().size(), 0);
  for (int a : m.atom_map) used_atom[a] = 1;
  for (std::size_t c = 1; c < m.cell_map.size(); ++c) used_cell[m.cell_map[c]] = 1;

  // contents bound by each process context
  auto remainder = [&](int hc) {
    Process r;
    const auto& info = host.cell(hc);
    for (int a : info.atoms)
      if (!used_atom[a]) r.atoms.push_back(*host.atom(a).atom);
    for (int ch : info.children)
      if (!used_cell[ch]) r.cells.push_back(Cell{host.cell(ch).name, *host.cell(ch).proc});
    return r;
  };

  const auto& level = host.cell(m.level);
  Process out;
  for (int a : level.atoms)
    if (!used_atom[a]) out.atoms.push_back(*host.atom(a).atom);
  for (int ch : level.children)
    if (!used_cell[ch]) out.cells.push_back(Cell{host.cell(ch).name, *host.cell(ch).proc});
  out.rules = level.proc->rules;

  std::vector<LinkId> links = m.links;
  auto link = [&](VarId v) {
    if (links[v] == kNoLink) links[v] = fresh_link();
    return links[v];
  };
  std::vector<std::optional<std::vector<LinkId>>> bundles = m.bundles;
  auto bind_fresh = [&](VarId b, std::size_t n) -> const std::vector<LinkId>& {
    if (!bundles[b]) {
      std::vector<LinkId> ls(n);
      for (auto& l : ls) l = fresh_link();
      bundles[b] = std::move(ls);
    }
    return *bundles[b];
  };
  std::unordered_set<std::string> consumed;

  // Re-inserts (first use) or clones (later uses) a context's contents with its
  // declared links and bundle mapped per the body occurrence.
  auto instantiate_context = [&](const ProcessContext& c, Process& into) {
    const ContextBinding& bind = m.contexts.at(c.name);
    if (c.links.size() != bind.required.size())
      throw RewriteError("context $" + c.name + " used with a different number of links");
    Process r = remainder(bind.host_cell);
    std::unordered_map<LinkId, LinkId> map;
    bool first = consumed.insert(c.name).second;
    for (std::size_t i = 0; i < c.links.size(); ++i) map[bind.required[i]] = link(c.links[i]);
    if (c.bundle) {
      const auto& target = bind_fresh(*c.bundle, bind.bundle.size());
      if (target.size() != bind.bundle.size())
        throw RewriteError("bundle *" + rule.bundles[*c.bundle] + " has the wrong length");
      for (std::size_t i = 0; i < target.size(); ++i) map[bind.bundle[i]] = target[i];
    } else if (first || bind.bundle.empty()) {
      for (LinkId l : bind.bundle) map[l] = l;
    } else {
      throw RewriteError("open context $" + c.name + " with free links cannot be copied");
    }
    if (first) {
      // the original keeps its local links
      std::unordered_map<LinkId, int> count;
      detail::tally_links(r, count);
      for (auto [l, n] : count)
        if (n == 2) map.emplace(l, l);
    }
    detail::relink(r, map);
    into.append(std::move(r));
  };

  struct Deferred {
    std::vector<int> path;  // cell indices from `out`
    const Template* t;
  };
  std::vector<Deferred> deferred;
  std::vector<int> path;

  std::function<void(const Template&, Process&)> build = [&](const Template& t, Process& into) {
    for (const TemplateAtom& a : t.atoms) {
      Atom atom{a.functor, {}};
      for (VarId v : a.args) atom.args.push_back(link(v));
      into.atoms.push_back(std::move(atom));
    }
    for (const ProcessContext& c : t.contexts) instantiate_context(c, into);
    for (const TemplateCell& c : t.cells) {
      into.cells.push_back(Cell{c.name, {}});
      path.push_back(static_cast<int>(into.cells.size()) - 1);
      build(c.body, into.cells.back().body);
      path.pop_back();
    }
    for (const RuleContext& r : t.rule_contexts) {
      const auto& rules = host.cell(m.rule_contexts.at(r.name)).proc->rules;
      into.rules.insert(into.rules.end(), rules.begin(), rules.end());
    }
    into.rules.insert(into.rules.end(), t.rules.begin(), t.rules.end());
    if (!t.aggregates.empty() || !t.aggregate_contexts.empty()) deferred.push_back({path, &t});
  };
  build(rule.rhs, out);

  for (const Deferred& d : deferred) {
    Process* into = detail::descend(out, d.path);
    const Template& t = *d.t;
    auto length = [&](const std::vector<VarId>& bs, const std::string& what) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        if (!bundles[bs[i]]) throw RewriteError("bundle *" + rule.bundles[bs[i]] + " is unbound in " + what);
        if (i == 0) n = bundles[bs[i]]->size();
        else if (bundles[bs[i]]->size() != n)
          throw RewriteError("bundles of different lengths in " + what);
      }
      return n;
    };
    for (const TemplateAggregate& a : t.aggregates) {
      std::size_t n = length(a.bundles, symbol_text(a.functor));
      for (std::size_t i = 0; i < n; ++i) {
        Atom atom{a.functor, {}};
        for (VarId b : a.bundles) atom.args.push_back((*bundles[b])[i]);
        into->atoms.push_back(std::move(atom));
      }
    }
    for (const AggregateContext& c : t.aggregate_contexts) {
      std::size_t n = length(c.bundles, "$" + c.name);
      const ContextBinding& bind = m.contexts.at(c.name);
      if (bind.required.size() != c.bundles.size())
        throw RewriteError("aggregate context $" + c.name + " has the wrong number of bundles");
      if (!bind.bundle.empty())
        throw RewriteError("aggregate context $" + c.name + " binds extra free links");
      Process base = remainder(bind.host_cell);
      for (std::size_t i = 0; i < n; ++i) {
        Process copy = base;
        std::unordered_map<LinkId, LinkId> map;
        for (std::size_t j = 0; j < c.bundles.size(); ++j) map[bind.required[j]] = (*bundles[c.bundles[j]])[i];
        detail::relink(copy, map);
        into->append(std::move(copy));
      }
    }
  }

  Process result;
  if (m.level == 0) {
    result = std::move(out);
  } else {
    result = host.root();
    *detail::descend(result, host.path(m.level)) = std::move(out);
  }
  return normalize_connectors(std::move(result));
}

inline Process apply_match(const Process& host, const Match& m) {
  HostView view(host);
  return apply_match(view, m);
}

}  // namespace lmn
