#pragma once
// Generators and independent oracles shared by the unit tests and the
// acceptance runner.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmn/lmn.hpp"

namespace lmn::testing {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// ---------------------------------------------------------------------------
// Random processes

struct GenOptions {
  int max_atoms = 12;
  int max_depth = 3;
  int max_cells = 4;
  double connector_rate = 0.1;
  double free_rate = 0.15;
};

/// A random process satisfying the Link Condition: atoms over a small
/// alphabet spread over a random membrane tree, ports paired at random, some
/// left free under stable names F0, F1, ...
inline Process random_process(Rng& rng, const GenOptions& o = {}) {
  struct Node {
    int parent;
    int depth;
    Process body;
    Symbol name;
  };
  static const std::vector<std::pair<std::string, int>> alphabet{
      {"a", 1}, {"b", 2}, {"c", 2}, {"f", 3}, {"g", 0}, {"+", 1}, {"h", 1}};
  std::vector<Node> nodes{{-1, 0, {}, 0}};
  int ncells = uniform(rng, 0, o.max_cells);
  for (int i = 0; i < ncells; ++i) {
    std::vector<int> ok;
    for (int n = 0; n < static_cast<int>(nodes.size()); ++n)
      if (nodes[n].depth < o.max_depth) ok.push_back(n);
    int parent = ok[uniform(rng, 0, static_cast<int>(ok.size()) - 1)];
    Symbol name = uniform(rng, 0, 2) == 0 ? intern("m") : Symbol(0);
    nodes.push_back({parent, nodes[parent].depth + 1, {}, name});
  }
  struct Port {
    int node, atom, arg;
  };
  std::vector<Port> ports;
  int natoms = uniform(rng, 0, o.max_atoms);
  std::bernoulli_distribution conn(o.connector_rate);
  for (int i = 0; i < natoms; ++i) {
    int n = uniform(rng, 0, static_cast<int>(nodes.size()) - 1);
    Atom a;
    int arity;
    if (conn(rng)) {
      a.functor = sym::connector();
      arity = 2;
    } else {
      auto& [name, ar] = alphabet[uniform(rng, 0, static_cast<int>(alphabet.size()) - 1)];
      a.functor = intern(name);
      arity = ar;
    }
    a.args.assign(arity, kNoLink);
    for (int k = 0; k < arity; ++k) ports.push_back({n, static_cast<int>(nodes[n].body.atoms.size()), k});
    nodes[n].body.atoms.push_back(std::move(a));
  }
  std::shuffle(ports.begin(), ports.end(), rng);
  std::bernoulli_distribution free(o.free_rate);
  int next_free = 0, next_local = 0;
  auto set = [&](const Port& p, LinkId l) { nodes[p.node].body.atoms[p.atom].args[p.arg] = l; };
  for (std::size_t i = 0; i < ports.size();) {
    if (i + 1 == ports.size() || free(rng)) {
      set(ports[i], named_link("F" + std::to_string(next_free++)));
      ++i;
    } else {
      LinkId l = named_link("K" + std::to_string(next_local++));
      set(ports[i], l);
      set(ports[i + 1], l);
      i += 2;
    }
  }
  for (int n = static_cast<int>(nodes.size()) - 1; n > 0; --n)
    nodes[nodes[n].parent].body.cells.push_back(Cell{nodes[n].name, std::move(nodes[n].body)});
  return std::move(nodes[0].body);
}

/// Same process, elements shuffled at every level and local links renamed.
inline Process shuffle_rename(const Process& p, Rng& rng) {
  std::set<LinkId> keep = free_links(p);
  std::unordered_map<LinkId, LinkId> map;
  std::function<Process(const Process&)> go = [&](const Process& q) {
    Process out;
    out.atoms = q.atoms;
    for (Atom& a : out.atoms)
      for (LinkId& l : a.args) {
        if (keep.count(l)) continue;
        auto it = map.find(l);
        if (it == map.end()) it = map.emplace(l, fresh_link()).first;
        l = it->second;
      }
    for (const Cell& c : q.cells) out.cells.push_back(Cell{c.name, go(c.body)});
    out.rules = q.rules;
    std::shuffle(out.atoms.begin(), out.atoms.end(), rng);
    std::shuffle(out.cells.begin(), out.cells.end(), rng);
    return out;
  };
  return go(p);
}

/// A small edit that usually (not always) breaks congruence.
inline Process mutate(const Process& p, Rng& rng) {
  Process q = p;
  std::vector<Atom*> atoms;
  std::function<void(Process&)> walk = [&](Process& r) {
    for (Atom& a : r.atoms) atoms.push_back(&a);
    for (Cell& c : r.cells) walk(c.body);
  };
  walk(q);
  if (atoms.empty()) {
    q.atoms.push_back(Atom{intern("g"), {}});
    return q;
  }
  switch (uniform(rng, 0, 2)) {
    case 0: {  // swap two ports of one atom
      Atom* a = atoms[uniform(rng, 0, static_cast<int>(atoms.size()) - 1)];
      if (a->args.size() >= 2) std::swap(a->args[0], a->args[1]);
      break;
    }
    case 1: {  // swap the links of two ports in different atoms
      Atom* a = atoms[uniform(rng, 0, static_cast<int>(atoms.size()) - 1)];
      Atom* b = atoms[uniform(rng, 0, static_cast<int>(atoms.size()) - 1)];
      if (!a->args.empty() && !b->args.empty())
        std::swap(a->args[uniform(rng, 0, int(a->args.size()) - 1)], b->args[uniform(rng, 0, int(b->args.size()) - 1)]);
      break;
    }
    default: {  // rename an atom within its arity class
      Atom* a = atoms[uniform(rng, 0, static_cast<int>(atoms.size()) - 1)];
      if (a->args.size() == 2 && a->functor != sym::connector())
        a->functor = a->functor == intern("b") ? intern("c") : intern("b");
      else if (a->args.size() == 1)
        a->functor = a->functor == intern("a") ? intern("h") : intern("a");
      else
        q.atoms.push_back(Atom{intern("g"), {}});
      break;
    }
  }
  return q;
}

/// Rules over the generator's alphabet exercising atoms, connectors, open and
/// closed contexts, bundles and aggregates.
inline const std::vector<RulePtr>& property_rules() {
  static const std::vector<RulePtr> rules = parse_rules(R"(
relink@@ a(X), b(X,Y) :- c(Y,Z), a(Z).
fuse@@ b(X,Y) :- X=Y.
shrink@@ c(X,Y), h(Y) :- h(X).
enter@@ m{$p}, a(X) :- m{$p, a(X)}.
leave@@ m{g, $p} :- g, {$p}.
drop@@ m{$p[X|*Z]}, a(X) :- d(*Z).
wrap@@ f(X,Y,Z) :- m{f(X,Y,Z)}.
merge@@ {$p}, {$q}, g :- {$p, $q}.
)");
  return rules;
}

// ---------------------------------------------------------------------------
// Brute-force isomorphism of processes (no connector handling of its own:
// connectors are atoms whose two ports may be swapped).

namespace detail {

struct Flat {
  struct C {
    int parent;
    Symbol name;
    int natoms = 0, ncells = 0;
  };
  struct A {
    int cell;
    const Atom* atom;
  };
  std::vector<C> cells;  // 0 = root
  std::vector<A> atoms;
  std::map<LinkId, int> occ;
  std::size_t rules = 0;

  explicit Flat(const Process& p) {
    cells.push_back({-1, 0});
    add(p, 0);
  }
  void add(const Process& p, int c) {
    rules += p.rules.size();
    for (const Atom& a : p.atoms) {
      atoms.push_back({c, &a});
      ++cells[c].natoms;
      for (LinkId l : a.args) ++occ[l];
    }
    for (const Cell& ch : p.cells) {
      int id = static_cast<int>(cells.size());
      cells.push_back({c, ch.name});
      ++cells[c].ncells;
      add(ch.body, id);
    }
  }
};

class Iso {
 public:
  Iso(const Flat& a, const Flat& b) : a_(a), b_(b) {}

  bool run() {
    if (a_.cells.size() != b_.cells.size() || a_.atoms.size() != b_.atoms.size() || a_.rules || b_.rules)
      return false;
    cmap_.assign(a_.cells.size(), -1);
    cused_.assign(b_.cells.size(), 0);
    aused_.assign(b_.atoms.size(), 0);
    cmap_[0] = 0;
    cused_[0] = 1;
    if (a_.cells[0].natoms != b_.cells[0].natoms || a_.cells[0].ncells != b_.cells[0].ncells) return false;
    return cells(1);
  }

 private:
  const Flat& a_;
  const Flat& b_;
  std::vector<int> cmap_;
  std::vector<char> cused_, aused_;
  std::map<LinkId, LinkId> fwd_, bwd_;

  bool cells(std::size_t i) {
    if (i == a_.cells.size()) return atoms(0);
    const auto& c = a_.cells[i];
    for (std::size_t j = 1; j < b_.cells.size(); ++j) {
      const auto& d = b_.cells[j];
      if (cused_[j] || d.name != c.name || d.parent != cmap_[c.parent] || d.natoms != c.natoms ||
          d.ncells != c.ncells)
        continue;
      cmap_[i] = static_cast<int>(j);
      cused_[j] = 1;
      if (cells(i + 1)) return true;
      cused_[j] = 0;
      cmap_[i] = -1;
    }
    return false;
  }

  bool bind(LinkId x, LinkId y, std::vector<LinkId>& added) {
    bool fx = a_.occ.at(x) == 1, fy = b_.occ.at(y) == 1;
    if (fx != fy) return false;
    if (fx && x != y) return false;  // free links keep their names
    auto f = fwd_.find(x);
    auto g = bwd_.find(y);
    if (f != fwd_.end() || g != bwd_.end()) return f != fwd_.end() && g != bwd_.end() && f->second == y;
    fwd_[x] = y;
    bwd_[y] = x;
    added.push_back(x);
    return true;
  }

  void unbind(const std::vector<LinkId>& added) {
    for (LinkId x : added) {
      bwd_.erase(fwd_[x]);
      fwd_.erase(x);
    }
  }

  bool atoms(std::size_t i) {
    if (i == a_.atoms.size()) return true;
    const auto& x = a_.atoms[i];
    for (std::size_t j = 0; j < b_.atoms.size(); ++j) {
      const auto& y = b_.atoms[j];
      if (aused_[j] || y.cell != cmap_[x.cell] || y.atom->functor != x.atom->functor ||
          y.atom->args.size() != x.atom->args.size())
        continue;
      int orders = (x.atom->functor == sym::connector() && x.atom->args.size() == 2) ? 2 : 1;
      for (int o = 0; o < orders; ++o) {
        std::vector<LinkId> added;
        bool ok = true;
        std::size_t n = x.atom->args.size();
        for (std::size_t k = 0; k < n && ok; ++k)
          ok = bind(x.atom->args[k], y.atom->args[o ? n - 1 - k : k], added);
        if (ok) {
          aused_[j] = 1;
          if (atoms(i + 1)) return true;
          aused_[j] = 0;
        }
        unbind(added);
      }
    }
    return false;
  }
};

}  // namespace detail

/// Exact isomorphism of the two processes as written (rule-free processes).
inline bool brute_isomorphic(const Process& p, const Process& q) {
  detail::Flat a(p), b(q);
  return detail::Iso(a, b).run();
}

/// Structural congruence by connector normalization plus brute isomorphism.
inline bool brute_congruent(const Process& p, const Process& q) {
  return brute_isomorphic(normalize_connectors(p), normalize_connectors(q));
}

// ---------------------------------------------------------------------------
// Random proof structures

/// Valid (not necessarily correct) proof structure with at most `max_cells`
/// cells per level and boxes nested up to `depth`.
inline pn::ProofStructure random_net(Rng& rng, int max_cells = 8, int depth = 2) {
  int next_wire = 0, next_cell = 0, next_box = 0;
  struct Open {
    pn::WireId wire;
    bool why_not;
  };
  std::function<pn::ProofStructure(int, std::vector<Open>&)> level = [&](int d, std::vector<Open>& open) {
    pn::ProofStructure s;
    auto cell = [&](pn::Kind k, std::vector<pn::WireId> in) {
      pn::NetCell c{next_cell++, k, std::move(in), {}};
      for (std::size_t i = 0; i < pn::output_arity(k); ++i) {
        c.outputs.push_back(next_wire);
        open.push_back({next_wire++, pn::is_why_not(k)});
      }
      s.cells.push_back(std::move(c));
    };
    auto take = [&]() {
      int i = uniform(rng, 0, static_cast<int>(open.size()) - 1);
      pn::WireId w = open[i].wire;
      open.erase(open.begin() + i);
      return w;
    };
    int budget = uniform(rng, 1, max_cells);
    for (int made = 0; made < budget; ++made) {
      int r = uniform(rng, 0, 9);
      if (open.size() < 2 && r >= 3) r = uniform(rng, 0, 2);
      if (r == 0 || open.empty()) {
        cell(pn::Kind::Ax, {});
      } else if (r == 1) {
        cell(pn::Kind::Weak, {});
      } else if (r == 2) {
        if (d < depth && uniform(rng, 0, 1)) {
          std::vector<Open> inner;
          pn::Box b;
          b.id = next_box++;
          b.net = level(d + 1, inner);
          int i = uniform(rng, 0, static_cast<int>(inner.size()) - 1);
          pn::WireId in = inner[i].wire;
          inner.erase(inner.begin() + i);
          b.principal = next_wire++;
          b.net.cells.push_back({next_cell++, pn::Kind::Bang, {in}, {b.principal}});
          b.net.conclusions.push_back(b.principal);
          for (Open& o : inner) {
            pn::WireId w = o.wire;
            if (!o.why_not) {
              w = next_wire++;
              b.net.cells.push_back({next_cell++, pn::Kind::Derel, {o.wire}, {w}});
            }
            b.net.conclusions.push_back(w);
            b.auxiliaries.push_back(w);
          }
          open.push_back({b.principal, false});
          for (pn::WireId w : b.auxiliaries) open.push_back({w, true});
          s.boxes.push_back(std::move(b));
        } else {
          cell(pn::Kind::Derel, {take()});
        }
      } else {
        static const pn::Kind two[] = {pn::Kind::Tensor, pn::Kind::Par, pn::Kind::Cut, pn::Kind::Contr,
                                       pn::Kind::Par, pn::Kind::Tensor, pn::Kind::Contr};
        pn::Kind k = two[uniform(rng, 0, 6)];
        pn::WireId x = take(), y = take();
        cell(k, {x, y});
      }
    }
    if (open.empty()) cell(pn::Kind::Ax, {});
    return s;
  };
  std::vector<Open> open;
  pn::ProofStructure s = level(0, open);
  for (const Open& o : open) s.conclusions.push_back(o.wire);
  return s;
}

// Independent Danos-Regnier oracle: recursive enumeration of switchings,
// adjacency lists with edge ids, DFS cycle search.
namespace detail {

inline bool level_acyclic(const pn::ProofStructure& s) {
  int n = static_cast<int>(s.cells.size()), nb = static_cast<int>(s.boxes.size());
  std::map<pn::WireId, int> producer, consumer;
  std::map<pn::WireId, std::pair<int, int>> switched_input;  // wire -> (switch index, input position)
  std::vector<int> switches;
  for (int i = 0; i < n; ++i) {
    for (pn::WireId w : s.cells[i].outputs) producer[w] = i;
    for (std::size_t k = 0; k < s.cells[i].inputs.size(); ++k) {
      consumer[s.cells[i].inputs[k]] = i;
      if (s.cells[i].kind == pn::Kind::Par || s.cells[i].kind == pn::Kind::Contr)
        switched_input[s.cells[i].inputs[k]] = {static_cast<int>(switches.size()), static_cast<int>(k)};
    }
    if (s.cells[i].kind == pn::Kind::Par || s.cells[i].kind == pn::Kind::Contr) switches.push_back(i);
  }
  for (int b = 0; b < nb; ++b) {
    producer[s.boxes[b].principal] = n + b;
    for (pn::WireId w : s.boxes[b].auxiliaries) producer[w] = n + b;
  }
  std::vector<int> choice(switches.size(), 0);
  std::function<bool(std::size_t)> all = [&](std::size_t k) -> bool {
    if (k < choice.size()) {
      for (int c = 0; c < 2; ++c) {
        choice[k] = c;
        if (!all(k + 1)) return false;
      }
      return true;
    }
    std::vector<std::vector<std::pair<int, int>>> adj(n + nb);  // (neighbor, edge id)
    int eid = 0;
    for (auto& [w, c] : consumer) {
      auto sw = switched_input.find(w);
      if (sw != switched_input.end() && choice[sw->second.first] == sw->second.second) continue;
      int p = producer.at(w);
      adj[p].push_back({c, eid});
      adj[c].push_back({p, eid});
      ++eid;
    }
    std::vector<int> seen(n + nb, 0);
    std::function<bool(int, int)> dfs = [&](int v, int via) -> bool {  // true when a cycle is found
      seen[v] = 1;
      for (auto [w, e] : adj[v]) {
        if (e == via) continue;
        if (seen[w] || dfs(w, e)) return true;
      }
      return false;
    };
    for (int v = 0; v < n + nb; ++v)
      if (!seen[v] && dfs(v, -1)) return false;
    return true;
  };
  if (!all(0)) return false;
  for (const auto& b : s.boxes)
    if (!level_acyclic(b.net)) return false;
  return true;
}

}  // namespace detail

inline bool dr_oracle(const pn::ProofStructure& s) { return detail::level_acyclic(s); }

}  // namespace lmn::testing
