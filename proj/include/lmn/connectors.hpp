#pragma once

#include <unordered_map>
#include <vector>

#include "lmn/process.hpp"

namespace lmn {

namespace detail {

struct LinkSite {
  int node = -1;  // index into the flattened membrane list
  int atom = -1;
  int port = -1;
};

struct FlatTree {
  std::vector<Process*> nodes;  // 0 is the root
  std::vector<int> parent;
  std::unordered_map<LinkId, std::vector<LinkSite>> sites;

  explicit FlatTree(Process& root) { visit(root, -1); }

  void visit(Process& p, int up) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back(&p);
    parent.push_back(up);
    for (std::size_t a = 0; a < p.atoms.size(); ++a)
      for (std::size_t k = 0; k < p.atoms[a].args.size(); ++k)
        sites[p.atoms[a].args[k]].push_back({id, static_cast<int>(a), static_cast<int>(k)});
    for (Cell& c : p.cells) visit(c.body, id);
  }

  // Child of `m` on the path down to `n`; m itself if n == m; -1 if n is not below m.
  int child_towards(int m, int n) const {
    if (n == m) return m;
    while (n != -1 && parent[n] != m) n = parent[n];
    return n;
  }
};

inline bool has_connector(const Process& p) {
  for (const Atom& a : p.atoms)
    if (a.functor == sym::connector() && a.args.size() == 2) return true;
  for (const Cell& c : p.cells)
    if (has_connector(c.body)) return true;
  return false;
}

// One E7/E9/E10 step; returns false at a fixpoint.
inline bool absorb_one_connector(Process& root) {
  FlatTree tree(root);
  for (int m = 0; m < static_cast<int>(tree.nodes.size()); ++m) {
    Process& here = *tree.nodes[m];
    for (std::size_t i = 0; i < here.atoms.size(); ++i) {
      const Atom& c = here.atoms[i];
      if (c.functor != sym::connector() || c.args.size() != 2) continue;
      LinkId a = c.args[0], b = c.args[1];
      if (a == b) {  // E7
        here.atoms.erase(here.atoms.begin() + static_cast<std::ptrdiff_t>(i));
        return true;
      }
      auto other_end = [&](LinkId l, int port) -> LinkSite {
        for (const LinkSite& s : tree.sites[l])
          if (!(s.node == m && s.atom == static_cast<int>(i) && s.port == port)) return s;
        return {};
      };
      LinkSite sa = other_end(a, 0), sb = other_end(b, 1);
      // where each far end sits relative to this membrane
      int ca = sa.node < 0 ? -1 : tree.child_towards(m, sa.node);
      int cb = sb.node < 0 ? -1 : tree.child_towards(m, sb.node);
      const LinkSite* inside = nullptr;
      LinkId replacement = kNoLink;
      if (ca == m) {
        inside = &sa, replacement = b;
      } else if (cb == m) {
        inside = &sb, replacement = a;
      } else if (ca != -1 && ca != cb) {
        inside = &sa, replacement = b;
      } else if (cb != -1 && ca == -1) {
        inside = &sb, replacement = a;
      }
      if (!inside) continue;  // stuck: both ends outside, or both in one child
      tree.nodes[inside->node]->atoms[inside->atom].args[inside->port] = replacement;
      // indices in `here` are unaffected unless the far end is in `here` too,
      // and erasing last keeps the write above valid.
      here.atoms.erase(here.atoms.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Eliminates `=` atoms with E7 (self-loops), E9 (absorption into an atom at
/// the same level) and E10 (moving across membranes towards the far end).
/// Connectors that cannot move are kept: those whose ends both lie outside
/// their membrane, or both inside a single child membrane.
inline Process normalize_connectors(Process p) {
  if (!detail::has_connector(p)) return p;
  while (detail::absorb_one_connector(p)) {
  }
  return p;
}

}  // namespace lmn
