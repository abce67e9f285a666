#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lmn/connectors.hpp"
#include "lmn/match.hpp"
#include "lmn/process.hpp"

namespace lmn {

/// A `mell.copy/8` or `mell.delete/2` atom waiting to fire.
struct PendingApiCall {
  enum class Kind { Copy, Delete };
  Kind kind;
  std::vector<int> path;  // cell indices from the root to the atom's level
  int atom = -1;          // index in that level's `atoms`
  std::vector<LinkId> args;
};

inline bool is_api_atom(const Atom& a) {
  return (a.functor == sym::mell_copy() && a.args.size() == 8) ||
         (a.functor == sym::mell_delete() && a.args.size() == 2);
}

inline bool is_transient(const Process& p) {
  for (const Atom& a : p.atoms)
    if (is_api_atom(a)) return true;
  for (const Cell& c : p.cells)
    if (is_transient(c.body)) return true;
  return false;
}

namespace detail {

inline void collect_api_calls(const Process& p, std::vector<int>& path, std::vector<PendingApiCall>& out) {
  for (std::size_t i = 0; i < p.atoms.size(); ++i) {
    const Atom& a = p.atoms[i];
    if (a.functor == sym::nlmem_copy() || a.functor == sym::nlmem_kill())
      throw RewriteError(symbol_text(a.functor) + " is not supported; use mell.copy / mell.delete");
    if (!is_api_atom(a)) continue;
    auto kind = a.functor == sym::mell_copy() ? PendingApiCall::Kind::Copy : PendingApiCall::Kind::Delete;
    out.push_back({kind, path, static_cast<int>(i), a.args});
  }
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_api_calls(p.cells[i].body, path, out);
    path.pop_back();
  }
}

// Host cell id for a path of child indices.
inline int cell_at(const HostView& host, const std::vector<int>& path) {
  int c = 0;
  for (int i : path) c = host.cell(c).children.at(i);
  return c;
}

// The child cell of `level` holding the far end of link `l` of the API atom.
inline int cell_of_port(const HostView& host, int level, int api_atom, int port, LinkId l,
                        const char* what) {
  auto far = host.other_end(l, api_atom, port);
  if (!far) throw RewriteError(std::string("mell: ") + what + " is not connected");
  int c = host.child_towards(level, host.atom(far->atom).cell);
  if (c < 0) throw RewriteError(std::string("mell: ") + what + " does not lead into a cell at the call's level");
  return c;
}

// Contents of a cell, checked to be rule-free with exactly the given free links.
inline Process argument_cell(const HostView& host, int c, const std::vector<LinkId>& links, const char* what) {
  const Process& p = *host.cell(c).proc;
  if (!p.rules.empty()) throw RewriteError(std::string("mell: ") + what + " cell contains rules");
  std::set<LinkId> expected(links.begin(), links.end());
  if (free_links(p) != expected)
    throw RewriteError(std::string("mell: ") + what + " cell must have exactly the named free links");
  return p;
}

inline Process clone_with(const Process& p, std::unordered_map<LinkId, LinkId> map) {
  Process copy = p;
  relink(copy, map);
  return copy;
}

inline Process remove_and_add(const HostView& host, int level, int api_atom, const std::vector<int>& drop_cells,
                              Process add) {
  const auto& info = host.cell(level);
  Process out;
  for (int a : info.atoms)
    if (a != api_atom) out.atoms.push_back(*host.atom(a).atom);
  for (int ch : info.children)
    if (std::find(drop_cells.begin(), drop_cells.end(), ch) == drop_cells.end())
      out.cells.push_back(Cell{host.cell(ch).name, *host.cell(ch).proc});
  out.rules = info.proc->rules;
  out.append(std::move(add));
  Process result;
  if (level == 0) {
    result = std::move(out);
  } else {
    result = host.root();
    *descend(result, host.path(level)) = std::move(out);
  }
  return normalize_connectors(std::move(result));
}

// Free links of the cell body other than `principal`, in first-occurrence order.
inline std::vector<LinkId> auxiliary_links(const Process& body, LinkId principal) {
  std::unordered_map<LinkId, int> count;
  std::vector<LinkId> order;
  std::function<void(const Process&)> walk = [&](const Process& p) {
    for (const Atom& a : p.atoms)
      for (LinkId l : a.args)
        if (count[l]++ == 0) order.push_back(l);
    for (const Cell& c : p.cells) walk(c.body);
  };
  walk(body);
  if (count[principal] != 1) throw RewriteError("mell: the principal link is not free in the cell");
  std::vector<LinkId> out;
  for (LinkId l : order)
    if (count[l] == 1 && l != principal) out.push_back(l);
  return out;
}

}  // namespace detail

/// All API atoms anywhere in `host`, in traversal order.
inline std::vector<PendingApiCall> find_api_calls(const Process& host) {
  std::vector<PendingApiCall> out;
  std::vector<int> path;
  detail::collect_api_calls(host, path, out);
  return out;
}

/// Copy of a cell with every link renamed: local links fresh, free links fresh
/// and reported in `free_map` (original -> clone).
inline Cell deep_clone(const Cell& cell, std::unordered_map<LinkId, LinkId>* free_map = nullptr) {
  Cell copy = cell;
  std::unordered_map<LinkId, LinkId> map;
  detail::relink(copy.body, map);
  if (free_map) {
    for (LinkId l : free_links(cell.body)) (*free_map)[l] = map.at(l);
  }
  return copy;
}

/// mell.copy(X,A1,A2,A3,B1,B2,C1,C2) with {$p[X|*Z]}, {$a[A1,A2,A3]}, {$b[B1,B2]}:
/// two clones of the $p cell, one $a instance per auxiliary link zi joining
/// its two clone images to zi's outer end, and $b joining each clone's
/// principal link to C1 / C2.
inline Process fire_mell_copy(const Process& host, const PendingApiCall& call) {
  HostView view(host);
  int level = detail::cell_at(view, call.path);
  int api = view.cell(level).atoms.at(call.atom);
  const auto& g = call.args;
  int pc = detail::cell_of_port(view, level, api, 0, g[0], "X");
  int ac = detail::cell_of_port(view, level, api, 1, g[1], "A1");
  int bc = detail::cell_of_port(view, level, api, 4, g[4], "B1");
  if (detail::cell_of_port(view, level, api, 2, g[2], "A2") != ac ||
      detail::cell_of_port(view, level, api, 3, g[3], "A3") != ac)
    throw RewriteError("mell.copy: A1..A3 must lead into one cell");
  if (detail::cell_of_port(view, level, api, 5, g[5], "B2") != bc)
    throw RewriteError("mell.copy: B1, B2 must lead into one cell");
  if (pc == ac || pc == bc || ac == bc) throw RewriteError("mell.copy: argument cells must be distinct");
  Process a = detail::argument_cell(view, ac, {g[1], g[2], g[3]}, "$a");
  Process b = detail::argument_cell(view, bc, {g[4], g[5]}, "$b");
  Cell p{view.cell(pc).name, *view.cell(pc).proc};
  std::vector<LinkId> aux = detail::auxiliary_links(p.body, g[0]);

  std::unordered_map<LinkId, LinkId> m1, m2;
  Cell c1 = deep_clone(p, &m1), c2 = deep_clone(p, &m2);
  Process add;
  add.cells.push_back(std::move(c1));
  add.cells.push_back(std::move(c2));
  for (LinkId z : aux)
    add.append(detail::clone_with(a, {{g[1], m1.at(z)}, {g[2], m2.at(z)}, {g[3], z}}));
  add.append(detail::clone_with(b, {{g[4], m1.at(g[0])}, {g[5], g[6]}}));
  add.append(detail::clone_with(b, {{g[4], m2.at(g[0])}, {g[5], g[7]}}));
  return detail::remove_and_add(view, level, api, {pc, ac, bc}, std::move(add));
}

/// mell.delete(X,A) with {$p[X|*Z]}, {$a[A]}: the $p cell disappears and each
/// auxiliary link zi is capped with an $a instance.
inline Process fire_mell_delete(const Process& host, const PendingApiCall& call) {
  HostView view(host);
  int level = detail::cell_at(view, call.path);
  int api = view.cell(level).atoms.at(call.atom);
  const auto& g = call.args;
  int pc = detail::cell_of_port(view, level, api, 0, g[0], "X");
  int ac = detail::cell_of_port(view, level, api, 1, g[1], "A");
  if (pc == ac) throw RewriteError("mell.delete: argument cells must be distinct");
  Process a = detail::argument_cell(view, ac, {g[1]}, "$a");
  std::vector<LinkId> aux = detail::auxiliary_links(*view.cell(pc).proc, g[0]);
  Process add;
  for (LinkId z : aux) add.append(detail::clone_with(a, {{g[1], z}}));
  return detail::remove_and_add(view, level, api, {pc, ac}, std::move(add));
}

inline Process fire_api_call(const Process& host, const PendingApiCall& call) {
  return call.kind == PendingApiCall::Kind::Copy ? fire_mell_copy(host, call) : fire_mell_delete(host, call);
}

inline const char* api_name(const PendingApiCall& call) {
  return call.kind == PendingApiCall::Kind::Copy ? "mell.copy" : "mell.delete";
}

}  // namespace lmn
