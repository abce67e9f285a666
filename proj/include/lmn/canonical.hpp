#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmn/connectors.hpp"
#include "lmn/printer.hpp"
#include "lmn/process.hpp"

namespace lmn {

struct CanonicalForm {
  std::string text;
  std::size_t hash = 0;

  friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) {
    return a.hash == b.hash && a.text == b.text;
  }
};

namespace detail {

// Port graph with the membrane tree as parent edges. Vertex 0 is the root.
// Colors use the "cell start" convention: a vertex's color is the number of
// vertices in strictly smaller classes, so individualizing within a class
// and refining both keep colors meaningful across branches.
class CanonGraph {
 public:
  enum Kind : std::uint8_t { kRoot, kAtom, kCell, kRule };
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  explicit CanonGraph(const Process& p) {
    add_vertex(kRoot, -1);
    build(p, 0);
    port_begin_.push_back(static_cast<std::uint32_t>(nb_.size()));
    close_links();
    label_vertices();
    child_index();
  }

  std::string canonical_text() {
    std::vector<std::uint32_t> col = label_;
    search(col, {});
    return print(best_perm_);
  }

 private:
  // ---- construction ------------------------------------------------------

  int add_vertex(Kind k, int up) {
    int id = static_cast<int>(kind_.size());
    kind_.push_back(k);
    parent_.push_back(up);
    atom_.push_back(nullptr);
    cell_name_.push_back(0);
    rule_.push_back(nullptr);
    port_begin_.push_back(static_cast<std::uint32_t>(nb_.size()));
    return id;
  }

  void build(const Process& p, int up) {
    for (const Atom& a : p.atoms) {
      int v = add_vertex(kAtom, up);
      atom_[v] = &a;
      for (std::size_t k = 0; k < a.args.size(); ++k) {
        auto port = static_cast<std::uint32_t>(nb_.size());
        nb_.push_back(-1);
        nbport_.push_back(0);
        port_owner_.push_back(v);
        auto [it, fresh] = open_.try_emplace(a.args[k], port);
        if (!fresh) {
          std::uint32_t other = it->second;
          nb_[port] = port_owner_[other];
          nbport_[port] = other - port_begin_[port_owner_[other]];
          nb_[other] = v;
          nbport_[other] = static_cast<std::uint32_t>(k);
          open_.erase(it);
        }
      }
    }
    for (const Cell& c : p.cells) {
      int v = add_vertex(kCell, up);
      cell_name_[v] = c.name;
      build(c.body, v);
    }
    for (const RulePtr& r : p.rules) {
      int v = add_vertex(kRule, up);
      rule_[v] = r.get();
    }
  }

  // Remaining open ports are free links; rank them by name.
  void close_links() {
    std::vector<std::pair<std::string, std::uint32_t>> free;
    free.reserve(open_.size());
    for (auto [link, port] : open_) free.emplace_back(link_text(link), port);
    std::sort(free.begin(), free.end());
    for (std::size_t r = 0; r < free.size(); ++r) {
      nbport_[free[r].second] = static_cast<std::uint32_t>(r);
      free_name_.emplace(free[r].second, free[r].first);
    }
  }

  void label_vertices() {
    int n = static_cast<int>(kind_.size());
    std::vector<std::string> rule_text(n);
    std::vector<const std::string*> text(n, nullptr);
    static const std::string empty;
    for (int v = 0; v < n; ++v) {
      if (kind_[v] == kAtom) text[v] = &symbol_text(atom_[v]->functor);
      else if (kind_[v] == kCell) text[v] = &symbol_text(cell_name_[v]);
      else if (kind_[v] == kRule) text[v] = &(rule_text[v] = pretty_print(*rule_[v]));
      else text[v] = &empty;
    }
    auto arity = [&](int v) { return kind_[v] == kAtom ? atom_[v]->args.size() : 0; };
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int a, int b) {
      if (kind_[a] != kind_[b]) return kind_[a] < kind_[b];
      if (int c = text[a]->compare(*text[b]); c != 0) return c < 0;
      return arity(a) < arity(b);
    };
    std::sort(order.begin(), order.end(), less);
    label_.assign(n, 0);
    for (int i = 1; i < n; ++i)
      label_[order[i]] = less(order[i - 1], order[i]) ? i : label_[order[i - 1]];
    connector_.assign(n, false);
    for (int v = 0; v < n; ++v)
      connector_[v] = kind_[v] == kAtom && atom_[v]->functor == sym::connector() &&
                      atom_[v]->args.size() == 2;
  }

  void child_index() {
    int n = static_cast<int>(kind_.size());
    child_begin_.assign(n + 1, 0);
    for (int v = 1; v < n; ++v) ++child_begin_[parent_[v] + 1];
    for (int v = 0; v < n; ++v) child_begin_[v + 1] += child_begin_[v];
    children_.resize(n > 0 ? n - 1 : 0);
    std::vector<std::uint32_t> fill(child_begin_.begin(), child_begin_.end() - 1);
    for (int v = 1; v < n; ++v) children_[fill[parent_[v]]++] = v;
  }

  std::uint32_t ports(int v) const { return port_begin_[v + 1] - port_begin_[v]; }

  // ---- refinement --------------------------------------------------------

  void signature(int v, const std::vector<std::uint32_t>& col, std::vector<std::uint32_t>& out) const {
    out.push_back(col[v]);
    out.push_back(parent_[v] < 0 ? kNone : col[parent_[v]]);
    if (kind_[v] == kAtom) {
      std::size_t at = out.size();
      for (std::uint32_t p = port_begin_[v]; p < port_begin_[v + 1]; ++p) {
        if (nb_[p] < 0) {
          out.push_back(kNone);
          out.push_back(nbport_[p]);
        } else {
          out.push_back(col[nb_[p]]);
          out.push_back(connector_[nb_[p]] ? 0 : nbport_[p]);
        }
      }
      if (connector_[v]) sort_pairs(out, at);
    } else {
      std::size_t at = out.size();
      for (std::uint32_t i = child_begin_[v]; i < child_begin_[v + 1]; ++i)
        out.push_back(col[children_[i]]);
      std::sort(out.begin() + static_cast<std::ptrdiff_t>(at), out.end());
    }
  }

  static void sort_pairs(std::vector<std::uint32_t>& out, std::size_t at) {
    // exactly two (color, port) pairs
    auto a = std::make_pair(out[at], out[at + 1]);
    auto b = std::make_pair(out[at + 2], out[at + 3]);
    if (b < a) {
      out[at] = b.first, out[at + 1] = b.second;
      out[at + 2] = a.first, out[at + 3] = a.second;
    }
  }

  // Refines to the coarsest equitable partition below `col`; returns class count.
  int refine(std::vector<std::uint32_t>& col) {
    int n = static_cast<int>(col.size());
    int classes = count_classes(col);
    std::vector<std::uint32_t> buf;
    std::vector<std::uint32_t> begin(n + 1);
    std::vector<int> order(n);
    while (classes < n) {
      buf.clear();
      for (int v = 0; v < n; ++v) {
        begin[v] = static_cast<std::uint32_t>(buf.size());
        signature(v, col, buf);
      }
      begin[n] = static_cast<std::uint32_t>(buf.size());
      auto cmp = [&](int a, int b) {
        return std::lexicographical_compare(buf.begin() + begin[a], buf.begin() + begin[a + 1],
                                            buf.begin() + begin[b], buf.begin() + begin[b + 1]);
      };
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), cmp);
      int next = 1;
      std::vector<std::uint32_t> fresh(n);
      fresh[order[0]] = 0;
      for (int i = 1; i < n; ++i) {
        if (cmp(order[i - 1], order[i])) {
          fresh[order[i]] = i;
          ++next;
        } else {
          fresh[order[i]] = fresh[order[i - 1]];
        }
      }
      col.swap(fresh);
      if (next == classes) break;
      classes = next;
    }
    return classes;
  }

  static int count_classes(const std::vector<std::uint32_t>& col) {
    std::vector<char> seen(col.size(), 0);
    int c = 0;
    for (auto x : col)
      if (!seen[x]) seen[x] = 1, ++c;
    return c;
  }

  // ---- search ------------------------------------------------------------

  std::vector<std::uint32_t> certificate(const std::vector<int>& perm, const std::vector<std::uint32_t>& pos) const {
    std::vector<std::uint32_t> cert;
    cert.reserve(perm.size() * 4 + nb_.size() * 2);
    for (int v : perm) {
      cert.push_back(label_[v]);
      cert.push_back(parent_[v] < 0 ? kNone : pos[parent_[v]]);
      if (kind_[v] != kAtom) continue;
      std::size_t at = cert.size();
      for (std::uint32_t p = port_begin_[v]; p < port_begin_[v + 1]; ++p) {
        if (nb_[p] < 0) {
          cert.push_back(kNone);
          cert.push_back(nbport_[p]);
        } else {
          cert.push_back(pos[nb_[p]]);
          cert.push_back(connector_[nb_[p]] ? 0 : nbport_[p]);
        }
      }
      if (connector_[v]) sort_pairs(cert, at);
    }
    return cert;
  }

  void leaf(const std::vector<std::uint32_t>& col) {
    int n = static_cast<int>(col.size());
    std::vector<int> perm(n);
    for (int v = 0; v < n; ++v) perm[col[v]] = v;
    std::vector<std::uint32_t> cert = certificate(perm, col);
    auto record_automorphism = [&](const std::vector<int>& other) {
      std::vector<int> gamma(n);
      for (int k = 0; k < n; ++k) gamma[other[k]] = perm[k];
      automorphisms_.push_back(std::move(gamma));
    };
    if (best_perm_.empty()) {
      first_cert_ = cert;
      first_perm_ = perm;
      best_cert_ = std::move(cert);
      best_perm_ = std::move(perm);
      return;
    }
    if (cert == first_cert_) {
      record_automorphism(first_perm_);
    } else if (cert == best_cert_) {
      record_automorphism(best_perm_);
    } else if (cert < best_cert_) {
      best_cert_ = std::move(cert);
      best_perm_ = std::move(perm);
    }
  }

  // Orbit of `v` under automorphisms fixing `prefix` pointwise intersects `done`?
  bool pruned(int v, const std::vector<int>& prefix, const std::vector<int>& done) const {
    if (done.empty() || automorphisms_.empty()) return false;
    int n = static_cast<int>(kind_.size());
    std::vector<int> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    bool any = false;
    for (const auto& g : automorphisms_) {
      bool fixes = std::all_of(prefix.begin(), prefix.end(), [&](int s) { return g[s] == s; });
      if (!fixes) continue;
      any = true;
      for (int x = 0; x < n; ++x) uf[find(x)] = find(g[x]);
    }
    if (!any) return false;
    int root = find(v);
    return std::any_of(done.begin(), done.end(), [&](int d) { return find(d) == root; });
  }

  void search(std::vector<std::uint32_t> col, std::vector<int> prefix) {
    int n = static_cast<int>(col.size());
    if (refine(col) == n) {
      leaf(col);
      return;
    }
    // first non-singleton class
    std::vector<std::uint32_t> size(n, 0);
    for (auto c : col) ++size[c];
    std::uint32_t target = kNone;
    for (int c = 0; c < n; ++c)
      if (size[c] > 1) {
        target = static_cast<std::uint32_t>(c);
        break;
      }
    std::vector<int> members;
    for (int v = 0; v < n; ++v)
      if (col[v] == target) members.push_back(v);
    std::vector<int> done;
    for (int v : members) {
      if (pruned(v, prefix, done)) continue;
      std::vector<std::uint32_t> next = col;
      for (int u : members) next[u] = target + 1;
      next[v] = target;
      prefix.push_back(v);
      search(std::move(next), prefix);
      prefix.pop_back();
      done.push_back(v);
    }
  }

  // ---- rendering ---------------------------------------------------------

  std::string print(const std::vector<int>& perm) const {
    int n = static_cast<int>(perm.size());
    std::vector<std::uint32_t> pos(n);
    for (int k = 0; k < n; ++k) pos[perm[k]] = k;
    std::vector<std::vector<int>> kids(n);
    for (int k = 1; k < n; ++k) kids[parent_[perm[k]]].push_back(perm[k]);
    std::vector<std::string> names(nb_.size());
    std::vector<int> ids(nb_.size(), -1);
    int counter = 0;
    std::ostringstream os;
    std::function<void(int)> body = [&](int m) {
      Separator sep(os);
      for (int v : kids[m]) {
        sep();
        if (kind_[v] == kAtom) {
          std::vector<std::uint32_t> order;
          for (std::uint32_t p = port_begin_[v]; p < port_begin_[v + 1]; ++p) order.push_back(p);
          if (connector_[v]) {
            // named links first (by name), then bound ports by position, then free links;
            // a connector neighbor's own port order is not canonical, so it is ignored
            auto key = [&](std::uint32_t p) {
              if (nb_[p] < 0) return std::make_tuple(2, static_cast<std::uint64_t>(nbport_[p]), 0u);
              if (ids[p] >= 0) return std::make_tuple(0, static_cast<std::uint64_t>(ids[p]), 0u);
              return std::make_tuple(1, static_cast<std::uint64_t>(pos[nb_[p]]),
                                     connector_[nb_[p]] ? 0u : nbport_[p]);
            };
            if (key(order[1]) < key(order[0])) std::swap(order[0], order[1]);
          }
          std::vector<std::string> args;
          for (std::uint32_t p : order) {
            if (nb_[p] < 0) {
              args.push_back(free_name_.at(p));
              continue;
            }
            if (names[p].empty()) {
              std::uint32_t q = port_begin_[nb_[p]] + nbport_[p];
              ids[p] = ids[q] = counter;
              names[p] = names[q] = "L" + std::to_string(counter++);
            }
            args.push_back(names[p]);
          }
          print_atom(os, atom_[v]->functor, args);
        } else if (kind_[v] == kCell) {
          print_cell_head(os, cell_name_[v]);
          os << '{';
          body(v);
          os << '}';
        } else {
          os << '(' << pretty_print(*rule_[v]) << ')';
        }
      }
    };
    body(0);
    return os.str();
  }

  std::vector<Kind> kind_;
  std::vector<int> parent_;
  std::vector<const Atom*> atom_;
  std::vector<Symbol> cell_name_;
  std::vector<const Rule*> rule_;
  std::vector<std::uint32_t> port_begin_;  // per vertex, plus a sentinel
  std::vector<int> nb_;                    // per port: neighbor vertex or -1 (free)
  std::vector<std::uint32_t> nbport_;      // neighbor port, or free-name rank
  std::vector<int> port_owner_;
  std::unordered_map<LinkId, std::uint32_t> open_;
  std::unordered_map<std::uint32_t, std::string> free_name_;
  std::vector<std::uint32_t> label_;
  std::vector<bool> connector_;
  std::vector<std::uint32_t> child_begin_;
  std::vector<int> children_;

  std::vector<std::vector<int>> automorphisms_;
  std::vector<std::uint32_t> best_cert_, first_cert_;
  std::vector<int> best_perm_, first_perm_;
};

}  // namespace detail

/// Connector-normalizes `p` and renders it canonically: equal texts iff the
/// processes are structurally congruent. Local links print as L0, L1, ...
/// in order of first occurrence; free links keep their names.
inline CanonicalForm canonical_form(const Process& p) {
  Process q = normalize_connectors(p);
  detail::CanonGraph g(q);
  CanonicalForm f;
  f.text = g.canonical_text();
  f.hash = std::hash<std::string>{}(f.text);
  return f;
}

/// Canonical text of a process already known to be connector-normalized.
inline CanonicalForm canonical_form_normalized(const Process& p) {
  detail::CanonGraph g(p);
  CanonicalForm f;
  f.text = g.canonical_text();
  f.hash = std::hash<std::string>{}(f.text);
  return f;
}

inline bool congruent(const Process& p, const Process& q) { return canonical_form(p) == canonical_form(q); }

}  // namespace lmn
