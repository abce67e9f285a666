#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmn/canonical.hpp"
#include "lmn/mell.hpp"
#include "lmn/parser.hpp"
#include "lmn/proofnet/net.hpp"

namespace lmn::pn {

class DecodeError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void encode_level(const ProofStructure& s, bool top, std::ostringstream& os, int& contr) {
  auto w = [](WireId id) { return "W" + std::to_string(id); };
  const char* sep = "";
  auto item = [&]() -> std::ostringstream& {
    os << sep;
    sep = ", ";
    return os;
  };
  for (const NetCell& c : s.cells) {
    switch (c.kind) {
      case Kind::Ax: item() << "ax{+" << w(c.outputs[0]) << ",+" << w(c.outputs[1]) << "}"; break;
      case Kind::Cut: item() << "cut{+" << w(c.inputs[0]) << ",+" << w(c.inputs[1]) << "}"; break;
      case Kind::Tensor:
      case Kind::Par:
        item() << (c.kind == Kind::Tensor ? "tensor(" : "par(") << w(c.inputs[0]) << "," << w(c.inputs[1]) << ","
               << w(c.outputs[0]) << ")";
        break;
      case Kind::Derel: item() << "'?d'(" << w(c.inputs[0]) << "," << w(c.outputs[0]) << ")"; break;
      case Kind::Weak: item() << "'?w'(" << w(c.outputs[0]) << ")"; break;
      case Kind::Contr: {
        std::string i = "I" + std::to_string(contr++);
        item() << "'?c'(" << i << "," << w(c.outputs[0]) << "), {+" << i << ",+" << w(c.inputs[0]) << ",+"
               << w(c.inputs[1]) << "}";
        break;
      }
      case Kind::Bang: item() << "'!'(" << w(c.inputs[0]) << "," << w(c.outputs[0]) << ")"; break;
    }
  }
  for (const Box& b : s.boxes) {
    item() << "{";
    encode_level(b.net, false, os, contr);
    os << "}";
  }
  if (top)
    for (WireId c : s.conclusions) item() << "formula(" << w(c) << ")";
}

}  // namespace detail

/// Source text of the encoding: one atom or membrane per cell, a membrane per
/// box, `formula` caps on the conclusions.
inline std::string encode_text(const ProofStructure& s) {
  std::ostringstream os;
  int contr = 0;
  detail::encode_level(s, true, os, contr);
  os << ".";
  return os.str();
}

inline Process encode_lmntal(const ProofStructure& s) { return parse_process(encode_text(s)); }

namespace detail {

class Decoder {
 public:
  explicit Decoder(const Process& p) { collect_connectors(p); }

  ProofStructure level(const Process& p, bool in_box) {
    if (!p.rules.empty()) throw DecodeError("rules inside the net");
    ProofStructure s;
    struct PendingContr {
      LinkId bundle;
      LinkId out;
    };
    std::vector<PendingContr> contrs;
    std::vector<std::vector<LinkId>> bundles;
    std::vector<char> claimed;
    for (const Atom& a : p.atoms) {
      const std::string& name = symbol_text(a.functor);
      std::size_t n = a.arity();
      if (a.functor == sym::connector() && n == 2) continue;
      if (is_api_atom(a)) throw DecodeError("transient state: pending " + name + " call");
      if ((name == "tensor" || name == "par") && n == 3) {
        add(s, name == "tensor" ? Kind::Tensor : Kind::Par, {a.args[0], a.args[1]}, {a.args[2]});
      } else if (name == "?d" && n == 2) {
        add(s, Kind::Derel, {a.args[0]}, {a.args[1]});
      } else if (name == "?w" && n == 1) {
        add(s, Kind::Weak, {}, {a.args[0]});
      } else if (name == "!" && n == 2) {
        add(s, Kind::Bang, {a.args[0]}, {a.args[1]});
      } else if (name == "?c" && n == 2) {
        contrs.push_back({find(a.args[0]), a.args[1]});
      } else if (name == "formula" && n == 1) {
        if (in_box) throw DecodeError("formula atom inside a box");
        s.conclusions.push_back(wire(a.args[0]));
      } else {
        throw DecodeError("unrecognized atom " + name + "/" + std::to_string(n));
      }
    }
    for (const Cell& c : p.cells) {
      const std::string& name = symbol_text(c.name);
      std::vector<LinkId> plus = plus_links(c.body);
      if (name == "ax" || name == "cut") {
        if (plus.size() != 2 || c.body.atoms.size() != 2 || !c.body.cells.empty() || !c.body.rules.empty())
          throw DecodeError(name + " membrane must hold exactly two + atoms");
        if (name == "ax")
          add(s, Kind::Ax, {}, plus);
        else
          add(s, Kind::Cut, plus, {});
      } else if (!name.empty()) {
        throw DecodeError("unrecognized membrane " + name);
      } else if (plus.size() == c.body.atoms.size() && !plus.empty() && c.body.cells.empty()) {
        if (plus.size() != 3) throw DecodeError("contraction membrane must hold three + atoms");
        bundles.push_back(plus);
        claimed.push_back(0);
      } else {
        s.boxes.push_back(box(c.body));
      }
    }
    for (const auto& pc : contrs) {
      bool done = false;
      for (std::size_t b = 0; b < bundles.size() && !done; ++b) {
        if (claimed[b]) continue;
        std::vector<LinkId> rest;
        bool hit = false;
        for (LinkId l : bundles[b]) {
          if (!hit && find(l) == pc.bundle)
            hit = true;
          else
            rest.push_back(l);
        }
        if (!hit) continue;
        claimed[b] = 1;
        done = true;
        add(s, Kind::Contr, rest, {pc.out});
      }
      if (!done) throw DecodeError("?c atom without its membrane at the same level");
    }
    for (char c : claimed)
      if (!c) throw DecodeError("contraction membrane without a ?c atom");
    return s;
  }

 private:
  std::unordered_map<LinkId, LinkId> parent_;
  std::unordered_map<LinkId, WireId> wires_;
  int next_cell_ = 0, next_box_ = 0;

  LinkId find(LinkId l) {
    auto it = parent_.find(l);
    if (it == parent_.end() || it->second == l) return l;
    return it->second = find(it->second);
  }

  void collect_connectors(const Process& p) {
    for (const Atom& a : p.atoms)
      if (a.functor == sym::connector() && a.arity() == 2) {
        LinkId x = find(a.args[0]), y = find(a.args[1]);
        if (x != y) parent_[x] = y;
      }
    for (const Cell& c : p.cells) collect_connectors(c.body);
  }

  WireId wire(LinkId l) {
    auto [it, fresh] = wires_.emplace(find(l), static_cast<WireId>(wires_.size()));
    return it->second;
  }

  void add(ProofStructure& s, Kind k, std::vector<LinkId> in, std::vector<LinkId> out) {
    NetCell c;
    c.id = next_cell_++;
    c.kind = k;
    for (LinkId l : in) c.inputs.push_back(wire(l));
    for (LinkId l : out) c.outputs.push_back(wire(l));
    s.cells.push_back(std::move(c));
  }

  static std::vector<LinkId> plus_links(const Process& body) {
    std::vector<LinkId> out;
    for (const Atom& a : body.atoms)
      if (a.functor == sym::plus() && a.arity() == 1) out.push_back(a.args[0]);
    return out;
  }

  Box box(const Process& body) {
    Box b;
    b.id = next_box_++;
    b.net = level(body, true);
    int bangs = 0;
    for (const NetCell& c : b.net.cells)
      if (c.kind == Kind::Bang) {
        ++bangs;
        b.principal = c.outputs[0];
      }
    if (bangs != 1) throw DecodeError("box membrane must hold exactly one ! atom");
    // conclusions: produced inside, not consumed inside
    std::vector<WireId> produced;
    std::multiset<WireId> consumed;
    std::function<void(const ProofStructure&)> walk = [&](const ProofStructure& t) {
      for (const NetCell& c : t.cells) {
        for (WireId w : c.outputs) produced.push_back(w);
        consumed.insert(c.inputs.begin(), c.inputs.end());
      }
      for (const Box& inner : t.boxes) walk(inner.net);
    };
    walk(b.net);
    b.net.conclusions.push_back(b.principal);
    for (WireId w : produced)
      if (w != b.principal && !consumed.count(w)) {
        b.net.conclusions.push_back(w);
        b.auxiliaries.push_back(w);
      }
    return b;
  }
};

}  // namespace detail

/// Inverse of the encoding. Connectors are resolved by fusing their links;
/// pending `mell` calls, rules and foreign atoms are rejected.
inline ProofStructure decode_lmntal(const Process& p) {
  detail::Decoder d(p);
  return d.level(p, false);
}

/// Same net up to wire and cell renaming (argument order of ax, cut and ?c
/// inputs is not significant).
inline bool isomorphic(const ProofStructure& a, const ProofStructure& b) {
  return congruent(encode_lmntal(a), encode_lmntal(b));
}

}  // namespace lmn::pn
