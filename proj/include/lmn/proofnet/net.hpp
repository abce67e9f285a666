#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmn/process.hpp"

namespace lmn::pn {

enum class Kind { Ax, Cut, Tensor, Par, Derel, Weak, Contr, Bang };

using WireId = int;

struct NetCell {
  int id = 0;
  Kind kind = Kind::Ax;
  std::vector<WireId> inputs;   // Tensor/Par: left, right
  std::vector<WireId> outputs;
};

struct Box;

/// Cells and boxes of one level plus the wires left dangling at that level.
/// Wire ids are global: a door wire is a conclusion of the box's net and an
/// output of the box node one level up.
struct ProofStructure {
  std::vector<NetCell> cells;
  std::vector<Box> boxes;
  std::vector<WireId> conclusions;
};

struct Box {
  int id = 0;
  ProofStructure net;  // includes the `!` cell
  WireId principal = 0;
  std::vector<WireId> auxiliaries;
};

class NetError : public Error {
 public:
  using Error::Error;
};

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Ax: return "ax";
    case Kind::Cut: return "cut";
    case Kind::Tensor: return "tensor";
    case Kind::Par: return "par";
    case Kind::Derel: return "?d";
    case Kind::Weak: return "?w";
    case Kind::Contr: return "?c";
    case Kind::Bang: return "!";
  }
  return "?";
}

inline std::optional<Kind> parse_kind(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::map<std::string, Kind> names{
      {"ax", Kind::Ax},        {"axiom", Kind::Ax},        {"cut", Kind::Cut},
      {"tensor", Kind::Tensor}, {"par", Kind::Par},         {"?d", Kind::Derel},
      {"derel", Kind::Derel},  {"dereliction", Kind::Derel}, {"?w", Kind::Weak},
      {"weak", Kind::Weak},    {"weakening", Kind::Weak},  {"?c", Kind::Contr},
      {"contr", Kind::Contr},  {"contraction", Kind::Contr}, {"!", Kind::Bang},
      {"bang", Kind::Bang},    {"promotion", Kind::Bang}};
  auto it = names.find(s);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

inline std::size_t input_arity(Kind k) {
  switch (k) {
    case Kind::Ax: case Kind::Weak: return 0;
    case Kind::Derel: case Kind::Bang: return 1;
    default: return 2;
  }
}

inline std::size_t output_arity(Kind k) {
  switch (k) {
    case Kind::Ax: return 2;
    case Kind::Cut: return 0;
    default: return 1;
  }
}

inline bool is_switched(Kind k) { return k == Kind::Par || k == Kind::Contr; }

inline bool is_why_not(Kind k) { return k == Kind::Derel || k == Kind::Weak || k == Kind::Contr; }

/// Number of cells, recursively.
inline std::size_t cell_count(const ProofStructure& s) {
  std::size_t n = s.cells.size();
  for (const Box& b : s.boxes) n += cell_count(b.net);
  return n;
}

inline std::map<Kind, int> kind_histogram(const ProofStructure& s) {
  std::map<Kind, int> h;
  std::function<void(const ProofStructure&)> walk = [&](const ProofStructure& t) {
    for (const NetCell& c : t.cells) ++h[c.kind];
    for (const Box& b : t.boxes) walk(b.net);
  };
  walk(s);
  return h;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ProofStructure& s) {
  nlohmann::json j;
  j["cells"] = nlohmann::json::array();
  for (const NetCell& c : s.cells)
    j["cells"].push_back({{"id", c.id}, {"kind", kind_name(c.kind)}, {"inputs", c.inputs}, {"outputs", c.outputs}});
  j["boxes"] = nlohmann::json::array();
  for (const Box& b : s.boxes)
    j["boxes"].push_back(
        {{"id", b.id}, {"net", to_json(b.net)}, {"principal", b.principal}, {"auxiliaries", b.auxiliaries}});
  j["conclusions"] = s.conclusions;
  return j;
}

inline ProofStructure net_from_json(const nlohmann::json& j) {
  auto wires = [](const nlohmann::json& v, const char* what) {
    std::vector<WireId> out;
    if (v.is_null()) return out;
    if (v.is_number_integer()) return std::vector<WireId>{v.get<int>()};
    if (!v.is_array()) throw NetError(std::string(what) + " must be a wire id or a list of wire ids");
    for (const auto& w : v) {
      if (!w.is_number_integer()) throw NetError(std::string(what) + ": wire ids are integers");
      out.push_back(w.get<int>());
    }
    return out;
  };
  if (!j.is_object()) throw NetError("net must be a JSON object");
  ProofStructure s;
  for (const auto& c : j.value("cells", nlohmann::json::array())) {
    NetCell cell;
    cell.id = c.value("id", static_cast<int>(s.cells.size()));
    auto k = parse_kind(c.at("kind").get<std::string>());
    if (!k) throw NetError("unknown cell kind '" + c.at("kind").get<std::string>() + "'");
    cell.kind = *k;
    cell.inputs = wires(c.value("inputs", nlohmann::json()), "inputs");
    cell.outputs = wires(c.contains("outputs") ? c["outputs"] : c.value("output", nlohmann::json()), "outputs");
    s.cells.push_back(std::move(cell));
  }
  for (const auto& b : j.value("boxes", nlohmann::json::array())) {
    Box box;
    box.id = b.value("id", static_cast<int>(s.boxes.size()));
    box.net = net_from_json(b.at("net"));
    box.principal = b.at("principal").get<int>();
    box.auxiliaries = wires(b.value("auxiliaries", nlohmann::json::array()), "auxiliaries");
    s.boxes.push_back(std::move(box));
  }
  s.conclusions = wires(j.value("conclusions", nlohmann::json::array()), "conclusions");
  return s;
}

inline ProofStructure parse_net_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw NetError(std::string("bad JSON: ") + e.what());
  }
  try {
    return net_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw NetError(std::string("bad net: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Structure checks

struct NetReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
  std::string to_string() const {
    std::string s;
    for (const auto& p : problems) s += p + "\n";
    return s;
  }
};

namespace detail {

// Producer / consumer of each wire at one level. Nodes are cells then boxes.
struct LevelWiring {
  struct End {
    int node = -1;  // -1: conclusion (consumer side only)
    int port = 0;
  };
  std::map<WireId, std::vector<End>> producers, consumers;

  explicit LevelWiring(const ProofStructure& s) {
    int n = static_cast<int>(s.cells.size());
    for (int i = 0; i < n; ++i) {
      const NetCell& c = s.cells[i];
      for (std::size_t p = 0; p < c.inputs.size(); ++p) consumers[c.inputs[p]].push_back({i, int(p)});
      for (std::size_t p = 0; p < c.outputs.size(); ++p) producers[c.outputs[p]].push_back({i, int(p)});
    }
    for (int b = 0; b < static_cast<int>(s.boxes.size()); ++b) {
      producers[s.boxes[b].principal].push_back({n + b, 0});
      for (std::size_t p = 0; p < s.boxes[b].auxiliaries.size(); ++p)
        producers[s.boxes[b].auxiliaries[p]].push_back({n + b, int(p) + 1});
    }
    for (WireId w : s.conclusions) consumers[w].push_back({-1, 0});
  }
};

inline std::string node_name(const ProofStructure& s, int node) {
  int n = static_cast<int>(s.cells.size());
  if (node < 0) return "conclusion";
  if (node < n) return std::string(kind_name(s.cells[node].kind)) + "#" + std::to_string(s.cells[node].id);
  return "box#" + std::to_string(s.boxes[node - n].id);
}

inline void validate_level(const ProofStructure& s, bool in_box, const std::string& where, NetReport& rep,
                           std::map<WireId, int>& internal_levels) {
  auto problem = [&](const std::string& m) { rep.problems.push_back(where + m); };
  for (const NetCell& c : s.cells) {
    if (c.inputs.size() != input_arity(c.kind) || c.outputs.size() != output_arity(c.kind))
      problem(std::string(kind_name(c.kind)) + "#" + std::to_string(c.id) + ": expected " +
              std::to_string(input_arity(c.kind)) + " inputs and " + std::to_string(output_arity(c.kind)) +
              " outputs");
    if (c.kind == Kind::Bang && !in_box) problem("!#" + std::to_string(c.id) + " is not inside a box");
  }
  LevelWiring wiring(s);
  std::set<WireId> all;
  for (auto& [w, _] : wiring.producers) all.insert(w);
  for (auto& [w, _] : wiring.consumers) all.insert(w);
  for (WireId w : all) {
    std::size_t np = wiring.producers.count(w) ? wiring.producers[w].size() : 0;
    std::size_t nc = wiring.consumers.count(w) ? wiring.consumers[w].size() : 0;
    if (np != 1 || nc != 1)
      problem("wire " + std::to_string(w) + " has " + std::to_string(np) + " producers and " +
              std::to_string(nc) + " consumers (expected 1 and 1)");
    if (np == 1 && nc == 1 && wiring.consumers[w][0].node >= 0) ++internal_levels[w];
  }

  // directed acyclicity, boxes contracted
  int nodes = static_cast<int>(s.cells.size() + s.boxes.size());
  std::vector<std::vector<int>> succ(nodes);
  std::vector<int> indeg(nodes, 0);
  for (auto& [w, ps] : wiring.producers) {
    if (!wiring.consumers.count(w)) continue;
    for (auto& p : ps)
      for (auto& c : wiring.consumers[w])
        if (c.node >= 0) {
          succ[p.node].push_back(c.node);
          ++indeg[c.node];
        }
  }
  std::vector<int> ready;
  for (int v = 0; v < nodes; ++v)
    if (!indeg[v]) ready.push_back(v);
  int seen = 0;
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int w : succ[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  if (seen != nodes) problem("wiring contains a directed cycle");

  for (const Box& b : s.boxes) {
    std::string inner = where + "box#" + std::to_string(b.id) + ": ";
    int bangs = 0;
    for (const NetCell& c : b.net.cells)
      if (c.kind == Kind::Bang) {
        ++bangs;
        if (c.outputs.size() == 1 && c.outputs[0] != b.principal)
          rep.problems.push_back(inner + "the ! cell's output is not the principal door");
      }
    if (bangs != 1)
      rep.problems.push_back(inner + "expected exactly one ! cell, found " + std::to_string(bangs));
    std::multiset<WireId> doors(b.auxiliaries.begin(), b.auxiliaries.end());
    doors.insert(b.principal);
    std::multiset<WireId> concl(b.net.conclusions.begin(), b.net.conclusions.end());
    if (doors != concl) rep.problems.push_back(inner + "doors differ from the conclusions of the contents");
    // auxiliary doors carry ?-formulas: produced by ?d/?w/?c or an inner box's auxiliary door
    LevelWiring inside(b.net);
    int n = static_cast<int>(b.net.cells.size());
    for (WireId a : b.auxiliaries) {
      auto it = inside.producers.find(a);
      if (it == inside.producers.end() || it->second.size() != 1) continue;
      auto e = it->second[0];
      bool ok = e.node < n ? is_why_not(b.net.cells[e.node].kind) : e.port > 0;
      if (!ok) rep.problems.push_back(inner + "auxiliary door " + std::to_string(a) + " is not a ?-conclusion");
    }
    validate_level(b.net, true, inner, rep, internal_levels);
  }
}

}  // namespace detail

/// Arities, single producer and consumer per wire and level, box door
/// discipline, and directed acyclicity (boxes contracted).
inline NetReport validate_structure(const ProofStructure& s) {
  NetReport rep;
  std::map<WireId, int> internal;
  detail::validate_level(s, false, "", rep, internal);
  for (auto& [w, n] : internal)
    if (n > 1) rep.problems.push_back("wire " + std::to_string(w) + " is used on several levels");
  return rep;
}

// ---------------------------------------------------------------------------
// Switchings and the Danos-Regnier criterion

enum class Side { Left, Right };  // which input wire is cut

struct SwitchingGraph {
  std::vector<std::pair<int, Side>> choices;  // (cell id, side) for each ⅋ / ?c
  std::vector<std::string> nodes;
  struct Edge {
    int a, b;
    WireId wire;
  };
  std::vector<Edge> edges;
};

struct DrResult {
  bool ok = true;
  std::vector<int> box_path;  // boxes from the top down to the failing level
  std::vector<std::pair<int, Side>> switching;
  std::vector<std::string> cycle_nodes;
  std::vector<WireId> cycle_wires;

  std::string witness() const {
    if (ok) return "";
    std::ostringstream os;
    os << "level:";
    if (box_path.empty()) os << " top";
    for (int b : box_path) os << " box#" << b;
    os << "\nswitching:";
    if (switching.empty()) os << " (none)";
    for (auto& [id, side] : switching) os << " #" << id << "=" << (side == Side::Left ? "L" : "R");
    os << "\ncycle:";
    for (std::size_t i = 0; i < cycle_nodes.size(); ++i) {
      os << " " << cycle_nodes[i];
      if (i < cycle_wires.size()) os << " -[" << cycle_wires[i] << "]-";
    }
    if (!cycle_nodes.empty()) os << " " << cycle_nodes.front();
    return os.str() + "\n";
  }
};

class SwitchingLimitError : public NetError {
 public:
  using NetError::NetError;
};

inline constexpr int kDefaultSwitchingLimit = 20;

namespace detail {

struct LevelGraph {
  std::vector<std::string> nodes;
  struct Edge {
    int a, b;
    WireId wire;
    int switched = -1;  // index into `switched` when this is an input of a ⅋ / ?c
    int input = 0;
  };
  std::vector<Edge> edges;
  std::vector<int> switched;  // cell indices

  explicit LevelGraph(const ProofStructure& s) {
    int n = static_cast<int>(s.cells.size());
    for (int v = 0; v < n + static_cast<int>(s.boxes.size()); ++v) nodes.push_back(node_name(s, v));
    std::map<int, int> slot;
    for (int i = 0; i < n; ++i)
      if (is_switched(s.cells[i].kind)) {
        slot[i] = static_cast<int>(switched.size());
        switched.push_back(i);
      }
    LevelWiring wiring(s);
    for (auto& [w, ps] : wiring.producers) {
      auto it = wiring.consumers.find(w);
      if (it == wiring.consumers.end() || ps.size() != 1 || it->second.size() != 1) continue;
      auto c = it->second[0];
      if (c.node < 0) continue;  // conclusions are pendant
      Edge e{ps[0].node, c.node, w};
      if (c.node < n && slot.count(c.node)) {
        e.switched = slot[c.node];
        e.input = c.port;
      }
      edges.push_back(e);
    }
  }

  bool kept(const Edge& e, std::uint64_t mask) const {
    if (e.switched < 0) return true;
    int cut = (mask >> e.switched) & 1 ? 1 : 0;  // bit set: Right input cut
    return e.input != cut;
  }

  std::vector<std::pair<int, Side>> choices(const ProofStructure& s, std::uint64_t mask) const {
    std::vector<std::pair<int, Side>> out;
    for (std::size_t k = 0; k < switched.size(); ++k)
      out.push_back({s.cells[switched[k]].id, (mask >> k) & 1 ? Side::Right : Side::Left});
    return out;
  }

  // First cycle of the switching graph, as (nodes, wires); empty if acyclic.
  std::optional<std::pair<std::vector<int>, std::vector<WireId>>> cycle(std::uint64_t mask) const {
    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::vector<std::vector<std::pair<int, WireId>>> adj(nodes.size());
    for (const Edge& e : edges) {
      if (!kept(e, mask)) continue;
      int ra = find(e.a), rb = find(e.b);
      if (ra != rb) {
        parent[ra] = rb;
        adj[e.a].push_back({e.b, e.wire});
        adj[e.b].push_back({e.a, e.wire});
        continue;
      }
      // path b -> a in the forest, closed by e
      std::vector<int> prev(nodes.size(), -2);
      std::vector<WireId> via(nodes.size(), 0);
      std::queue<int> q;
      q.push(e.b);
      prev[e.b] = -1;
      while (!q.empty() && prev[e.a] == -2) {
        int v = q.front();
        q.pop();
        for (auto [w, wire] : adj[v])
          if (prev[w] == -2) {
            prev[w] = v;
            via[w] = wire;
            q.push(w);
          }
      }
      std::vector<int> ns;
      std::vector<WireId> ws;
      for (int v = e.a; v != e.b; v = prev[v]) {
        ns.push_back(v);
        ws.push_back(via[v]);
      }
      ns.push_back(e.b);
      ws.push_back(e.wire);
      return std::make_pair(ns, ws);
    }
    return std::nullopt;
  }
};

inline void check_level(const ProofStructure& s, int limit, std::vector<int>& path, DrResult& out) {
  LevelGraph g(s);
  if (static_cast<int>(g.switched.size()) > limit)
    throw SwitchingLimitError("net has " + std::to_string(g.switched.size()) +
                              " switched cells at one level (limit " + std::to_string(limit) +
                              "); use a smaller net or raise the limit");
  std::uint64_t total = std::uint64_t(1) << g.switched.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (auto c = g.cycle(mask)) {
      out.ok = false;
      out.box_path = path;
      out.switching = g.choices(s, mask);
      for (int v : c->first) out.cycle_nodes.push_back(g.nodes[v]);
      out.cycle_wires = c->second;
      return;
    }
  }
  for (const Box& b : s.boxes) {
    path.push_back(b.id);
    check_level(b.net, limit, path, out);
    path.pop_back();
    if (!out.ok) return;
  }
}

}  // namespace detail

/// Every switching graph of the top level (boxes as single nodes), 2^k for k
/// switched cells.
inline std::vector<SwitchingGraph> enumerate_switchings(const ProofStructure& s,
                                                        int limit = kDefaultSwitchingLimit) {
  detail::LevelGraph g(s);
  if (static_cast<int>(g.switched.size()) > limit)
    throw SwitchingLimitError("net has " + std::to_string(g.switched.size()) +
                              " switched cells at one level (limit " + std::to_string(limit) + ")");
  std::vector<SwitchingGraph> out;
  std::uint64_t total = std::uint64_t(1) << g.switched.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    SwitchingGraph sg;
    sg.choices = g.choices(s, mask);
    sg.nodes = g.nodes;
    for (const auto& e : g.edges)
      if (g.kept(e, mask)) sg.edges.push_back({e.a, e.b, e.wire});
    out.push_back(std::move(sg));
  }
  return out;
}

/// Danos-Regnier: all switching graphs of each level acyclic, recursively
/// into boxes. The structure must be valid.
inline DrResult check_dr_witness(const ProofStructure& s, int limit = kDefaultSwitchingLimit) {
  NetReport rep = validate_structure(s);
  if (!rep.ok()) throw NetError("not a valid proof structure:\n" + rep.to_string());
  DrResult out;
  std::vector<int> path;
  detail::check_level(s, limit, path, out);
  return out;
}

inline bool check_dr(const ProofStructure& s, int limit = kDefaultSwitchingLimit) {
  return check_dr_witness(s, limit).ok;
}

}  // namespace lmn::pn
