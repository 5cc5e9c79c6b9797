#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tagdir/error.hpp"
#include "tagdir/rng.hpp"

namespace tagdir {

using VarId = std::size_t;

struct Edge {
  VarId from = 0;
  VarId to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge reversed(Edge e) { return {e.to, e.from}; }

// Canonical key of an unordered pair; the global edge order sorts by it.
inline Edge canonical(VarId a, VarId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Unshielded collider a -> c <- b, stored with a < b.
struct Triple {
  VarId a = 0;
  VarId c = 0;
  VarId b = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Mark of the pair (i, j) as seen from i.
enum class Mark : std::uint8_t { none = 0, out = 1, in = 2, undirected = 3 };

inline Mark mirror(Mark m) {
  switch (m) {
    case Mark::out: return Mark::in;
    case Mark::in: return Mark::out;
    default: return m;
  }
}

// Mixed graph over indexed variables. Dense n x n mark matrix; every
// adjacent pair carries exactly one of i->j, j->i or i--j.
class Pdag {
 public:
  Pdag() = default;

  explicit Pdag(std::size_t n) : n_(n), marks_(n * n, Mark::none) {
    names_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) names_.push_back("X" + std::to_string(i));
    index_names();
  }

  explicit Pdag(std::vector<std::string> names)
      : n_(names.size()), names_(std::move(names)), marks_(n_ * n_, Mark::none) {
    index_names();
  }

  std::size_t size() const { return n_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(VarId v) const { return names_.at(v); }

  std::optional<VarId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Mark mark(VarId i, VarId j) const { return marks_[i * n_ + j]; }
  bool adjacent(VarId i, VarId j) const { return mark(i, j) != Mark::none; }
  bool has_arc(VarId i, VarId j) const { return mark(i, j) == Mark::out; }
  bool has_undirected(VarId i, VarId j) const { return mark(i, j) == Mark::undirected; }
  bool is_directed(VarId i, VarId j) const {
    Mark m = mark(i, j);
    return m == Mark::out || m == Mark::in;
  }

  void add_arc(VarId i, VarId j) { set(i, j, Mark::out); }
  void add_undirected(VarId i, VarId j) { set(i, j, Mark::undirected); }
  void remove_edge(VarId i, VarId j) { set(i, j, Mark::none); }

  // Overwrites any existing mark of an adjacent pair with i -> j.
  void direct(VarId i, VarId j) {
    require_adjacent(i, j);
    set(i, j, Mark::out);
  }

  void undirect(VarId i, VarId j) {
    require_adjacent(i, j);
    set(i, j, Mark::undirected);
  }

  std::vector<VarId> parents(VarId v) const { return collect(v, Mark::in); }
  std::vector<VarId> children(VarId v) const { return collect(v, Mark::out); }
  std::vector<VarId> neighbors(VarId v) const { return collect(v, Mark::undirected); }

  std::vector<VarId> adjacents(VarId v) const {
    std::vector<VarId> out;
    for (VarId u = 0; u < n_; ++u)
      if (adjacent(v, u)) out.push_back(u);
    return out;
  }

  std::vector<Edge> arcs() const {
    std::vector<Edge> out;
    for (VarId i = 0; i < n_; ++i)
      for (VarId j = i + 1; j < n_; ++j) {
        if (has_arc(i, j)) out.push_back({i, j});
        else if (has_arc(j, i)) out.push_back({j, i});
      }
    return out;
  }

  std::vector<Edge> undirected_edges() const {
    std::vector<Edge> out;
    for (VarId i = 0; i < n_; ++i)
      for (VarId j = i + 1; j < n_; ++j)
        if (has_undirected(i, j)) out.push_back({i, j});
    return out;
  }

  // All adjacent pairs in canonical order.
  std::vector<Edge> skeleton() const {
    std::vector<Edge> out;
    for (VarId i = 0; i < n_; ++i)
      for (VarId j = i + 1; j < n_; ++j)
        if (adjacent(i, j)) out.push_back({i, j});
    return out;
  }

  std::size_t num_arcs() const { return count_upper([](Mark m) { return m == Mark::out || m == Mark::in; }); }
  std::size_t num_undirected() const { return count_upper([](Mark m) { return m == Mark::undirected; }); }
  std::size_t num_adjacencies() const { return count_upper([](Mark m) { return m != Mark::none; }); }

  // Same variables and adjacencies, marks ignored.
  bool same_skeleton(const Pdag& o) const {
    if (o.n_ != n_) return false;
    for (std::size_t k = 0; k < marks_.size(); ++k)
      if ((marks_[k] == Mark::none) != (o.marks_[k] == Mark::none)) return false;
    return true;
  }

  friend bool operator==(const Pdag& a, const Pdag& b) {
    return a.n_ == b.n_ && a.marks_ == b.marks_ && a.names_ == b.names_;
  }

 private:
  void index_names() {
    index_.clear();
    for (VarId i = 0; i < names_.size(); ++i)
      if (!index_.emplace(names_[i], i).second) throw Error("duplicate variable name: " + names_[i]);
  }

  void set(VarId i, VarId j, Mark m) {
    if (i >= n_ || j >= n_) throw Error("variable index out of range");
    if (i == j) throw Error("self-loop on " + names_[i]);
    marks_[i * n_ + j] = m;
    marks_[j * n_ + i] = mirror(m);
  }

  void require_adjacent(VarId i, VarId j) const {
    if (i >= n_ || j >= n_ || i == j || !adjacent(i, j))
      throw NotAdjacent("pair not adjacent");
  }

  std::vector<VarId> collect(VarId v, Mark m) const {
    std::vector<VarId> out;
    for (VarId u = 0; u < n_; ++u)
      if (mark(v, u) == m) out.push_back(u);
    return out;
  }

  template <class Pred>
  std::size_t count_upper(Pred pred) const {
    std::size_t c = 0;
    for (VarId i = 0; i < n_; ++i)
      for (VarId j = i + 1; j < n_; ++j)
        if (pred(mark(i, j))) ++c;
    return c;
  }

  std::size_t n_ = 0;
  std::vector<std::string> names_;
  std::vector<Mark> marks_;
  std::unordered_map<std::string, VarId> index_;
};

// A Dag is a Pdag whose every mark is directed; checked where it matters.
using Dag = Pdag;

inline Pdag direct_edge(Pdag g, VarId i, VarId j) {
  g.direct(i, j);
  return g;
}

// ---------------------------------------------------------------- paths

// Directed path from `from` to `to` over arcs, optionally ignoring the
// pair {skip_a, skip_b}.
inline bool has_directed_path(const Pdag& g, VarId from, VarId to,
                              std::optional<Edge> skip = std::nullopt) {
  if (from == to) return true;
  std::vector<char> seen(g.size(), 0);
  std::vector<VarId> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    VarId u = stack.back();
    stack.pop_back();
    for (VarId w = 0; w < g.size(); ++w) {
      if (!g.has_arc(u, w) || seen[w]) continue;
      if (skip && canonical(u, w) == canonical(skip->from, skip->to)) continue;
      if (w == to) return true;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return false;
}

// True if orienting the pair as u -> v would close a directed cycle.
inline bool creates_cycle(const Pdag& g, VarId u, VarId v) {
  return has_directed_path(g, v, u, Edge{u, v});
}

inline std::optional<std::vector<VarId>> try_topological_order(const Pdag& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indeg(n, 0);
  for (const Edge& e : g.arcs()) ++indeg[e.to];
  std::vector<VarId> order;
  order.reserve(n);
  std::vector<VarId> ready;
  for (VarId v = n; v-- > 0;)
    if (indeg[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    VarId u = ready.back();
    ready.pop_back();
    order.push_back(u);
    for (VarId w = n; w-- > 0;)
      if (g.has_arc(u, w) && --indeg[w] == 0) ready.push_back(w);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

inline bool is_acyclic(const Pdag& g) { return try_topological_order(g).has_value(); }

inline std::vector<VarId> topological_order(const Pdag& g) {
  auto order = try_topological_order(g);
  if (!order) throw CyclicInput("directed part contains a cycle");
  return *order;
}

inline bool is_dag(const Pdag& g) { return g.num_undirected() == 0 && is_acyclic(g); }

inline void require_dag(const Pdag& g) {
  if (g.num_undirected() != 0) throw Error("expected a fully directed graph");
  if (!is_acyclic(g)) throw CyclicInput("graph contains a directed cycle");
}

// Descendant indicator (v itself excluded) following arcs only.
inline std::vector<char> descendants(const Pdag& g, VarId v) {
  std::vector<char> out(g.size(), 0);
  std::vector<VarId> stack{v};
  while (!stack.empty()) {
    VarId u = stack.back();
    stack.pop_back();
    for (VarId w = 0; w < g.size(); ++w)
      if (g.has_arc(u, w) && !out[w]) {
        out[w] = 1;
        stack.push_back(w);
      }
  }
  return out;
}

// ---------------------------------------------------------------- Meek

namespace detail {

inline bool meek_implies(const Pdag& g, VarId a, VarId b) {
  const std::size_t n = g.size();
  for (VarId c = 0; c < n; ++c) {
    if (c == a || c == b) continue;
    // R1: c -> a -- b, c and b non-adjacent.
    if (g.has_arc(c, a) && !g.adjacent(c, b)) return true;
    // R2: a -> c -> b.
    if (g.has_arc(a, c) && g.has_arc(c, b)) return true;
  }
  for (VarId c = 0; c < n; ++c) {
    if (c == a || c == b || !g.has_undirected(a, c)) continue;
    for (VarId d = 0; d < n; ++d) {
      if (d == a || d == b || d == c) continue;
      // R3: a -- c -> b, a -- d -> b, c and d non-adjacent.
      if (d > c && g.has_undirected(a, d) && g.has_arc(c, b) && g.has_arc(d, b) &&
          !g.adjacent(c, d))
        return true;
      // R4: a -- c -> d -> b, c and b non-adjacent, a and d adjacent.
      if (g.has_arc(c, d) && g.has_arc(d, b) && !g.adjacent(c, b) && g.adjacent(a, d))
        return true;
    }
  }
  return false;
}

}  // namespace detail

// Fixpoint of Meek rules R1-R4. An orientation that would close a directed
// cycle is never applied, so the result stays acyclic on any input.
inline Pdag meek_closure(Pdag g) {
  if (!is_acyclic(g)) throw CyclicInput("meek_closure: directed part contains a cycle");
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Edge& e : g.undirected_edges()) {
      for (Edge o : {e, reversed(e)}) {
        if (!g.has_undirected(o.from, o.to)) break;
        if (detail::meek_implies(g, o.from, o.to) && !creates_cycle(g, o.from, o.to)) {
          g.direct(o.from, o.to);
          changed = true;
          break;
        }
      }
    }
  }
  return g;
}

inline std::vector<Triple> v_structures(const Pdag& g) {
  std::vector<Triple> out;
  const std::size_t n = g.size();
  for (VarId c = 0; c < n; ++c) {
    auto pa = g.parents(c);
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y)
        if (!g.adjacent(pa[x], pa[y])) out.push_back({pa[x], c, pa[y]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

enum class CpdagMode {
  // Directs unshielded colliders only: the true CPDAG of the class.
  exact,
  // Directs every edge into a node with two or more parents, shielded or
  // not, before Meek closure. Reproduces the reference "GT CPDAG" table.
  all_colliders,
};

inline Pdag undirected_skeleton(const Pdag& g) {
  Pdag s(g.names());
  for (const Edge& e : g.skeleton()) s.add_undirected(e.from, e.to);
  return s;
}

inline Pdag cpdag_of_dag(const Dag& d, CpdagMode mode = CpdagMode::exact) {
  require_dag(d);
  Pdag g = undirected_skeleton(d);
  if (mode == CpdagMode::exact) {
    for (const Triple& t : v_structures(d)) {
      g.direct(t.a, t.c);
      g.direct(t.b, t.c);
    }
  } else {
    for (VarId c = 0; c < d.size(); ++c) {
      auto pa = d.parents(c);
      if (pa.size() < 2) continue;
      for (VarId p : pa) g.direct(p, c);
    }
  }
  return meek_closure(std::move(g));
}

// ------------------------------------------------------------ extensions

enum class ExtensionPolicy {
  // Same v-structures as g when g is a CPDAG, any acyclic orientation otherwise.
  automatic,
  preserve_v_structures,
  any_acyclic,
};

namespace detail {

class ExtensionWalker {
 public:
  ExtensionWalker(const Pdag& g, bool preserve_v, const std::function<bool(const Pdag&)>& visit)
      : h_(g), edges_(g.undirected_edges()), preserve_v_(preserve_v), visit_(visit) {}

  void run() {
    if (!is_acyclic(h_)) return;
    recurse(0);
  }

 private:
  bool recurse(std::size_t k) {
    if (k == edges_.size()) return visit_(h_);
    const Edge e = edges_[k];
    for (Edge o : {e, reversed(e)}) {
      if (creates_cycle(h_, o.from, o.to)) continue;
      if (preserve_v_ && new_collider(o.from, o.to)) continue;
      h_.direct(o.from, o.to);
      bool go_on = recurse(k + 1);
      h_.undirect(o.from, o.to);
      if (!go_on) return false;
    }
    return true;
  }

  // Would tail -> head form an unshielded collider with an existing arc?
  bool new_collider(VarId tail, VarId head) const {
    for (VarId p = 0; p < h_.size(); ++p)
      if (p != tail && h_.has_arc(p, head) && !h_.adjacent(p, tail)) return true;
    return false;
  }

  Pdag h_;
  std::vector<Edge> edges_;
  bool preserve_v_;
  const std::function<bool(const Pdag&)>& visit_;
};

}  // namespace detail

// Visits acyclic orientations of g's undirected edges in deterministic order
// (canonical edge order, lower-to-higher index first). Stops when visit
// returns false.
inline void for_each_extension(const Pdag& g, bool preserve_v,
                               const std::function<bool(const Pdag&)>& visit) {
  detail::ExtensionWalker(g, preserve_v, visit).run();
}

inline std::optional<Dag> any_extension(const Pdag& g, bool preserve_v) {
  std::optional<Dag> out;
  for_each_extension(g, preserve_v, [&](const Pdag& d) {
    out = d;
    return false;
  });
  return out;
}

// g is a CPDAG iff it is the CPDAG of one of its own extensions.
inline bool is_cpdag(const Pdag& g) {
  auto d = any_extension(g, true);
  return d && cpdag_of_dag(*d) == g;
}

inline bool resolve_preserve_v(const Pdag& g, ExtensionPolicy policy) {
  switch (policy) {
    case ExtensionPolicy::preserve_v_structures: return true;
    case ExtensionPolicy::any_acyclic: return false;
    default: return is_cpdag(g);
  }
}

inline std::vector<Dag> consistent_extensions(const Pdag& g, std::size_t cap,
                                              ExtensionPolicy policy = ExtensionPolicy::automatic) {
  std::vector<Dag> out;
  bool overflow = false;
  for_each_extension(g, resolve_preserve_v(g, policy), [&](const Pdag& d) {
    if (out.size() == cap) {
      overflow = true;
      return false;
    }
    out.push_back(d);
    return true;
  });
  if (overflow) throw TooManyExtensions(cap);
  return out;
}

// ---------------------------------------------------------- d-separation

// Reachability form of d-separation (Bayes ball) on the arcs of d.
inline bool d_separated(const Dag& d, VarId x, VarId y, const std::vector<VarId>& z) {
  const std::size_t n = d.size();
  std::vector<char> in_z(n, 0), anc_z(n, 0);
  for (VarId v : z) in_z[v] = 1;
  std::vector<VarId> stack(z.begin(), z.end());
  for (VarId v : z) anc_z[v] = 1;
  while (!stack.empty()) {
    VarId u = stack.back();
    stack.pop_back();
    for (VarId p = 0; p < n; ++p)
      if (d.has_arc(p, u) && !anc_z[p]) {
        anc_z[p] = 1;
        stack.push_back(p);
      }
  }
  // State: node plus whether we arrived from a child (up) or a parent (down).
  std::vector<char> seen_up(n, 0), seen_down(n, 0);
  std::vector<std::pair<VarId, bool>> queue{{x, true}};
  while (!queue.empty()) {
    auto [v, up] = queue.back();
    queue.pop_back();
    if (up ? seen_up[v] : seen_down[v]) continue;
    (up ? seen_up : seen_down)[v] = 1;
    if (v == y && !in_z[v]) return false;
    if (up && !in_z[v]) {
      for (VarId w = 0; w < n; ++w) {
        if (d.has_arc(w, v)) queue.push_back({w, true});
        if (d.has_arc(v, w)) queue.push_back({w, false});
      }
    } else if (!up) {
      if (!in_z[v])
        for (VarId w = 0; w < n; ++w)
          if (d.has_arc(v, w)) queue.push_back({w, false});
      if (anc_z[v])
        for (VarId w = 0; w < n; ++w)
          if (d.has_arc(w, v)) queue.push_back({w, true});
    }
  }
  return true;
}

// ---------------------------------------------------------------- faults

struct FaultSpec {
  std::size_t remove = 0;
  std::size_t flip = 0;
  std::size_t undirect = 1;
  std::uint64_t rng_seed = 0;
};

struct FaultResult {
  Pdag graph;
  // Undirected probes, oriented as in the input DAG.
  std::vector<Edge> probes;
  std::vector<Edge> removed;
  std::vector<Edge> flipped;

  Edge probe() const { return probes.at(0); }
};

// Applies remove -> flip -> undirect to a DAG. Flip sets that would create a
// cycle are rejected and resampled; probes are drawn among the edges left
// untouched by both.
inline FaultResult inject_faults(const Dag& d, const FaultSpec& spec, std::size_t max_attempts = 1000) {
  require_dag(d);
  const std::vector<Edge> arcs = d.arcs();
  if (spec.remove + spec.flip + spec.undirect > arcs.size())
    throw Infeasible("fault counts exceed edge count");
  Rng rng(spec.rng_seed);
  FaultResult r{d, {}, {}, {}};

  std::vector<Edge> kept;
  {
    auto pick = sample_indices(rng, arcs.size(), spec.remove);
    std::vector<char> gone(arcs.size(), 0);
    for (auto i : pick) gone[i] = 1;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      if (gone[i]) {
        r.removed.push_back(arcs[i]);
        r.graph.remove_edge(arcs[i].from, arcs[i].to);
      } else {
        kept.push_back(arcs[i]);
      }
    }
  }

  if (spec.flip > 0) {
    bool ok = false;
    for (std::size_t attempt = 0; attempt < max_attempts && !ok; ++attempt) {
      Pdag trial = r.graph;
      auto pick = sample_indices(rng, kept.size(), spec.flip);
      std::sort(pick.begin(), pick.end());
      for (auto i : pick) trial.direct(kept[i].to, kept[i].from);
      if (!is_acyclic(trial)) continue;
      r.graph = std::move(trial);
      for (auto i : pick) r.flipped.push_back(kept[i]);
      ok = true;
    }
    if (!ok) throw Infeasible("no acyclic flip set found");
  }

  std::vector<Edge> untouched;
  for (const Edge& e : kept)
    if (std::find(r.flipped.begin(), r.flipped.end(), e) == r.flipped.end()) untouched.push_back(e);
  if (spec.undirect > untouched.size()) throw Infeasible("not enough untouched edges to undirect");
  auto pick = sample_indices(rng, untouched.size(), spec.undirect);
  std::sort(pick.begin(), pick.end());
  for (auto i : pick) {
    r.probes.push_back(untouched[i]);
    r.graph.undirect(untouched[i].from, untouched[i].to);
  }
  return r;
}

// --------------------------------------------------------------- edge list

// One declaration per line: `name`, `a -> b` or `a -- b`; `#` starts a
// comment. Nodes are numbered in order of first appearance.
inline Pdag parse_edge_list(std::string_view text) {
  struct Item {
    std::string a, b;
    int kind;  // 0 node, 1 arc, 2 undirected
    std::size_t line;
  };
  auto trim = [](std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::vector<Item> items;
  std::vector<std::string> names;
  std::unordered_map<std::string, VarId> index;
  auto see = [&](const std::string& s) {
    if (index.emplace(s, names.size()).second) names.push_back(s);
  };
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    auto arrow = line.find("->");
    auto dash = line.find("--");
    int kind = 0;
    std::size_t at = std::string_view::npos;
    if (arrow != std::string_view::npos && (dash == std::string_view::npos || arrow < dash)) {
      kind = 1;
      at = arrow;
    } else if (dash != std::string_view::npos) {
      kind = 2;
      at = dash;
    }
    if (kind == 0) {
      if (line.find_first_of(" \t") != std::string_view::npos)
        throw MalformedLine("expected a node name, `a -> b` or `a -- b`", lineno);
      items.push_back({std::string(line), {}, 0, lineno});
      see(items.back().a);
      continue;
    }
    auto a = trim(line.substr(0, at));
    auto b = trim(line.substr(at + 2));
    if (a.empty() || b.empty() || b.find("->") != std::string_view::npos ||
        b.find("--") != std::string_view::npos)
      throw MalformedLine("expected `a -> b` or `a -- b`", lineno);
    items.push_back({std::string(a), std::string(b), kind, lineno});
    see(items.back().a);
    see(items.back().b);
  }
  Pdag g(names);
  for (const Item& it : items) {
    if (it.kind == 0) continue;
    VarId a = index[it.a], b = index[it.b];
    if (a == b) throw MalformedLine("self-loop", it.line);
    if (g.adjacent(a, b)) throw MalformedLine("pair listed twice", it.line);
    if (it.kind == 1) g.add_arc(a, b);
    else g.add_undirected(a, b);
  }
  return g;
}

// Every node is declared first so isolated nodes and node order survive a
// round trip.
inline std::string to_edge_list(const Pdag& g) {
  std::ostringstream os;
  for (const auto& name : g.names()) os << name << '\n';
  for (const Edge& e : g.skeleton()) {
    if (g.has_arc(e.from, e.to)) os << g.name(e.from) << " -> " << g.name(e.to) << '\n';
    else if (g.has_arc(e.to, e.from)) os << g.name(e.to) << " -> " << g.name(e.from) << '\n';
    else os << g.name(e.from) << " -- " << g.name(e.to) << '\n';
  }
  return os.str();
}

// Re-indexes `g` onto the variable order of `names`; used when an edge list
// is read against a known variable table.
inline Pdag align_to(const Pdag& g, const std::vector<std::string>& names) {
  Pdag out(names);
  std::vector<VarId> map(g.size());
  for (VarId v = 0; v < g.size(); ++v) {
    auto idx = out.find(g.name(v));
    if (!idx) throw UnknownVariable("unknown variable: " + g.name(v));
    map[v] = *idx;
  }
  for (const Edge& e : g.skeleton()) {
    if (g.has_arc(e.from, e.to)) out.add_arc(map[e.from], map[e.to]);
    else if (g.has_arc(e.to, e.from)) out.add_arc(map[e.to], map[e.from]);
    else out.add_undirected(map[e.from], map[e.to]);
  }
  return out;
}

}  // namespace tagdir
