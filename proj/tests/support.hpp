#pragma once

// Independent reference implementations and generators shared by the tests.
// Nothing here calls the library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tagdir/bif.hpp"
#include "tagdir/graph.hpp"

namespace testing_support {

using namespace tagdir;

inline std::string data_path(const std::string& rel) {
#ifdef TAGDIR_DATA_DIR
  return std::string(TAGDIR_DATA_DIR) + "/" + rel;
#else
  return "data/" + rel;
#endif
}

inline Dag network_dag(const std::string& id) { return dag_of(read_bif(data_path("networks/" + id + ".bif"))); }

// Random DAG: edges follow a random permutation, each pair present with prob p.
inline Dag random_dag(std::mt19937_64& rng, std::size_t n, double p) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(p);
  Dag d(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (coin(rng)) d.add_arc(order[a], order[b]);
  return d;
}

// Random DAG with a random subset of its edges unmarked.
inline Pdag random_pdag(std::mt19937_64& rng, std::size_t n, double p, double undirect_p) {
  Pdag g = random_dag(rng, n, p);
  std::bernoulli_distribution coin(undirect_p);
  for (const Edge& e : g.arcs())
    if (coin(rng)) g.undirect(e.from, e.to);
  return g;
}

inline bool acyclic_ref(const Pdag& g) {
  // Kahn's algorithm over directed marks.
  std::size_t n = g.size();
  std::vector<int> indeg(n, 0);
  for (VarId i = 0; i < n; ++i)
    for (VarId j = 0; j < n; ++j)
      if (g.has_arc(i, j)) ++indeg[j];
  std::vector<VarId> stack;
  for (VarId i = 0; i < n; ++i)
    if (!indeg[i]) stack.push_back(i);
  std::size_t seen = 0;
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    ++seen;
    for (VarId j = 0; j < n; ++j)
      if (g.has_arc(v, j) && --indeg[j] == 0) stack.push_back(j);
  }
  return seen == n;
}

struct Collider {
  VarId a, c, b;
  bool operator==(const Collider&) const = default;
  auto operator<=>(const Collider&) const = default;
};

inline std::vector<Collider> colliders_ref(const Pdag& g) {
  std::vector<Collider> out;
  for (VarId c = 0; c < g.size(); ++c)
    for (VarId a = 0; a < g.size(); ++a)
      for (VarId b = a + 1; b < g.size(); ++b)
        if (a != c && b != c && g.has_arc(a, c) && g.has_arc(b, c) && !g.adjacent(a, b)) out.push_back({a, c, b});
  std::sort(out.begin(), out.end());
  return out;
}

// Every acyclic orientation of g's skeleton that agrees with g's directed marks.
inline std::vector<Dag> all_orientations(const Pdag& g) {
  auto und = g.undirected_edges();
  std::vector<Dag> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << und.size()); ++mask) {
    Dag d = g;
    for (std::size_t k = 0; k < und.size(); ++k) {
      if (mask >> k & 1) d.direct(und[k].to, und[k].from);
      else d.direct(und[k].from, und[k].to);
    }
    if (acyclic_ref(d)) out.push_back(d);
  }
  return out;
}

// Markov equivalence class of d by exhaustive orientation of its skeleton.
inline std::vector<Dag> mec_brute(const Dag& d) {
  Pdag und(d.names());
  for (const Edge& e : d.skeleton()) und.add_undirected(e.from, e.to);
  auto target = colliders_ref(d);
  std::vector<Dag> out;
  for (auto& cand : all_orientations(und))
    if (colliders_ref(cand) == target) out.push_back(cand);
  return out;
}

// Edges directed the same way in every member, undirected otherwise.
inline Pdag intersect(const std::vector<Dag>& members) {
  Pdag out = members.at(0);
  for (const Edge& e : out.skeleton()) {
    bool same = std::all_of(members.begin(), members.end(),
                            [&](const Dag& m) { return m.mark(e.from, e.to) == out.mark(e.from, e.to); });
    if (!same) out.undirect(e.from, e.to);
  }
  return out;
}

inline std::vector<char> descendants_ref(const Dag& d, VarId v) {
  std::vector<char> seen(d.size(), 0);
  std::function<void(VarId)> go = [&](VarId u) {
    if (seen[u]) return;
    seen[u] = 1;
    for (VarId w = 0; w < d.size(); ++w)
      if (d.has_arc(u, w)) go(w);
  };
  go(v);
  return seen;
}

// d-separation by enumerating every simple path and checking each triple.
inline bool dsep_paths(const Dag& d, VarId x, VarId y, const std::vector<VarId>& z) {
  std::vector<char> inz(d.size(), 0);
  for (auto v : z) inz[v] = 1;
  std::vector<std::vector<char>> desc(d.size());
  for (VarId v = 0; v < d.size(); ++v) desc[v] = descendants_ref(d, v);
  auto active_collider = [&](VarId c) {
    for (VarId w = 0; w < d.size(); ++w)
      if (desc[c][w] && inz[w]) return true;
    return false;
  };
  std::vector<VarId> path{x};
  std::vector<char> on(d.size(), 0);
  on[x] = 1;
  std::function<bool()> open_path = [&]() -> bool {
    VarId last = path.back();
    if (last == y) {
      for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        VarId a = path[k - 1], c = path[k], b = path[k + 1];
        bool collider = d.has_arc(a, c) && d.has_arc(b, c);
        if (collider ? !active_collider(c) : inz[c]) return false;
      }
      return true;
    }
    for (VarId w = 0; w < d.size(); ++w) {
      if (on[w] || !d.adjacent(last, w)) continue;
      on[w] = 1;
      path.push_back(w);
      bool open = open_path();
      path.pop_back();
      on[w] = 0;
      if (open) return true;
    }
    return false;
  };
  return !open_path();
}

}  // namespace testing_support

namespace testing_support {

// Chi-square survival function from the power series of the lower
// incomplete gamma function, evaluated in long double.
inline double chi2_sf_ref(double x, double dof) {
  if (x <= 0) return 1.0;
  long double a = dof / 2.0L, z = x / 2.0L;
  long double term = 1.0L / a, sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= z / (a + n);
    sum += term;
    if (term < sum * 1e-18L) break;
  }
  long double logp = a * std::log(z) - z + std::log(sum) - std::lgamma(a);
  long double p = std::exp(logp);
  return static_cast<double>(std::max(0.0L, 1.0L - p));
}

}  // namespace testing_support

namespace testing_support {

struct GofSummary {
  std::size_t tests = 0;
  std::size_t rejections = 0;
  double min_p = 1.0;
};

// Pearson goodness of fit of every sampled conditional with at least
// min_count occurrences against the network's CPT row.
inline GofSummary sampling_gof(const BifNetwork& net, const DataTable& data, std::size_t min_count, double alpha) {
  GofSummary s;
  for (VarId v = 0; v < net.size(); ++v) {
    const std::size_t k = net.cardinality(v);
    std::vector<std::vector<std::size_t>> counts(net.num_configs(v), std::vector<std::size_t>(k, 0));
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
      std::size_t c = 0;
      for (VarId p : net.parents[v]) c = c * net.cardinality(p) + data.columns[p][r];
      ++counts[c][data.columns[v][r]];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
      std::size_t total = 0;
      for (auto x : counts[c]) total += x;
      if (total < min_count) continue;
      double stat = 0;
      int support = 0;
      for (std::size_t st = 0; st < k; ++st) {
        double p = net.cpts[v][c * k + st];
        if (p == 0) {
          if (counts[c][st]) stat = INFINITY;
          continue;
        }
        ++support;
        double e = p * static_cast<double>(total);
        double d = static_cast<double>(counts[c][st]) - e;
        stat += d * d / e;
      }
      if (support < 2) {
        if (std::isinf(stat)) ++s.rejections;
        continue;
      }
      double pv = std::isinf(stat) ? 0.0 : chi2_sf_ref(stat, support - 1);
      ++s.tests;
      s.min_p = std::min(s.min_p, pv);
      if (pv < alpha) ++s.rejections;
    }
  }
  return s;
}

}  // namespace testing_support
