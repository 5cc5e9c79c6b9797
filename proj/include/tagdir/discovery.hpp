#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tagdir/data.hpp"
#include "tagdir/graph.hpp"

namespace tagdir {

struct CiTestResult {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
  bool independent = true;
  // Some conditioning stratum had no rows; the test then reports independence.
  bool insufficient_data = false;
};

inline double chi2_survival(double x, double dof) {
  if (dof <= 0) return 1.0;
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

inline CiTestResult g2_test(const DataTable& data, VarId i, VarId j, const std::vector<VarId>& s, double alpha) {
  if (i == j || i >= data.num_vars() || j >= data.num_vars()) throw Error("g2_test: bad variable pair");
  for (VarId v : s)
    if (v == i || v == j || v >= data.num_vars()) throw Error("g2_test: bad conditioning set");
  const std::size_t ci = data.cardinality[i], cj = data.cardinality[j];
  std::size_t strata = 1;
  for (VarId v : s) strata *= data.cardinality[v];
  const std::size_t nrows = data.num_rows();

  // Observed strata only; keyed by mixed-radix index of the S configuration.
  std::unordered_map<std::size_t, std::vector<double>> tables;
  const auto& xi = data.columns[i];
  const auto& xj = data.columns[j];
  for (std::size_t r = 0; r < nrows; ++r) {
    std::size_t key = 0;
    for (VarId v : s) key = key * data.cardinality[v] + data.columns[v][r];
    auto& t = tables[key];
    if (t.empty()) t.assign(ci * cj, 0.0);
    t[xi[r] * cj + xj[r]] += 1.0;
  }

  CiTestResult res;
  res.dof = static_cast<double>(ci - 1) * static_cast<double>(cj - 1) * static_cast<double>(strata);
  res.insufficient_data = tables.size() < strata;
  double g2 = 0;
  std::vector<double> row(ci), col(cj);
  for (const auto& [key, t] : tables) {
    std::fill(row.begin(), row.end(), 0.0);
    std::fill(col.begin(), col.end(), 0.0);
    double total = 0;
    for (std::size_t a = 0; a < ci; ++a)
      for (std::size_t b = 0; b < cj; ++b) {
        row[a] += t[a * cj + b];
        col[b] += t[a * cj + b];
        total += t[a * cj + b];
      }
    for (std::size_t a = 0; a < ci; ++a)
      for (std::size_t b = 0; b < cj; ++b) {
        double o = t[a * cj + b];
        if (o > 0) g2 += o * std::log(o * total / (row[a] * col[b]));
      }
  }
  res.statistic = std::max(0.0, 2.0 * g2);
  res.p_value = chi2_survival(res.statistic, res.dof);
  res.independent = res.insufficient_data || res.p_value > alpha;
  return res;
}

struct PcOptions {
  double alpha = 0.05;
  // Largest conditioning set tried; nullopt means unbounded.
  std::optional<std::size_t> max_cond_size = 3;
};

using IndependenceTest = std::function<bool(VarId, VarId, const std::vector<VarId>&)>;

struct PcResult {
  Pdag graph;
  std::map<Edge, std::vector<VarId>> sepsets;
  std::size_t tests = 0;
};

namespace detail {

// Calls f on each k-subset of `items` in lexicographic position order until
// f returns true.
inline bool any_subset(const std::vector<VarId>& items, std::size_t k,
                       const std::function<bool(const std::vector<VarId>&)>& f) {
  if (k > items.size()) return false;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<VarId> subset(k);
  for (;;) {
    for (std::size_t q = 0; q < k; ++q) subset[q] = items[idx[q]];
    if (f(subset)) return true;
    std::size_t q = k;
    while (q > 0 && idx[q - 1] == items.size() - k + (q - 1)) --q;
    if (q == 0) return false;
    ++idx[q - 1];
    for (std::size_t r = q; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
}

}  // namespace detail

// PC-stable: adjacency sets are frozen at the start of each depth level.
inline PcResult pc_stable(const std::vector<std::string>& names, const IndependenceTest& indep,
                          std::optional<std::size_t> max_cond_size) {
  const std::size_t n = names.size();
  if (n < 2) throw Error("pc_stable needs at least two variables");
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 1));
  for (VarId v = 0; v < n; ++v) adj[v][v] = 0;
  PcResult res{Pdag(names), {}, 0};

  for (std::size_t level = 0;; ++level) {
    if (max_cond_size && level > *max_cond_size) break;
    std::vector<std::vector<VarId>> frozen(n);
    for (VarId v = 0; v < n; ++v)
      for (VarId w = 0; w < n; ++w)
        if (adj[v][w]) frozen[v].push_back(w);
    bool any = false;
    for (VarId x = 0; x < n; ++x)
      for (VarId y : frozen[x]) {
        if (!adj[x][y]) continue;
        std::vector<VarId> cand;
        for (VarId w : frozen[x])
          if (w != y) cand.push_back(w);
        if (cand.size() < level) continue;
        any = true;
        detail::any_subset(cand, level, [&](const std::vector<VarId>& sset) {
          ++res.tests;
          if (!indep(x, y, sset)) return false;
          adj[x][y] = adj[y][x] = 0;
          res.sepsets[canonical(x, y)] = sset;
          return true;
        });
      }
    if (!any) break;
  }

  Pdag& g = res.graph;
  for (VarId x = 0; x < n; ++x)
    for (VarId y = x + 1; y < n; ++y)
      if (adj[x][y]) g.add_undirected(x, y);

  // Collider proposals; an edge proposed in both directions stays undirected.
  std::map<Edge, int> proposals;  // key canonical, bit 1: min->max, bit 2: max->min
  auto propose = [&](VarId from, VarId to) {
    proposals[canonical(from, to)] |= from < to ? 1 : 2;
  };
  for (VarId c = 0; c < n; ++c) {
    auto nb = g.adjacents(c);
    for (std::size_t p = 0; p < nb.size(); ++p)
      for (std::size_t q = p + 1; q < nb.size(); ++q) {
        VarId a = nb[p], b = nb[q];
        if (g.adjacent(a, b)) continue;
        auto it = res.sepsets.find(canonical(a, b));
        const bool in_sep = it != res.sepsets.end() &&
                            std::find(it->second.begin(), it->second.end(), c) != it->second.end();
        if (in_sep) continue;
        propose(a, c);
        propose(b, c);
      }
  }
  for (const auto& [e, bits] : proposals) {
    if (bits == 3) continue;
    VarId from = bits == 1 ? e.from : e.to;
    VarId to = bits == 1 ? e.to : e.from;
    if (!creates_cycle(g, from, to)) g.direct(from, to);
  }
  g = meek_closure(std::move(g));
  return res;
}

inline PcResult pc_stable(const DataTable& data, const PcOptions& opt = {}) {
  return pc_stable(
      data.names,
      [&](VarId x, VarId y, const std::vector<VarId>& s) { return g2_test(data, x, y, s, opt.alpha).independent; },
      opt.max_cond_size);
}

// PC with d-separation answers from a known DAG.
inline PcResult pc_stable_oracle(const Dag& truth, std::optional<std::size_t> max_cond_size = std::nullopt) {
  return pc_stable(
      truth.names(), [&](VarId x, VarId y, const std::vector<VarId>& s) { return d_separated(truth, x, y, s); },
      max_cond_size);
}

}  // namespace tagdir
