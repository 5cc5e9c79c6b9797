#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "tagdir/graph.hpp"

namespace tagdir {

struct MetricReport {
  std::size_t shd = 0;
  std::size_t shd_double = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<std::size_t> sid_min;
  std::optional<std::size_t> sid_max;
};

struct Prf1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline void require_same_variables(const Pdag& a, const Pdag& b) {
  if (a.size() != b.size() || a.names() != b.names())
    throw VariableMismatch("graphs are over different variables");
}

inline std::size_t shd(const Pdag& truth, const Pdag& pred, bool doubled = false) {
  require_same_variables(truth, pred);
  std::size_t cost = 0;
  for (VarId i = 0; i < truth.size(); ++i)
    for (VarId j = i + 1; j < truth.size(); ++j) {
      Mark t = truth.mark(i, j), p = pred.mark(i, j);
      if (t == p) continue;
      bool reversal = (t == Mark::out && p == Mark::in) || (t == Mark::in && p == Mark::out);
      cost += reversal && doubled ? 2 : 1;
    }
  return cost;
}

// Scores directed predictions only; undirected predictions count as none.
inline Prf1 prf1(const Dag& truth, const Pdag& pred) {
  require_same_variables(truth, pred);
  std::size_t predicted = 0, correct = 0;
  for (const Edge& e : pred.arcs()) {
    ++predicted;
    if (truth.has_arc(e.from, e.to)) ++correct;
  }
  const std::size_t total = truth.num_arcs();
  Prf1 r;
  r.precision = predicted ? static_cast<double>(correct) / predicted : 0.0;
  r.recall = total ? static_cast<double>(correct) / total : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// ------------------------------------------------------------------- SID

namespace detail {

// Counts, for one treatment node i, the targets j whose interventional
// distribution is not identified by adjusting for a candidate parent set.
// Validity follows the generalized adjustment criterion in the true DAG.
class SidOracle {
 public:
  explicit SidOracle(const Dag& truth) : n_(truth.size()), pa_(n_), ch_(n_), desc_(n_) {
    require_dag(truth);
    for (VarId v = 0; v < n_; ++v) {
      pa_[v] = truth.parents(v);
      ch_[v] = truth.children(v);
      desc_[v] = descendants(truth, v);
    }
  }

  std::size_t mistakes(VarId i, std::vector<VarId> z) {
    std::sort(z.begin(), z.end());
    auto key = std::make_pair(i, z);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::size_t count = compute(i, z);
    memo_.emplace(std::move(key), count);
    return count;
  }

  std::size_t sid_of(const Dag& pred) {
    std::size_t total = 0;
    for (VarId i = 0; i < n_; ++i) total += mistakes(i, pred.parents(i));
    return total;
  }

 private:
  std::size_t compute(VarId i, const std::vector<VarId>& z) const {
    std::vector<char> in_z(n_, 0);
    for (VarId v : z) in_z[v] = 1;
    std::size_t count = 0;
    std::vector<char> cut(n_, 0);
    for (VarId j = 0; j < n_; ++j) {
      if (j == i) continue;
      if (in_z[j]) {
        if (desc_[i][j]) ++count;
        continue;
      }
      std::fill(cut.begin(), cut.end(), 0);
      bool forbidden_hit = false;
      if (desc_[i][j]) {
        // Nodes on proper causal paths i -> ... -> j (i excluded).
        for (VarId w = 0; w < n_ && !forbidden_hit; ++w) {
          if (!desc_[i][w] || !(w == j || desc_[w][j])) continue;
          cut[w] = 1;
          if (in_z[w]) forbidden_hit = true;
          for (VarId u = 0; u < n_ && !forbidden_hit; ++u)
            if (desc_[w][u] && in_z[u]) forbidden_hit = true;
        }
      }
      if (forbidden_hit || !separated(i, j, in_z, cut)) ++count;
    }
    return count;
  }

  // d-separation of x and y given Z after deleting arcs x -> w with cut[w].
  bool separated(VarId x, VarId y, const std::vector<char>& in_z, const std::vector<char>& cut) const {
    auto arc_live = [&](VarId from, VarId to) { return !(from == x && cut[to]); };
    std::vector<char> anc(n_, 0);
    std::vector<VarId> stack;
    for (VarId v = 0; v < n_; ++v)
      if (in_z[v]) {
        anc[v] = 1;
        stack.push_back(v);
      }
    while (!stack.empty()) {
      VarId u = stack.back();
      stack.pop_back();
      for (VarId p : pa_[u])
        if (!anc[p] && arc_live(p, u)) {
          anc[p] = 1;
          stack.push_back(p);
        }
    }
    std::vector<char> seen_up(n_, 0), seen_down(n_, 0);
    std::vector<std::pair<VarId, bool>> queue{{x, true}};
    while (!queue.empty()) {
      auto [v, up] = queue.back();
      queue.pop_back();
      if (up ? seen_up[v] : seen_down[v]) continue;
      (up ? seen_up : seen_down)[v] = 1;
      if (v == y && !in_z[v]) return false;
      if (up && !in_z[v]) {
        for (VarId p : pa_[v])
          if (arc_live(p, v)) queue.push_back({p, true});
        for (VarId c : ch_[v])
          if (arc_live(v, c)) queue.push_back({c, false});
      } else if (!up) {
        if (!in_z[v])
          for (VarId c : ch_[v])
            if (arc_live(v, c)) queue.push_back({c, false});
        if (anc[v])
          for (VarId p : pa_[v])
            if (arc_live(p, v)) queue.push_back({p, true});
      }
    }
    return true;
  }

  std::size_t n_;
  std::vector<std::vector<VarId>> pa_, ch_;
  std::vector<std::vector<char>> desc_;
  std::map<std::pair<VarId, std::vector<VarId>>, std::size_t> memo_;
};

}  // namespace detail

inline std::size_t sid_dag(const Dag& truth, const Dag& pred) {
  require_same_variables(truth, pred);
  require_dag(pred);
  return detail::SidOracle(truth).sid_of(pred);
}

struct SidBounds {
  std::size_t min = 0;
  std::size_t max = 0;
};

inline constexpr std::size_t default_extension_cap = 4096;

inline SidBounds sid_cpdag_bounds(const Dag& truth, const Pdag& pred,
                                  std::size_t cap = default_extension_cap,
                                  ExtensionPolicy policy = ExtensionPolicy::automatic) {
  require_same_variables(truth, pred);
  detail::SidOracle oracle(truth);
  SidBounds b{std::numeric_limits<std::size_t>::max(), 0};
  std::size_t count = 0;
  bool overflow = false;
  for_each_extension(pred, resolve_preserve_v(pred, policy), [&](const Pdag& d) {
    if (++count > cap) {
      overflow = true;
      return false;
    }
    std::size_t s = oracle.sid_of(d);
    b.min = std::min(b.min, s);
    b.max = std::max(b.max, s);
    return true;
  });
  if (overflow) throw TooManyExtensions(cap);
  if (count == 0) throw Infeasible("prediction has no acyclic extension");
  return b;
}

// Full report; SID is left empty when the extension count exceeds sid_cap.
inline MetricReport evaluate(const Dag& truth, const Pdag& pred,
                             std::optional<std::size_t> sid_cap = default_extension_cap) {
  MetricReport r;
  r.shd = shd(truth, pred, false);
  r.shd_double = shd(truth, pred, true);
  Prf1 p = prf1(truth, pred);
  r.precision = p.precision;
  r.recall = p.recall;
  r.f1 = p.f1;
  if (sid_cap) {
    try {
      SidBounds b = sid_cpdag_bounds(truth, pred, *sid_cap);
      r.sid_min = b.min;
      r.sid_max = b.max;
    } catch (const TooManyExtensions&) {
    }
  }
  return r;
}

// ----------------------------------------------------------------- ranks

struct RankSummary {
  // ranks[m][d]: fractional rank of method m on dataset d (1 = best).
  std::vector<std::vector<double>> ranks;
  std::vector<double> mean;
  std::vector<double> sd;
};

inline RankSummary average_ranks(const std::vector<std::vector<std::optional<double>>>& table,
                                 bool higher_is_better) {
  const std::size_t m = table.size();
  const std::size_t d = m ? table[0].size() : 0;
  for (const auto& row : table) {
    if (row.size() != d) throw MissingCell("ragged score table");
    for (const auto& cell : row)
      if (!cell) throw MissingCell("missing score cell");
  }
  RankSummary out;
  out.ranks.assign(m, std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto score = [&](std::size_t r) { return *table[r][c]; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? score(a) > score(b) : score(a) < score(b);
    });
    for (std::size_t k = 0; k < m;) {
      std::size_t e = k;
      while (e + 1 < m && score(order[e + 1]) == score(order[k])) ++e;
      double rank = (static_cast<double>(k + 1) + static_cast<double>(e + 1)) / 2.0;
      for (std::size_t t = k; t <= e; ++t) out.ranks[order[t]][c] = rank;
      k = e + 1;
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    double mu = 0;
    for (double x : out.ranks[r]) mu += x;
    mu = d ? mu / d : 0;
    double var = 0;
    for (double x : out.ranks[r]) var += (x - mu) * (x - mu);
    out.mean.push_back(mu);
    out.sd.push_back(d ? std::sqrt(var / d) : 0);
  }
  return out;
}

// ------------------------------------------------------- variance check

struct VarianceCheck {
  double empirical_var = 0;
  double analytic_var = 0;
  double standard_error = 0;
  double mean = 0;
  bool ok = false;
};

inline double beta_mean_variance(double alpha, double beta, std::size_t n) {
  double s = alpha + beta;
  return alpha * beta / (s * s * (s + 1) * static_cast<double>(n));
}

// Variance of the mean of n Beta(alpha, beta) samples, estimated from
// `draws` Monte-Carlo means and compared to the closed form.
inline VarianceCheck beta_variance_check(double alpha, double beta, std::size_t n,
                                         std::size_t draws, std::uint64_t seed) {
  if (!(alpha > 0) || !(beta > 0) || n == 0 || draws < 2)
    throw Error("beta_variance_check: invalid arguments");
  Rng rng(seed);
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  std::vector<double> means(draws);
  double sum = 0;
  for (auto& m : means) {
    double acc = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double x = ga(rng), y = gb(rng);
      acc += x / (x + y);
    }
    m = acc / static_cast<double>(n);
    sum += m;
  }
  VarianceCheck r;
  r.mean = sum / static_cast<double>(draws);
  double m2 = 0, m4 = 0;
  for (double m : means) {
    double d2 = (m - r.mean) * (m - r.mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m4 /= static_cast<double>(draws);
  r.empirical_var = m2 / static_cast<double>(draws - 1);
  r.analytic_var = beta_mean_variance(alpha, beta, n);
  double central = m2 / static_cast<double>(draws);
  r.standard_error = std::sqrt(std::max(0.0, m4 - central * central) / static_cast<double>(draws));
  r.ok = std::abs(r.empirical_var - r.analytic_var) < 4 * r.standard_error;
  return r;
}

}  // namespace tagdir
