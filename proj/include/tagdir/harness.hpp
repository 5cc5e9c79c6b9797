#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tagdir/bif.hpp"
#include "tagdir/discovery.hpp"
#include "tagdir/metrics.hpp"
#include "tagdir/orient.hpp"
#include "tagdir/tags.hpp"

namespace tagdir {

// Table order of the evaluation networks.
inline const std::vector<std::string>& all_datasets() {
  static const std::vector<std::string> ids = {"cancer", "earthquake", "survey", "asia",
                                               "lucas", "child", "alarm", "insurance",
                                               "hailfinder", "hepar2", "win95pts"};
  return ids;
}

inline std::size_t default_sample_size(const std::string& id) { return id == "lucas" ? 2000 : 10000; }

struct Dataset {
  std::string id;
  BifNetwork net;
  Dag dag;
};

inline Dataset load_dataset(const std::string& data_dir, const std::string& id) {
  auto path = std::filesystem::path(data_dir) / (id + ".bif");
  if (!std::filesystem::exists(path)) throw MissingDataset("no network file " + path.string());
  Dataset d{id, read_bif(path.string()), {}};
  d.dag = dag_of(d.net);
  return d;
}

// Tags from `<dir>/<id>.txt`, or topological layer tags when dir == "layer".
inline TagAssignment load_tags(const std::string& dir, const Dataset& ds) {
  if (dir == "layer") return layer_tags(ds.dag);
  auto path = std::filesystem::path(dir) / (ds.id + ".txt");
  if (!std::filesystem::exists(path)) throw MissingDataset("no tag file " + path.string());
  return parse_tags(read_file(path.string()), ds.dag.names());
}

// ------------------------------------------------------------ reporting

struct ResultRow {
  std::string dataset;
  std::string method;
  std::optional<std::uint64_t> seed;
  MetricReport metrics;
};

inline std::string format_ratio(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

inline std::string metrics_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "dataset,method,seed,shd,shd_double,sid_min,sid_max,precision,recall,f1\n";
  auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.dataset << ',' << csv_field(r.method) << ',' << (r.seed ? std::to_string(*r.seed) : "") << ','
       << r.metrics.shd << ',' << r.metrics.shd_double << ',' << opt(r.metrics.sid_min) << ','
       << opt(r.metrics.sid_max) << ',' << format_ratio(r.metrics.precision) << ','
       << format_ratio(r.metrics.recall) << ',' << format_ratio(r.metrics.f1) << '\n';
  }
  return os.str();
}

// SID is reported only for graphs up to this many variables, which leaves
// it out for Hailfinder, Hepar2 and Win95pts as in the reference tables.
inline constexpr std::size_t default_sid_max_nodes = 50;

inline MetricReport evaluate_scoped(const Dag& truth, const Pdag& pred, std::size_t sid_cap,
                                    std::size_t sid_max_nodes) {
  std::optional<std::size_t> cap;
  if (truth.size() <= sid_max_nodes) cap = sid_cap;
  return evaluate(truth, pred, cap);
}

// ------------------------------------------------------------- GT CPDAG

struct GtCpdagOptions {
  CpdagMode mode = CpdagMode::all_colliders;
  std::size_t sid_cap = default_extension_cap;
  std::size_t sid_max_nodes = default_sid_max_nodes;
  OrientConfig orient;
};

inline std::vector<ResultRow> run_gt_cpdag(const std::vector<Dataset>& datasets,
                                           const std::map<std::string, TagAssignment>& tags,
                                           const GtCpdagOptions& opt = {}) {
  std::vector<ResultRow> rows;
  for (const auto& ds : datasets) {
    Pdag cpdag = cpdag_of_dag(ds.dag, opt.mode);
    rows.push_back({ds.id, "GT CPDAG", std::nullopt, evaluate_scoped(ds.dag, cpdag, opt.sid_cap, opt.sid_max_nodes)});
    if (auto it = tags.find(ds.id); it != tags.end()) {
      Pdag tagged = orient_all(cpdag, it->second, opt.orient);
      rows.push_back({ds.id, "Tagging on GT CPDAG", std::nullopt,
                      evaluate_scoped(ds.dag, tagged, opt.sid_cap, opt.sid_max_nodes)});
    }
  }
  return rows;
}

// ---------------------------------------------------------------- faults

enum class Outcome { correct, incorrect, abstained };

inline Outcome classify(double q, double epsilon) {
  if (q > 0.5 + epsilon) return Outcome::correct;
  if (q < 0.5 - epsilon) return Outcome::incorrect;
  return Outcome::abstained;
}

struct FaultOptions {
  std::size_t max_remove = 10;
  std::size_t max_flip = 10;
  std::size_t sample_cap = 20000;
  std::uint64_t seed = 0;
  OrientConfig orient;
};

struct FaultPoint {
  std::string dataset;
  std::string kind;  // "remove" or "flip"
  std::size_t k = 0;
  std::size_t instances = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t abstained = 0;
  bool enumerated = false;

  std::size_t decided() const { return correct + incorrect; }
  double accuracy() const { return decided() ? static_cast<double>(correct) / decided() : 0.0; }
  double decision_rate() const { return instances ? static_cast<double>(decided()) / instances : 0.0; }
};

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Visits k-subsets of [0, n) in lexicographic order until f returns false.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    if (!f(idx)) return;
    std::size_t q = k;
    while (q > 0 && idx[q - 1] == n - k + (q - 1)) --q;
    if (q == 0) return;
    ++idx[q - 1];
    for (std::size_t r = q; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
}

inline void tally(FaultPoint& p, Outcome o) {
  ++p.instances;
  if (o == Outcome::correct) ++p.correct;
  else if (o == Outcome::incorrect) ++p.incorrect;
  else ++p.abstained;
}

inline Outcome score_probe(const Pdag& g, const TagAssignment& tags, const OrientConfig& cfg, Edge probe) {
  EvidenceMatrix e = collect_evidence(g, tags, cfg.anti_v);
  return classify(edge_preference(g, tags, e, probe.from, probe.to, cfg).q, cfg.epsilon);
}

}  // namespace detail

// One fault level. k = 0 is the unperturbed single-probe protocol.
inline FaultPoint run_fault_level(const Dataset& ds, const TagAssignment& raw_tags, const std::string& kind,
                                  std::size_t k, const FaultOptions& opt) {
  const TagAssignment tags = prepare_tags(raw_tags, opt.orient);
  const auto arcs = ds.dag.arcs();
  const std::size_t m = arcs.size();
  const bool flip = kind == "flip";
  FaultPoint p{ds.id, kind, k};
  if (k + 1 > m) return p;
  const double count = detail::binomial(m, k) * static_cast<double>(m - k);
  if (count <= static_cast<double>(opt.sample_cap)) {
    p.enumerated = true;
    detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& pick) {
      Pdag g = ds.dag;
      std::vector<char> touched(m, 0);
      for (auto i : pick) {
        touched[i] = 1;
        if (flip) g.direct(arcs[i].to, arcs[i].from);
        else g.remove_edge(arcs[i].from, arcs[i].to);
      }
      if (flip && !is_acyclic(g)) return true;
      for (std::size_t i = 0; i < m; ++i) {
        if (touched[i]) continue;
        Pdag h = g;
        h.undirect(arcs[i].from, arcs[i].to);
        detail::tally(p, detail::score_probe(h, tags, opt.orient, arcs[i]));
      }
      return true;
    });
    return p;
  }
  const std::uint64_t level_seed = mix_seed(opt.seed, (flip ? 1000 : 0) + k);
  for (std::size_t s = 0; s < opt.sample_cap; ++s) {
    FaultSpec spec{flip ? 0 : k, flip ? k : 0, 1, mix_seed(level_seed, s)};
    FaultResult r;
    try {
      r = inject_faults(ds.dag, spec);
    } catch (const Infeasible&) {
      continue;
    }
    detail::tally(p, detail::score_probe(r.graph, tags, opt.orient, r.probe()));
  }
  return p;
}

inline std::vector<FaultPoint> run_faults(const Dataset& ds, const TagAssignment& tags, const FaultOptions& opt = {}) {
  std::vector<FaultPoint> out;
  out.push_back(run_fault_level(ds, tags, "remove", 0, opt));
  for (std::size_t k = 1; k <= opt.max_remove; ++k) out.push_back(run_fault_level(ds, tags, "remove", k, opt));
  for (std::size_t k = 1; k <= opt.max_flip; ++k) out.push_back(run_fault_level(ds, tags, "flip", k, opt));
  return out;
}

inline std::string faults_csv(const std::vector<FaultPoint>& pts) {
  std::ostringstream os;
  os << "dataset,kind,k,instances,correct,incorrect,abstained,accuracy,decision_rate,enumerated\n";
  for (const auto& p : pts)
    os << p.dataset << ',' << p.kind << ',' << p.k << ',' << p.instances << ',' << p.correct << ','
       << p.incorrect << ',' << p.abstained << ',' << format_ratio(p.accuracy()) << ','
       << format_ratio(p.decision_rate()) << ',' << (p.enumerated ? "true" : "false") << '\n';
  return os.str();
}

// -------------------------------------------------------------- undirect

struct UndirectOptions {
  std::size_t k_min = 1;
  std::size_t k_max = 6;
  std::size_t sample_cap = 20000;
  std::uint64_t seed = 0;
  OrientConfig orient;
};

struct UndirectPoint {
  std::string dataset;
  std::size_t k = 0;
  std::size_t instances = 0;  // kept instances
  std::size_t filtered = 0;   // instances where Meek alone directs a probe
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t abstained = 0;
  bool enumerated = false;

  std::size_t decided() const { return correct + incorrect; }
  double accuracy() const { return decided() ? static_cast<double>(correct) / decided() : 0.0; }
};

inline UndirectPoint run_undirect_level(const Dataset& ds, const TagAssignment& tags, std::size_t k,
                                        const UndirectOptions& opt) {
  const auto arcs = ds.dag.arcs();
  const std::size_t m = arcs.size();
  UndirectPoint p{ds.id, k};
  if (k == 0 || k > m) return p;
  auto run = [&](const std::vector<std::size_t>& pick) {
    Pdag g = ds.dag;
    for (auto i : pick) g.undirect(arcs[i].from, arcs[i].to);
    Pdag closed = meek_closure(g);
    for (auto i : pick)
      if (!closed.has_undirected(arcs[i].from, arcs[i].to)) {
        ++p.filtered;
        return;
      }
    ++p.instances;
    Pdag out = orient_all(g, tags, opt.orient);
    for (auto i : pick) {
      const Edge e = arcs[i];
      if (out.has_arc(e.from, e.to)) ++p.correct;
      else if (out.has_arc(e.to, e.from)) ++p.incorrect;
      else ++p.abstained;
    }
  };
  if (detail::binomial(m, k) <= static_cast<double>(opt.sample_cap)) {
    p.enumerated = true;
    detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& pick) {
      run(pick);
      return true;
    });
  } else {
    const std::uint64_t level_seed = mix_seed(opt.seed, k);
    for (std::size_t s = 0; s < opt.sample_cap; ++s) {
      Rng rng(mix_seed(level_seed, s));
      auto pick = sample_indices(rng, m, k);
      std::sort(pick.begin(), pick.end());
      run(pick);
    }
  }
  return p;
}

inline std::vector<UndirectPoint> run_undirect(const Dataset& ds, const TagAssignment& tags,
                                               const UndirectOptions& opt = {}) {
  std::vector<UndirectPoint> out;
  for (std::size_t k = opt.k_min; k <= opt.k_max; ++k) out.push_back(run_undirect_level(ds, tags, k, opt));
  return out;
}

inline std::string undirect_csv(const std::vector<UndirectPoint>& pts) {
  std::ostringstream os;
  os << "dataset,k,instances,filtered,correct,incorrect,abstained,accuracy,enumerated\n";
  for (const auto& p : pts)
    os << p.dataset << ',' << p.k << ',' << p.instances << ',' << p.filtered << ',' << p.correct << ','
       << p.incorrect << ',' << p.abstained << ',' << format_ratio(p.accuracy()) << ','
       << (p.enumerated ? "true" : "false") << '\n';
  return os.str();
}

// ------------------------------------------------------------- tag noise

struct NoisePoint {
  std::string dataset;
  double level = 0;
  std::size_t seeds = 0;          // seeds with at least one decided probe
  double mean_accuracy = 0;
  double mean_decision_rate = 0;
};

struct NoiseOptions {
  std::vector<double> levels = {0, 10, 20, 30, 40, 50};
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  OrientConfig orient;
};

inline std::vector<NoisePoint> run_tag_noise(const Dataset& ds, const TagAssignment& tags,
                                             const NoiseOptions& opt = {}) {
  std::vector<NoisePoint> out;
  UndirectOptions uo;
  uo.k_min = uo.k_max = 1;
  uo.orient = opt.orient;
  for (double level : opt.levels) {
    NoisePoint p{ds.id, level};
    double acc = 0, rate = 0;
    for (std::size_t s = 0; s < opt.seeds; ++s) {
      TagAssignment noisy = add_tag_noise(tags, level, mix_seed(opt.seed, s));
      UndirectPoint u = run_undirect_level(ds, noisy, 1, uo);
      if (u.instances) rate += static_cast<double>(u.decided()) / static_cast<double>(u.instances);
      if (u.decided() == 0) continue;
      acc += u.accuracy();
      ++p.seeds;
    }
    p.mean_accuracy = p.seeds ? acc / static_cast<double>(p.seeds) : 0.0;
    p.mean_decision_rate = opt.seeds ? rate / static_cast<double>(opt.seeds) : 0.0;
    out.push_back(p);
  }
  return out;
}

inline std::string noise_csv(const std::vector<NoisePoint>& pts) {
  std::ostringstream os;
  os << "dataset,noise_pct,seeds_decided,mean_accuracy,mean_decision_rate\n";
  for (const auto& p : pts)
    os << p.dataset << ',' << p.level << ',' << p.seeds << ',' << format_ratio(p.mean_accuracy) << ','
       << format_ratio(p.mean_decision_rate) << '\n';
  return os.str();
}

// ----------------------------------------------------------------- sweep

// Every combination of min-samples, singleton removal, prior, Meek policy
// and redirection settings: 2 * 2 * 2 * 2 * (1 + 2 * 2) = 80.
inline std::vector<OrientConfig> default_grid() {
  std::vector<OrientConfig> grid;
  for (std::size_t ms : {1, 2})
    for (bool fewer : {false, true})
      for (bool prior : {false, true})
        for (bool meek : {false, true}) {
          OrientConfig c;
          c.min_samples = ms;
          c.drop_singletons = fewer;
          c.specificity_prior = prior;
          c.always_meek = meek;
          grid.push_back(c);
          for (auto strat : {RedirectStrategy::update_evidence, RedirectStrategy::freeze_evidence})
            for (bool include : {true, false}) {
              OrientConfig r = c;
              r.redirect = true;
              r.redirect_strategy = strat;
              r.include_current_edge = include;
              grid.push_back(r);
            }
        }
  return grid;
}

struct SweepInput {
  std::string dataset;
  std::uint64_t seed = 0;
  Dag truth;
  Pdag input;
};

struct SweepRow {
  std::string tag_set;
  OrientConfig config;
  double mean_f1 = 0;
  double mean_rank = 0;
  double sd_rank = 0;
  std::vector<double> dataset_f1;  // mean over seeds, dataset order of `datasets`
};

struct SweepResult {
  std::vector<std::string> datasets;
  std::vector<SweepRow> rows;  // sorted by mean F1, descending
};

// `tag_sets` maps a tag-set name (one per annotator) to per-dataset tags.
inline SweepResult run_sweep(const std::vector<SweepInput>& inputs,
                             const std::map<std::string, std::map<std::string, TagAssignment>>& tag_sets,
                             const std::vector<OrientConfig>& grid) {
  SweepResult res;
  for (const auto& in : inputs)
    if (std::find(res.datasets.begin(), res.datasets.end(), in.dataset) == res.datasets.end())
      res.datasets.push_back(in.dataset);
  for (const auto& [name, per_dataset] : tag_sets)
    for (const auto& cfg : grid) {
      SweepRow row{name, cfg, 0, 0, 0, {}};
      std::vector<double> sum(res.datasets.size(), 0.0);
      std::vector<std::size_t> cnt(res.datasets.size(), 0);
      double total = 0;
      std::size_t runs = 0;
      for (const auto& in : inputs) {
        auto it = per_dataset.find(in.dataset);
        if (it == per_dataset.end()) throw MissingDataset("tag set " + name + " lacks " + in.dataset);
        double f1 = prf1(in.truth, orient_all(in.input, it->second, cfg)).f1;
        auto d = static_cast<std::size_t>(
            std::find(res.datasets.begin(), res.datasets.end(), in.dataset) - res.datasets.begin());
        sum[d] += f1;
        ++cnt[d];
        total += f1;
        ++runs;
      }
      for (std::size_t d = 0; d < sum.size(); ++d) row.dataset_f1.push_back(cnt[d] ? sum[d] / cnt[d] : 0.0);
      row.mean_f1 = runs ? total / static_cast<double>(runs) : 0.0;
      res.rows.push_back(std::move(row));
    }
  if (!res.rows.empty() && !res.datasets.empty()) {
    std::vector<std::vector<std::optional<double>>> table;
    for (const auto& r : res.rows) table.emplace_back(r.dataset_f1.begin(), r.dataset_f1.end());
    RankSummary ranks = average_ranks(table, true);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      res.rows[i].mean_rank = ranks.mean[i];
      res.rows[i].sd_rank = ranks.sd[i];
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.mean_f1 > b.mean_f1; });
  return res;
}

inline std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "tag_set,min_samples,drop_singletons,specificity_prior,always_meek,redirect,redirect_strategy,"
        "include_current_edge,mean_f1,mean_rank,sd_rank";
  for (const auto& d : r.datasets) os << ",f1_" << d;
  os << '\n';
  auto flag = [](bool b) { return b ? "true" : "false"; };
  for (const auto& row : r.rows) {
    const auto& c = row.config;
    os << csv_field(row.tag_set) << ',' << c.min_samples << ',' << flag(c.drop_singletons) << ','
       << flag(c.specificity_prior) << ',' << flag(c.always_meek) << ',' << flag(c.redirect) << ',';
    if (c.redirect) os << static_cast<int>(c.redirect_strategy) << ',' << flag(c.include_current_edge);
    else os << "-,-";
    os << ',' << format_ratio(row.mean_f1) << ',' << format_ratio(row.mean_rank) << ',' << format_ratio(row.sd_rank);
    for (double f : row.dataset_f1) os << ',' << format_ratio(f);
    os << '\n';
  }
  return os.str();
}

// -------------------------------------------------------------- end2end

struct End2EndOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  PcOptions pc;
  OrientConfig orient;
  // When set, PC answers independence queries by d-separation in this DAG
  // instead of testing sampled data.
  std::optional<Dag> oracle;
  std::size_t sid_cap = default_extension_cap;
  std::size_t sid_max_nodes = default_sid_max_nodes;
  // Directory for the sampled data and the three graphs; empty to skip.
  std::string out_dir;
};

struct End2EndResult {
  Pdag pc;
  Pdag tagged;
  std::vector<ResultRow> rows;
};

inline End2EndResult run_end2end(const Dataset& ds, const TagAssignment& tags, const End2EndOptions& opt) {
  End2EndResult r;
  std::optional<DataTable> data;
  if (opt.oracle) {
    r.pc = pc_stable_oracle(align_to(*opt.oracle, ds.dag.names()), opt.pc.max_cond_size).graph;
  } else {
    data = forward_sample(ds.net, opt.samples, opt.seed);
    r.pc = pc_stable(*data, opt.pc).graph;
  }
  r.tagged = orient_all(r.pc, tags, opt.orient);
  r.rows.push_back({ds.id, "PC", opt.seed, evaluate_scoped(ds.dag, r.pc, opt.sid_cap, opt.sid_max_nodes)});
  r.rows.push_back({ds.id, "Tagged-PC", opt.seed, evaluate_scoped(ds.dag, r.tagged, opt.sid_cap, opt.sid_max_nodes)});
  if (!opt.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::string stem = ds.id + "-seed" + std::to_string(opt.seed);
    auto at = [&](const std::string& f) { return (fs::path(opt.out_dir) / (stem + f)).string(); };
    if (data) write_csv(at("-data.csv"), *data);
    write_file(at("-truth.edges"), to_edge_list(ds.dag));
    write_file(at("-pc.edges"), to_edge_list(r.pc));
    write_file(at("-tagged.edges"), to_edge_list(r.tagged));
  }
  return r;
}

}  // namespace tagdir
