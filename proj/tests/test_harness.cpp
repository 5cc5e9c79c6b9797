#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"
#include "tagdir/harness.hpp"

using namespace tagdir;
using namespace testing_support;

namespace {

const std::string networks = data_path("networks");

Dataset ds(const std::string& id) { return load_dataset(networks, id); }

Dataset tiny(const std::string& edges) {
  Dataset d;
  d.id = "tiny";
  d.dag = parse_edge_list(edges);
  return d;
}

const ResultRow& row_for(const std::vector<ResultRow>& rows, const std::string& id, const std::string& method) {
  for (const auto& r : rows)
    if (r.dataset == id && r.method == method) return r;
  throw std::runtime_error("missing row " + id + "/" + method);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tagdir-harness-" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Datasets, TableOrderAndSampleSizes) {
  const auto& ids = all_datasets();
  ASSERT_EQ(ids.size(), 11u);
  EXPECT_EQ(ids.front(), "cancer");
  EXPECT_EQ(default_sample_size("lucas"), 2000u);
  EXPECT_EQ(default_sample_size("alarm"), 10000u);
  for (const auto& id : ids) EXPECT_NO_THROW(ds(id)) << id;
}

TEST(Datasets, MissingFilesReported) {
  EXPECT_THROW(load_dataset(networks, "nope"), MissingDataset);
  EXPECT_THROW(load_tags("/nonexistent", ds("asia")), MissingDataset);
  EXPECT_EQ(load_tags("layer", ds("asia")).num_tags(), layer_tags(ds("asia").dag).num_tags());
}

TEST(GtCpdag, SmallNetworkRows) {
  std::vector<Dataset> sets;
  for (const char* id : {"cancer", "earthquake", "survey", "asia", "lucas"}) sets.push_back(ds(id));
  auto rows = run_gt_cpdag(sets, {});
  ASSERT_EQ(rows.size(), 5u);
  for (const char* id : {"cancer", "earthquake", "survey"}) {
    const auto& m = row_for(rows, id, "GT CPDAG").metrics;
    EXPECT_EQ(m.shd, 0u);
    EXPECT_EQ(m.shd_double, 0u);
    EXPECT_EQ(m.sid_min, 0u);
    EXPECT_EQ(m.sid_max, 0u);
    EXPECT_DOUBLE_EQ(m.f1, 1.0);
  }
  const auto& asia = row_for(rows, "asia", "GT CPDAG").metrics;
  EXPECT_EQ(asia.shd, 3u);
  EXPECT_EQ(asia.sid_min, 0u);
  EXPECT_EQ(asia.sid_max, 12u);
  EXPECT_EQ(format_ratio(asia.precision), "1.0000");
  EXPECT_NEAR(asia.recall, 0.62, 0.005 + 1e-9);
  EXPECT_NEAR(asia.f1, 0.77, 0.005);
  const auto& lucas = row_for(rows, "lucas", "GT CPDAG").metrics;
  EXPECT_EQ(lucas.shd, 1u);
  EXPECT_EQ(lucas.sid_max, 7u);
}

TEST(GtCpdag, HailfinderSidSkipped) {
  auto rows = run_gt_cpdag({ds("hailfinder")}, {});
  const auto& m = rows.at(0).metrics;
  EXPECT_EQ(m.shd, 17u);
  EXPECT_NEAR(m.recall, 0.74, 0.005);
  EXPECT_FALSE(m.sid_min.has_value());
  EXPECT_FALSE(m.sid_max.has_value());
  std::string csv = metrics_csv(rows);
  EXPECT_NE(csv.find("hailfinder,GT CPDAG,,17,17,,,1.0000,"), std::string::npos) << csv;
}

TEST(GtCpdag, TaggedRowWhenTagsGiven) {
  Dataset asia = ds("asia");
  auto rows = run_gt_cpdag({asia}, {{"asia", load_tags(data_path("tags"), asia)}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].method, "Tagging on GT CPDAG");
  EXPECT_GT(rows[1].metrics.recall, 0.0);
  EXPECT_LE(rows[1].metrics.shd, 8u);
}

TEST(GtCpdag, CsvHeader) {
  std::string csv = metrics_csv({});
  EXPECT_EQ(csv, "dataset,method,seed,shd,shd_double,sid_min,sid_max,precision,recall,f1\n");
}

TEST(Faults, ClassifyByEpsilon) {
  EXPECT_EQ(classify(0.8, 0.1), Outcome::correct);
  EXPECT_EQ(classify(0.2, 0.1), Outcome::incorrect);
  EXPECT_EQ(classify(0.55, 0.1), Outcome::abstained);
  EXPECT_EQ(classify(0.5, 0.0), Outcome::abstained);
}

TEST(Faults, SubsetsLexicographic) {
  std::vector<std::vector<std::size_t>> seen;
  detail::for_each_subset(4, 2, [&](const std::vector<std::size_t>& s) {
    seen.push_back(s);
    return true;
  });
  std::vector<std::vector<std::size_t>> want{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(seen, want);
  EXPECT_DOUBLE_EQ(detail::binomial(46, 3), 15180.0);
}

TEST(Faults, EnumeratedAccounting) {
  Dataset asia = ds("asia");
  TagAssignment tags = layer_tags(asia.dag);
  const std::size_t m = asia.dag.arcs().size();
  for (std::size_t k = 0; k <= 3; ++k) {
    FaultPoint p = run_fault_level(asia, tags, "remove", k, {});
    EXPECT_TRUE(p.enumerated);
    EXPECT_DOUBLE_EQ(static_cast<double>(p.instances), detail::binomial(m, k) * static_cast<double>(m - k));
    EXPECT_EQ(p.instances, p.correct + p.incorrect + p.abstained);
    FaultPoint f = run_fault_level(asia, tags, "flip", k, {});
    EXPECT_LE(f.instances, p.instances);
    EXPECT_EQ(f.instances, f.correct + f.incorrect + f.abstained);
  }
}

TEST(Faults, ZeroFaultsWithLayerTagsNeverWrong) {
  for (const char* id : {"asia", "child", "alarm"}) {
    Dataset d = ds(id);
    FaultPoint p = run_fault_level(d, layer_tags(d.dag), "remove", 0, {});
    EXPECT_EQ(p.instances, d.dag.arcs().size());
    EXPECT_EQ(p.incorrect, 0u) << id;
    EXPECT_GT(p.correct, 0u) << id;
    EXPECT_DOUBLE_EQ(p.accuracy(), 1.0);
  }
}

TEST(Faults, ConsistentProbeWorkedExample) {
  // A -> B, A -> C, A -> D with tags x on A and y on B, C, D: every probe has
  // two supporting edges with the same tag pair.
  Dataset d = tiny("A -> B\nA -> C\nA -> D\n");
  TagAssignment t = parse_tags("x: A\ny: B, C, D\n", d.dag.names());
  FaultPoint p = run_fault_level(d, t, "remove", 0, {});
  EXPECT_EQ(p.instances, 3u);
  EXPECT_EQ(p.correct, 3u);
}

TEST(Faults, SampledLevelsDeterministic) {
  Dataset alarm = ds("alarm");
  TagAssignment tags = layer_tags(alarm.dag);
  FaultOptions opt;
  opt.sample_cap = 300;
  opt.seed = 9;
  FaultPoint a = run_fault_level(alarm, tags, "flip", 4, opt);
  FaultPoint b = run_fault_level(alarm, tags, "flip", 4, opt);
  EXPECT_FALSE(a.enumerated);
  EXPECT_EQ(a.instances, 300u);
  EXPECT_EQ(std::tie(a.correct, a.incorrect, a.abstained), std::tie(b.correct, b.incorrect, b.abstained));
  auto pts = run_faults(alarm, tags, FaultOptions{2, 2, 300, 9, {}});
  EXPECT_EQ(pts.size(), 5u);
  EXPECT_EQ(faults_csv(pts), faults_csv(run_faults(alarm, tags, FaultOptions{2, 2, 300, 9, {}})));
}

TEST(Undirect, AccountingIdentity) {
  Dataset asia = ds("asia");
  TagAssignment tags = layer_tags(asia.dag);
  const std::size_t m = asia.dag.arcs().size();
  for (const auto& p : run_undirect(asia, tags, {})) {
    EXPECT_TRUE(p.enumerated);
    EXPECT_DOUBLE_EQ(static_cast<double>(p.instances + p.filtered), detail::binomial(m, p.k));
    EXPECT_EQ(p.correct + p.incorrect + p.abstained, p.instances * p.k);
    EXPECT_EQ(p.incorrect, 0u);
  }
}

TEST(Undirect, TwoNodeGraphAbstains) {
  Dataset d = tiny("A -> B\n");
  UndirectPoint p = run_undirect_level(d, layer_tags(d.dag), 1, {});
  EXPECT_EQ(p.instances, 1u);
  EXPECT_EQ(p.filtered, 0u);
  EXPECT_EQ(p.abstained, 1u);
  EXPECT_EQ(run_undirect_level(d, layer_tags(d.dag), 2, {}).instances, 0u);
}

TEST(Undirect, SampledWhenAboveCap) {
  Dataset alarm = ds("alarm");
  UndirectOptions opt;
  opt.sample_cap = 200;
  UndirectPoint p = run_undirect_level(alarm, layer_tags(alarm.dag), 3, opt);
  EXPECT_FALSE(p.enumerated);
  EXPECT_EQ(p.instances + p.filtered, 200u);
  EXPECT_EQ(undirect_csv({p}).substr(0, 14), "dataset,k,inst");
}

TEST(TagNoise, LevelZeroMatchesSingleUndirect) {
  Dataset child = ds("child");
  TagAssignment tags = layer_tags(child.dag);
  NoiseOptions opt;
  opt.levels = {0};
  opt.seeds = 3;
  auto pts = run_tag_noise(child, tags, opt);
  UndirectPoint u = run_undirect_level(child, tags, 1, {});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_DOUBLE_EQ(pts[0].mean_accuracy, u.accuracy());
  EXPECT_EQ(pts[0].seeds, 3u);
}

TEST(TagNoise, SameSeedsSameCurve) {
  Dataset alarm = ds("alarm");
  TagAssignment tags = layer_tags(alarm.dag);
  NoiseOptions opt;
  opt.levels = {0, 30, 50};
  opt.seeds = 4;
  opt.seed = 5;
  EXPECT_EQ(noise_csv(run_tag_noise(alarm, tags, opt)), noise_csv(run_tag_noise(alarm, tags, opt)));
}

TEST(Sweep, DefaultGridHasEightyDistinctConfigs) {
  auto grid = default_grid();
  ASSERT_EQ(grid.size(), 80u);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j) EXPECT_FALSE(grid[i] == grid[j]) << i << " " << j;
}

TEST(Sweep, GridOfOneGivesOneRow) {
  Dataset asia = ds("asia");
  std::vector<SweepInput> in{{"asia", 0, asia.dag, cpdag_of_dag(asia.dag, CpdagMode::all_colliders)}};
  auto res = run_sweep(in, {{"layer", {{"asia", layer_tags(asia.dag)}}}}, {OrientConfig{}});
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.datasets, std::vector<std::string>{"asia"});
  EXPECT_DOUBLE_EQ(res.rows[0].mean_f1, res.rows[0].dataset_f1[0]);
}

TEST(Sweep, SortedAndInertFlagInvariant) {
  std::vector<SweepInput> in;
  std::map<std::string, TagAssignment> layer;
  for (const char* id : {"asia", "child", "insurance"}) {
    Dataset d = ds(id);
    in.push_back({id, 0, d.dag, cpdag_of_dag(d.dag, CpdagMode::all_colliders)});
    layer[id] = layer_tags(d.dag);
  }
  auto res = run_sweep(in, {{"layer", layer}}, default_grid());
  ASSERT_EQ(res.rows.size(), 80u);
  for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_GE(res.rows[i - 1].mean_f1, res.rows[i].mean_f1);

  OrientConfig a, b;
  b.include_current_edge = !a.include_current_edge;  // only read when redirecting
  auto two = run_sweep(in, {{"layer", layer}}, {a, b});
  EXPECT_DOUBLE_EQ(two.rows[0].mean_f1, two.rows[1].mean_f1);
  EXPECT_DOUBLE_EQ(two.rows[0].mean_rank, two.rows[1].mean_rank);

  std::string csv = sweep_csv(two);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "tag_set,min_samples,drop_singletons,specificity_prior,always_meek,redirect,redirect_strategy,"
            "include_current_edge,mean_f1,mean_rank,sd_rank,f1_asia,f1_child,f1_insurance");
}

TEST(Sweep, MissingDatasetInTagSet) {
  Dataset asia = ds("asia");
  std::vector<SweepInput> in{{"asia", 0, asia.dag, cpdag_of_dag(asia.dag)}};
  EXPECT_THROW(run_sweep(in, {{"empty", {}}}, {OrientConfig{}}), MissingDataset);
}

TEST(End2End, OracleModeMatchesGroundTruthOrientation) {
  for (const char* id : {"asia", "child", "insurance"}) {
    Dataset d = ds(id);
    TagAssignment tags = layer_tags(d.dag);
    End2EndOptions opt;
    opt.oracle = d.dag;
    opt.pc.max_cond_size = std::nullopt;
    End2EndResult r = run_end2end(d, tags, opt);
    EXPECT_EQ(r.pc, cpdag_of_dag(d.dag)) << id;
    EXPECT_EQ(r.tagged, orient_all(cpdag_of_dag(d.dag), tags, opt.orient)) << id;
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.rows[0].method, "PC");
    EXPECT_EQ(r.rows[1].method, "Tagged-PC");
  }
}

TEST(End2End, DeterministicAndPersisted) {
  Dataset asia = ds("asia");
  TagAssignment tags = load_tags(data_path("tags"), asia);
  auto dir = scratch("e2e");
  End2EndOptions opt;
  opt.samples = 2000;
  opt.seed = 3;
  opt.out_dir = dir.string();
  End2EndResult a = run_end2end(asia, tags, opt);
  std::string pc_file = read_file((dir / "asia-seed3-pc.edges").string());
  std::string data_file = read_file((dir / "asia-seed3-data.csv").string());
  End2EndResult b = run_end2end(asia, tags, opt);
  EXPECT_EQ(a.pc, b.pc);
  EXPECT_EQ(a.tagged, b.tagged);
  EXPECT_EQ(metrics_csv(a.rows), metrics_csv(b.rows));
  EXPECT_EQ(read_file((dir / "asia-seed3-pc.edges").string()), pc_file);
  EXPECT_EQ(read_file((dir / "asia-seed3-data.csv").string()), data_file);
  EXPECT_EQ(parse_edge_list(read_file((dir / "asia-seed3-truth.edges").string())), asia.dag);
  EXPECT_EQ(parse_edge_list(read_file((dir / "asia-seed3-tagged.edges").string())), a.tagged);
  EXPECT_EQ(read_csv((dir / "asia-seed3-data.csv").string()).num_rows(), 2000u);
  EXPECT_NE(metrics_csv(a.rows).find("asia,Tagged-PC,3,"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(parse_orient_config("min_samples = 2\ncolour = blue\n"), ConfigError);
  EXPECT_EQ(parse_orient_config("min_samples = 2\n").min_samples, 2u);
}
