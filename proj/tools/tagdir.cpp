// Command-line runner for the orientation library and its experiment suites.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tagdir/harness.hpp"
#include "tagdir/llm.hpp"

namespace fs = std::filesystem;
using namespace tagdir;

namespace {

// Settings shared by all subcommands. A --config file may set any orientation
// key plus the run keys below; command-line flags win over the file.
struct Settings {
  std::string config_path;
  std::string out_dir = "results";
  std::string data_dir = "data/networks";
  std::string tags_dir = "data/tags";
  std::vector<std::string> datasets;
  std::uint64_t seed = 0;
  std::size_t seeds = 10;
  std::optional<std::size_t> samples;
  std::size_t sample_cap = 20000;
  double alpha = 0.05;
  std::optional<std::size_t> max_cond_size = 3;
  bool sid_all = false;
  OrientConfig orient;
};

void apply_config_file(Settings& s, CLI::App& app) {
  if (s.config_path.empty()) return;
  for (const auto& [key, value] : parse_key_values(read_file(s.config_path))) {
    if (apply_orient_setting(s.orient, key, value)) continue;
    // Run keys only apply when the matching flag was not given.
    auto unset = [&](const char* flag) { return app.get_option(flag)->count() == 0; };
    if (key == "alpha") {
      if (unset("--alpha")) s.alpha = detail::parse_real(key, value);
    } else if (key == "max_cond_size") {
      if (unset("--max-cond-size")) {
        if (value == "none") s.max_cond_size.reset();
        else s.max_cond_size = detail::parse_count(key, value);
      }
    } else if (key == "seed") {
      if (unset("--seed")) s.seed = detail::parse_count(key, value);
    } else if (key == "seeds") {
      if (unset("--seeds")) s.seeds = detail::parse_count(key, value);
    } else if (key == "samples") {
      if (unset("--samples")) s.samples = detail::parse_count(key, value);
    } else if (key == "sample_cap") {
      if (unset("--sample-cap")) s.sample_cap = detail::parse_count(key, value);
    } else if (key == "data_dir") {
      if (unset("--data")) s.data_dir = value;
    } else if (key == "tags_dir") {
      if (unset("--tags")) s.tags_dir = value;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  s.orient.validate();
}

std::vector<std::string> selected(const Settings& s) { return s.datasets.empty() ? all_datasets() : s.datasets; }

void emit(const Settings& s, const std::string& file, const std::string& content) {
  fs::create_directories(s.out_dir);
  auto path = (fs::path(s.out_dir) / file).string();
  write_file(path, content);
  std::cout << content;
  std::cerr << "wrote " << path << '\n';
}

Dataset one_dataset(const Settings& s) {
  if (s.datasets.size() != 1) throw ConfigError("this command needs exactly one --dataset");
  return load_dataset(s.data_dir, s.datasets.front());
}

int cmd_gt_cpdag(const Settings& s, bool with_tags) {
  std::vector<Dataset> ds;
  std::map<std::string, TagAssignment> tags;
  for (const auto& id : selected(s)) {
    ds.push_back(load_dataset(s.data_dir, id));
    if (with_tags) tags.emplace(id, load_tags(s.tags_dir, ds.back()));
  }
  GtCpdagOptions opt;
  opt.orient = s.orient;
  if (s.sid_all) opt.sid_max_nodes = SIZE_MAX;
  emit(s, "gt_cpdag.csv", metrics_csv(run_gt_cpdag(ds, tags, opt)));
  return 0;
}

int cmd_faults(const Settings& s, std::size_t max_remove, std::size_t max_flip) {
  std::vector<FaultPoint> all;
  for (const auto& id : selected(s)) {
    Dataset ds = load_dataset(s.data_dir, id);
    FaultOptions opt;
    opt.max_remove = max_remove;
    opt.max_flip = max_flip;
    opt.sample_cap = s.sample_cap;
    opt.seed = s.seed;
    opt.orient = s.orient;
    auto pts = run_faults(ds, load_tags(s.tags_dir, ds), opt);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  emit(s, "faults.csv", faults_csv(all));
  return 0;
}

int cmd_undirect(const Settings& s, std::size_t k_min, std::size_t k_max) {
  std::vector<UndirectPoint> all;
  for (const auto& id : selected(s)) {
    Dataset ds = load_dataset(s.data_dir, id);
    UndirectOptions opt;
    opt.k_min = k_min;
    opt.k_max = k_max;
    opt.sample_cap = s.sample_cap;
    opt.seed = s.seed;
    opt.orient = s.orient;
    auto pts = run_undirect(ds, load_tags(s.tags_dir, ds), opt);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  emit(s, "undirect.csv", undirect_csv(all));
  return 0;
}

int cmd_tag_noise(const Settings& s, const std::vector<double>& levels) {
  std::vector<NoisePoint> all;
  for (const auto& id : selected(s)) {
    Dataset ds = load_dataset(s.data_dir, id);
    NoiseOptions opt;
    opt.levels = levels;
    opt.seeds = s.seeds;
    opt.seed = s.seed;
    opt.orient = s.orient;
    auto pts = run_tag_noise(ds, load_tags(s.tags_dir, ds), opt);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  emit(s, "tag_noise.csv", noise_csv(all));
  return 0;
}

int cmd_sweep(const Settings& s, const std::vector<std::string>& tag_sets, const std::string& input) {
  std::map<std::string, std::map<std::string, TagAssignment>> tags;
  std::vector<SweepInput> inputs;
  for (const auto& id : selected(s)) {
    Dataset ds = load_dataset(s.data_dir, id);
    for (const auto& spec : tag_sets) {
      auto eq = spec.find('=');
      std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
      std::string dir = eq == std::string::npos ? spec : spec.substr(eq + 1);
      tags[name].emplace(id, load_tags(dir, ds));
    }
    if (input == "gt") {
      inputs.push_back({id, 0, ds.dag, cpdag_of_dag(ds.dag, CpdagMode::all_colliders)});
      continue;
    }
    PcOptions pc{s.alpha, s.max_cond_size};
    for (std::size_t k = 0; k < s.seeds; ++k) {
      std::uint64_t seed = s.seed + k;
      DataTable data = forward_sample(ds.net, s.samples.value_or(default_sample_size(id)), seed);
      inputs.push_back({id, seed, ds.dag, pc_stable(data, pc).graph});
    }
  }
  SweepResult r = run_sweep(inputs, tags, default_grid());
  std::cerr << "grid size " << default_grid().size() << " per tag set\n";
  emit(s, "sweep.csv", sweep_csv(r));
  return 0;
}

int cmd_mine(const Settings& s, const std::string& graph_path, long long min_support) {
  Dataset ds = one_dataset(s);
  TagAssignment tags = prepare_tags(load_tags(s.tags_dir, ds), s.orient);
  Pdag g = graph_path.empty() ? ds.dag : align_to(parse_edge_list(read_file(graph_path)), ds.dag.names());
  EvidenceMatrix e = collect_evidence(g, tags, s.orient.anti_v);
  auto rel = mine_relations(e, min_support);
  for (const auto& r : rel) std::cerr << render_relation(r, e, tags) << '\n';
  emit(s, ds.id + "_relations.csv", relations_csv(rel, tags));
  return 0;
}

int cmd_end2end(const Settings& s, const std::string& oracle_path) {
  std::vector<ResultRow> rows;
  for (const auto& id : selected(s)) {
    Dataset ds = load_dataset(s.data_dir, id);
    TagAssignment tags = load_tags(s.tags_dir, ds);
    End2EndOptions opt;
    opt.samples = s.samples.value_or(default_sample_size(id));
    opt.pc = {s.alpha, s.max_cond_size};
    opt.orient = s.orient;
    if (s.sid_all) opt.sid_max_nodes = SIZE_MAX;
    opt.out_dir = (fs::path(s.out_dir) / "graphs").string();
    if (!oracle_path.empty()) opt.oracle = parse_edge_list(read_file(oracle_path));
    std::size_t runs = opt.oracle ? 1 : s.seeds;
    for (std::size_t k = 0; k < runs; ++k) {
      opt.seed = s.seed + k;
      auto r = run_end2end(ds, tags, opt);
      rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    }
  }
  emit(s, "end2end.csv", metrics_csv(rows));
  return 0;
}

int cmd_tag(const Settings& s, const std::string& mode_name, ProviderConfig provider, const std::string& vars_path) {
  std::vector<std::string> vars;
  std::string stem;
  if (!vars_path.empty()) {
    std::istringstream in(read_file(vars_path));
    for (std::string line; std::getline(in, line);)
      if (auto t = trim(line); !t.empty()) vars.emplace_back(t);
    stem = fs::path(vars_path).stem().string();
  } else {
    Dataset ds = one_dataset(s);
    vars = ds.dag.names();
    stem = ds.id;
  }
  PromptMode mode = mode_name == "type" ? PromptMode::type : PromptMode::tag;
  TagResponse r = request_tags(provider, build_prompt(vars, mode));
  std::cerr << (r.from_cache ? "cache hit" : "fetched") << '\n';
  emit(s, stem + (mode == PromptMode::type ? "_types.txt" : ".txt"), render_tags(r.tags, vars));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tag-informed orientation of partially directed causal graphs"};
  app.require_subcommand(1);
  Settings s;
  app.add_option("--config", s.config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--out", s.out_dir, "output directory");
  app.add_option("--data", s.data_dir, "directory of .bif networks");
  app.add_option("--tags", s.tags_dir, "directory of <dataset>.txt tag files, or 'layer' for layer tags");
  app.add_option("--dataset", s.datasets, "dataset id (repeatable; default all)");
  app.add_option("--seed", s.seed, "master seed");
  app.add_option("--seeds", s.seeds, "number of seeds");
  app.add_option("--samples", s.samples, "rows to sample per dataset");
  app.add_option("--sample-cap", s.sample_cap, "instances sampled when enumeration is too large");
  app.add_option("--alpha", s.alpha, "CI test level");
  app.add_flag("--sid-all", s.sid_all, "report SID on every network, however large");
  app.add_option_function<std::string>(
      "--max-cond-size",
      [&](const std::string& v) {
        if (v == "none") s.max_cond_size.reset();
        else s.max_cond_size = detail::parse_count("--max-cond-size", v);
      },
      "largest conditioning set, or 'none'");

  auto* gt = app.add_subcommand("gt-cpdag", "score ground-truth CPDAGs");
  bool gt_tags = false;
  gt->add_flag("--with-tags", gt_tags, "also orient the CPDAG using tags");

  auto* faults = app.add_subcommand("faults", "probe accuracy under removed or flipped edges");
  std::size_t max_remove = 10, max_flip = 10;
  faults->add_option("--max-remove", max_remove);
  faults->add_option("--max-flip", max_flip);

  auto* undirect = app.add_subcommand("undirect", "orient k undirected ground-truth edges");
  std::size_t k_min = 1, k_max = 6;
  undirect->add_option("--k-min", k_min);
  undirect->add_option("--k-max", k_max);

  auto* noise = app.add_subcommand("tag-noise", "single-edge accuracy under tag noise");
  std::vector<double> levels = {0, 10, 20, 30, 40, 50};
  noise->add_option("--levels", levels)->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "evaluate the configuration grid");
  std::vector<std::string> tag_sets;
  std::string sweep_input = "gt";
  sweep->add_option("--tag-set", tag_sets, "name=dir (repeatable; default the --tags dir)");
  sweep->add_option("--input", sweep_input, "input graphs")->check(CLI::IsMember({"gt", "pc"}));

  auto* mine = app.add_subcommand("mine", "mine tag-pair relations");
  std::string graph_path;
  long long min_support = 1;
  mine->add_option("--graph", graph_path, "edge list to collect evidence from (default ground truth)");
  mine->add_option("--min-support", min_support);

  auto* e2e = app.add_subcommand("end2end", "sample, run PC, orient and score");
  std::string oracle_path;
  e2e->add_option("--oracle", oracle_path, "DAG edge list answering CI queries by d-separation")
      ->check(CLI::ExistingFile);

  auto* tag = app.add_subcommand("tag", "request tags from a chat-completion endpoint");
  ProviderConfig provider;
  std::string mode = "tag", vars_path;
  tag->add_option("--mode", mode)->check(CLI::IsMember({"tag", "type"}));
  tag->add_option("--variables", vars_path, "file with one variable name per line")->check(CLI::ExistingFile);
  tag->add_option("--base-url", provider.base_url);
  tag->add_option("--model", provider.model);
  tag->add_option("--api-key-env", provider.api_key_env);
  tag->add_option("--cache-dir", provider.cache_dir);
  tag->add_option("--timeout", provider.timeout_seconds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    apply_config_file(s, app);
    if (gt->parsed()) return cmd_gt_cpdag(s, gt_tags);
    if (faults->parsed()) return cmd_faults(s, max_remove, max_flip);
    if (undirect->parsed()) return cmd_undirect(s, k_min, k_max);
    if (noise->parsed()) return cmd_tag_noise(s, levels);
    if (sweep->parsed()) {
      if (tag_sets.empty()) tag_sets.push_back("tags=" + s.tags_dir);
      return cmd_sweep(s, tag_sets, sweep_input);
    }
    if (mine->parsed()) return cmd_mine(s, graph_path, min_support);
    if (e2e->parsed()) return cmd_end2end(s, oracle_path);
    if (tag->parsed()) return cmd_tag(s, mode, provider, vars_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
