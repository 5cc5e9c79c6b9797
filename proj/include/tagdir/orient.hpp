#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tagdir/graph.hpp"
#include "tagdir/tags.hpp"

namespace tagdir {

enum class RedirectStrategy { update_evidence = 0, freeze_evidence = 1 };

struct OrientConfig {
  std::size_t min_samples = 1;
  bool drop_singletons = false;
  bool specificity_prior = false;
  bool always_meek = false;
  bool redirect = false;
  RedirectStrategy redirect_strategy = RedirectStrategy::update_evidence;
  bool include_current_edge = true;
  bool anti_v = false;
  double epsilon = 0.0;
  double redirect_threshold = 0.6;
  std::size_t max_redirect_iters = 100;

  void validate() const {
    if (min_samples < 1) throw ConfigError("min_samples must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw ConfigError("epsilon must lie in [0, 0.5]");
    if (!(redirect_threshold > 0.5 && redirect_threshold <= 1.0))
      throw ConfigError("redirect_threshold must lie in (0.5, 1]");
  }

  friend bool operator==(const OrientConfig&, const OrientConfig&) = default;
};

namespace detail {

inline bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "True") return true;
  if (v == "false" || v == "0" || v == "no" || v == "False") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number for " + key + ": " + v);
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("bad count for " + key + ": " + v);
  return static_cast<std::size_t>(std::stoull(v));
}

}  // namespace detail

// Applies one `key = value` setting. Returns false for keys that are not
// orientation settings so callers can layer their own keys on top.
inline bool apply_orient_setting(OrientConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "min_samples") c.min_samples = parse_count(key, v);
  else if (key == "drop_singletons") c.drop_singletons = parse_flag(key, v);
  else if (key == "specificity_prior") c.specificity_prior = parse_flag(key, v);
  else if (key == "always_meek") c.always_meek = parse_flag(key, v);
  else if (key == "redirect") c.redirect = parse_flag(key, v);
  else if (key == "redirect_strategy") {
    if (v == "update_evidence" || v == "0") c.redirect_strategy = RedirectStrategy::update_evidence;
    else if (v == "freeze_evidence" || v == "1") c.redirect_strategy = RedirectStrategy::freeze_evidence;
    else throw ConfigError("bad redirect_strategy: " + v);
  } else if (key == "include_current_edge") c.include_current_edge = parse_flag(key, v);
  else if (key == "anti_v") c.anti_v = parse_flag(key, v);
  else if (key == "epsilon") c.epsilon = parse_real(key, v);
  else if (key == "redirect_threshold") c.redirect_threshold = parse_real(key, v);
  else if (key == "max_redirect_iters") c.max_redirect_iters = parse_count(key, v);
  else return false;
  return true;
}

// Splits `key = value` lines; `#` starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw MalformedLine("expected key = value", lineno);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw MalformedLine("empty key", lineno);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline OrientConfig parse_orient_config(std::string_view text) {
  OrientConfig c;
  for (const auto& [k, v] : parse_key_values(text))
    if (!apply_orient_setting(c, k, v)) throw ConfigError("unknown config key: " + k);
  c.validate();
  return c;
}

inline std::string render_orient_config(const OrientConfig& c) {
  std::ostringstream os;
  auto flag = [](bool b) { return b ? "true" : "false"; };
  os << "min_samples = " << c.min_samples << '\n'
     << "drop_singletons = " << flag(c.drop_singletons) << '\n'
     << "specificity_prior = " << flag(c.specificity_prior) << '\n'
     << "always_meek = " << flag(c.always_meek) << '\n'
     << "redirect = " << flag(c.redirect) << '\n'
     << "redirect_strategy = "
     << (c.redirect_strategy == RedirectStrategy::update_evidence ? "update_evidence" : "freeze_evidence") << '\n'
     << "include_current_edge = " << flag(c.include_current_edge) << '\n'
     << "anti_v = " << flag(c.anti_v) << '\n'
     << "epsilon = " << c.epsilon << '\n'
     << "redirect_threshold = " << c.redirect_threshold << '\n'
     << "max_redirect_iters = " << c.max_redirect_iters << '\n';
  return os.str();
}

// Short label used in result tables.
inline std::string config_label(const OrientConfig& c) {
  std::ostringstream os;
  os << "ms" << c.min_samples << (c.drop_singletons ? "-fewer" : "") << (c.specificity_prior ? "-prior" : "")
     << (c.always_meek ? "-meek" : "");
  if (c.redirect)
    os << "-redir" << static_cast<int>(c.redirect_strategy) << (c.include_current_edge ? "inc" : "exc");
  if (c.anti_v) os << "-antiv";
  return os.str();
}

// Deduplication always; singleton removal when configured.
inline TagAssignment prepare_tags(const TagAssignment& a, const OrientConfig& cfg) {
  TagAssignment t = deduplicate(a);
  return cfg.drop_singletons ? drop_singletons(t) : t;
}

struct EdgeScore {
  Edge edge;
  double q = 0.5;
  std::size_t observed_pairs = 0;
  double evidence_mass = 0;
  long long evidence_count = 0;
};

// Evidence preference for u -> v, aggregated by evidence mass over all tag
// pairs of the two endpoints. With exclude_self, a directed u -- v edge has
// its own contribution removed from the side matching its direction.
inline EdgeScore edge_preference(const Pdag& g, const TagAssignment& a, const EvidenceMatrix& e, VarId u,
                                 VarId v, const OrientConfig& cfg, bool exclude_self = false) {
  if (!g.adjacent(u, v)) throw NotAdjacent("edge_preference on non-adjacent pair");
  const bool self_fw = exclude_self && g.has_arc(u, v);
  const bool self_bw = exclude_self && g.has_arc(v, u);
  EdgeScore s;
  s.edge = {u, v};
  double fmass = 0, bmass = 0;
  for (TagId tu : a.tags_of(u))
    for (TagId tv : a.tags_of(v)) {
      if (tu == tv) continue;
      long long f = e.at(tu, tv), b = e.at(tv, tu);
      if (self_fw) f = std::max<long long>(0, f - 1);
      if (self_bw) b = std::max<long long>(0, b - 1);
      if (f + b > 0) ++s.observed_pairs;
      s.evidence_count += f + b;
      double w = cfg.specificity_prior ? specificity_prior(a, tu, tv) : 1.0;
      fmass += w * static_cast<double>(f);
      bmass += w * static_cast<double>(b);
    }
  s.evidence_mass = fmass + bmass;
  if (s.evidence_count >= static_cast<long long>(cfg.min_samples) && s.evidence_mass > 0)
    s.q = fmass / s.evidence_mass;
  return s;
}

// Best half-edge with probability strictly above `threshold`; the forward
// half of each listed edge is scanned before its backward half, and ties
// keep the earliest.
inline std::optional<EdgeScore> find_most_promising(const std::vector<Edge>& edges, const Pdag& g,
                                                    const TagAssignment& a, const EvidenceMatrix& e,
                                                    const OrientConfig& cfg, bool backward_only,
                                                    bool exclude_self, double threshold) {
  std::optional<EdgeScore> best;
  for (const Edge& uv : edges) {
    EdgeScore fw = edge_preference(g, a, e, uv.from, uv.to, cfg, exclude_self);
    EdgeScore bw = fw;
    bw.edge = reversed(uv);
    bw.q = 1.0 - fw.q;
    if (!backward_only && fw.q > threshold && (!best || fw.q > best->q)) best = fw;
    if (bw.q > threshold && (!best || bw.q > best->q)) best = bw;
  }
  return best;
}

inline std::optional<EdgeScore> find_most_promising(const std::vector<Edge>& edges, const Pdag& g,
                                                    const TagAssignment& a, const EvidenceMatrix& e,
                                                    const OrientConfig& cfg, bool backward_only = false) {
  return find_most_promising(edges, g, a, e, cfg, backward_only, false, 0.5 + cfg.epsilon);
}

// Flips directed edges whose reverse direction is supported above the
// redirect threshold. Expects prepared tags.
inline Pdag redirect_phase(Pdag g, const TagAssignment& a, const OrientConfig& cfg) {
  EvidenceMatrix e = collect_evidence(g, a, cfg.anti_v);
  std::set<Edge> redirected;
  std::set<Edge> skipped;
  const bool exclude_self = !cfg.include_current_edge;
  for (std::size_t iter = 0; iter < cfg.max_redirect_iters; ++iter) {
    std::vector<Edge> candidates;
    for (const Edge& arc : g.arcs()) {
      Edge key = canonical(arc.from, arc.to);
      if (skipped.count(key) || redirected.count(key)) continue;
      candidates.push_back(arc);
    }
    auto best = find_most_promising(candidates, g, a, e, cfg, true, exclude_self, cfg.redirect_threshold);
    if (!best) break;
    const Edge flip = best->edge;
    const Edge key = canonical(flip.from, flip.to);
    if (creates_cycle(g, flip.from, flip.to)) {
      skipped.insert(key);
      continue;
    }
    g.direct(flip.from, flip.to);
    skipped.clear();
    if (cfg.redirect_strategy == RedirectStrategy::update_evidence) e = collect_evidence(g, a, cfg.anti_v);
    else redirected.insert(key);
  }
  return g;
}

struct OrientTrace {
  std::vector<EdgeScore> decisions;
  std::size_t reversed_for_cycle = 0;
};

inline Pdag orient_all(Pdag g, const TagAssignment& tags, const OrientConfig& cfg, OrientTrace* trace = nullptr) {
  cfg.validate();
  if (!is_acyclic(g)) throw CyclicInput("orient_all: directed part contains a cycle");
  const TagAssignment a = prepare_tags(tags, cfg);
  if (cfg.redirect) g = redirect_phase(std::move(g), a, cfg);
  const EvidenceMatrix e = collect_evidence(g, a, cfg.anti_v);
  for (;;) {
    auto und = g.undirected_edges();
    if (und.empty()) break;
    auto best = find_most_promising(und, g, a, e, cfg, false);
    if (!best) break;
    Edge d = best->edge;
    if (creates_cycle(g, d.from, d.to)) {
      d = reversed(d);
      if (trace) ++trace->reversed_for_cycle;
    }
    g.direct(d.from, d.to);
    if (trace) trace->decisions.push_back(*best);
    if (cfg.always_meek) g = meek_closure(std::move(g));
  }
  return meek_closure(std::move(g));
}

}  // namespace tagdir
