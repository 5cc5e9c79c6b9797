#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tagdir/error.hpp"
#include "tagdir/graph.hpp"
#include "tagdir/rng.hpp"

namespace tagdir {

using TagId = std::size_t;

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Per-variable tag sets over a universe of labels. Tag ids follow insertion
// order; compact() drops labels no variable carries.
class TagAssignment {
 public:
  TagAssignment() = default;
  explicit TagAssignment(std::size_t num_vars) : var_tags_(num_vars) {}

  std::size_t num_vars() const { return var_tags_.size(); }
  std::size_t num_tags() const { return labels_.size(); }
  const std::string& label(TagId t) const { return labels_.at(t); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<TagId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TagId intern(std::string_view label) {
    std::string key(trim(label));
    if (key.empty()) throw Error("empty tag label");
    auto [it, fresh] = index_.emplace(key, labels_.size());
    if (fresh) {
      labels_.push_back(key);
      carriers_.emplace_back();
    }
    return it->second;
  }

  TagId add(VarId v, std::string_view label) {
    TagId t = intern(label);
    add(v, t);
    return t;
  }

  void add(VarId v, TagId t) {
    check(v, t);
    auto& s = var_tags_[v];
    auto it = std::lower_bound(s.begin(), s.end(), t);
    if (it != s.end() && *it == t) return;
    s.insert(it, t);
    auto& c = carriers_[t];
    c.insert(std::lower_bound(c.begin(), c.end(), v), v);
  }

  void remove(VarId v, TagId t) {
    check(v, t);
    auto& s = var_tags_[v];
    s.erase(std::remove(s.begin(), s.end(), t), s.end());
    auto& c = carriers_[t];
    c.erase(std::remove(c.begin(), c.end(), v), c.end());
  }

  bool has(VarId v, TagId t) const { return std::binary_search(var_tags_[v].begin(), var_tags_[v].end(), t); }
  const std::vector<TagId>& tags_of(VarId v) const { return var_tags_.at(v); }
  const std::vector<VarId>& carriers(TagId t) const { return carriers_.at(t); }
  std::size_t coverage(TagId t) const { return carriers_.at(t).size(); }

  std::size_t num_assignments() const {
    std::size_t m = 0;
    for (const auto& s : var_tags_) m += s.size();
    return m;
  }

  // Copy restricted to the tags for which keep(t) holds, renumbered densely.
  template <class Keep>
  TagAssignment filtered(Keep keep) const {
    TagAssignment out(num_vars());
    for (TagId t = 0; t < num_tags(); ++t) {
      if (carriers_[t].empty() || !keep(t)) continue;
      TagId nt = out.intern(labels_[t]);
      for (VarId v : carriers_[t]) out.add(v, nt);
    }
    return out;
  }

  TagAssignment compacted() const {
    return filtered([](TagId) { return true; });
  }

  friend bool operator==(const TagAssignment& a, const TagAssignment& b) {
    return a.labels_ == b.labels_ && a.var_tags_ == b.var_tags_;
  }

 private:
  void check(VarId v, TagId t) const {
    if (v >= var_tags_.size()) throw UnknownVariable("variable index out of range");
    if (t >= labels_.size()) throw UnknownTag("tag index out of range");
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, TagId> index_;
  std::vector<std::vector<TagId>> var_tags_;
  std::vector<std::vector<VarId>> carriers_;
};

// `Tag: v1, v2, ...` per line. Blank lines are skipped.
inline TagAssignment parse_tags(std::string_view text, const std::vector<std::string>& vars) {
  std::unordered_map<std::string, VarId> index;
  for (VarId v = 0; v < vars.size(); ++v) index.emplace(vars[v], v);
  TagAssignment a(vars.size());
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw MalformedLine("missing ':'", lineno);
    std::string_view label = trim(line.substr(0, colon));
    if (label.empty()) throw MalformedLine("empty tag name", lineno);
    std::string_view rest = line.substr(colon + 1);
    std::vector<VarId> members;
    std::size_t p = 0;
    while (p <= rest.size()) {
      auto comma = rest.find(',', p);
      if (comma == std::string_view::npos) comma = rest.size();
      std::string_view item = trim(rest.substr(p, comma - p));
      p = comma + 1;
      if (item.empty()) continue;
      auto it = index.find(std::string(item));
      if (it == index.end()) throw UnknownVariable("unknown variable '" + std::string(item) + "' on line " + std::to_string(lineno));
      members.push_back(it->second);
    }
    if (members.empty()) continue;
    TagId t = a.intern(label);
    for (VarId v : members) a.add(v, t);
  }
  return a;
}

inline std::string render_tags(const TagAssignment& a, const std::vector<std::string>& vars) {
  std::ostringstream os;
  for (TagId t = 0; t < a.num_tags(); ++t) {
    if (a.carriers(t).empty()) continue;
    os << a.label(t) << ": ";
    bool first = true;
    for (VarId v : a.carriers(t)) {
      os << (first ? "" : ", ") << vars.at(v);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

// Keeps the first tag of every group covering an identical variable set.
inline TagAssignment deduplicate(const TagAssignment& a) {
  std::set<std::vector<VarId>> seen;
  std::vector<char> keep(a.num_tags(), 0);
  for (TagId t = 0; t < a.num_tags(); ++t)
    keep[t] = !a.carriers(t).empty() && seen.insert(a.carriers(t)).second;
  return a.filtered([&](TagId t) { return keep[t] != 0; });
}

inline TagAssignment drop_singletons(const TagAssignment& a) {
  return a.filtered([&](TagId t) { return a.coverage(t) != 1; });
}

// Removes round(pct/2 % of M) existing (variable, tag) pairs and adds as many
// absent pairs from the existing universe, M being the assignment count.
inline TagAssignment add_tag_noise(const TagAssignment& a, double pct, std::uint64_t seed) {
  if (pct < 0 || pct > 100) throw Error("noise percentage outside [0, 100]");
  const std::size_t m = a.num_assignments();
  const auto k = static_cast<std::size_t>(std::llround(pct / 2.0 * static_cast<double>(m) / 100.0));
  if (k == 0) return a;
  std::vector<std::pair<VarId, TagId>> present, absent;
  for (VarId v = 0; v < a.num_vars(); ++v)
    for (TagId t = 0; t < a.num_tags(); ++t)
      (a.has(v, t) ? present : absent).emplace_back(v, t);
  Rng rng(seed);
  auto removed = sample_indices(rng, present.size(), std::min(k, present.size()));
  auto added = sample_indices(rng, absent.size(), std::min(k, absent.size()));
  TagAssignment out = a;
  for (auto i : removed) out.remove(present[i].first, present[i].second);
  for (auto i : added) out.add(absent[i].first, absent[i].second);
  return out.compacted();
}

// One tag per topological layer: layer(v) = 0 for roots, else 1 + the
// largest parent layer.
inline TagAssignment layer_tags(const Dag& d) {
  auto order = topological_order(d);
  std::vector<std::size_t> layer(d.size(), 0);
  for (VarId v : order)
    for (VarId p : d.parents(v)) layer[v] = std::max(layer[v], layer[p] + 1);
  std::size_t depth = 0;
  for (auto l : layer) depth = std::max(depth, l);
  TagAssignment a(d.size());
  for (std::size_t l = 0; l <= depth; ++l) a.intern("L" + std::to_string(l));
  for (VarId v = 0; v < d.size(); ++v) a.add(v, *a.find("L" + std::to_string(layer[v])));
  return a.compacted();
}

// --------------------------------------------------------------- evidence

class EvidenceMatrix {
 public:
  EvidenceMatrix() = default;
  explicit EvidenceMatrix(std::size_t num_tags) : n_(num_tags), counts_(num_tags * num_tags, 0) {}

  std::size_t num_tags() const { return n_; }
  long long at(TagId a, TagId b) const { return counts_.at(a * n_ + b); }
  void add(TagId a, TagId b, long long k = 1) { counts_.at(a * n_ + b) += k; }

  long long support(TagId a, TagId b) const { return at(a, b) + at(b, a); }
  bool observed(TagId a, TagId b) const { return support(a, b) > 0; }

  long long total() const {
    long long s = 0;
    for (auto c : counts_) s += c;
    return s;
  }

  friend bool operator==(const EvidenceMatrix&, const EvidenceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<long long> counts_;
};

// Counts directed edges per ordered tag pair. With anti_v, every unshielded
// non-collider A - C - B whose ends share a tag s also adds one count
// C[t_c, s] for each tag t_c != s of the middle node.
inline EvidenceMatrix collect_evidence(const Pdag& g, const TagAssignment& a, bool anti_v = false) {
  if (a.num_vars() != g.size()) throw VariableMismatch("tag assignment and graph sizes differ");
  EvidenceMatrix e(a.num_tags());
  for (const Edge& arc : g.arcs())
    for (TagId tu : a.tags_of(arc.from))
      for (TagId tv : a.tags_of(arc.to))
        if (tu != tv) e.add(tu, tv);
  if (!anti_v) return e;
  for (VarId c = 0; c < g.size(); ++c) {
    auto adj = g.adjacents(c);
    for (std::size_t x = 0; x < adj.size(); ++x)
      for (std::size_t y = x + 1; y < adj.size(); ++y) {
        VarId va = adj[x], vb = adj[y];
        if (g.adjacent(va, vb)) continue;
        if (g.has_arc(va, c) && g.has_arc(vb, c)) continue;
        const auto& ta = a.tags_of(va);
        const auto& tb = a.tags_of(vb);
        std::vector<TagId> shared;
        std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(shared));
        for (TagId s : shared)
          for (TagId tc : a.tags_of(c))
            if (tc != s) e.add(tc, s);
      }
  }
  return e;
}

struct PairEstimate {
  double probability = 0.5;
  long long support = 0;
};

inline PairEstimate p_hat(const EvidenceMatrix& e, TagId a, TagId b) {
  if (a == b) throw IdenticalTags("p_hat needs two distinct tags");
  PairEstimate r;
  r.support = e.support(a, b);
  if (r.support > 0) r.probability = static_cast<double>(e.at(a, b)) / static_cast<double>(r.support);
  return r;
}

inline double specificity_prior(const TagAssignment& a, TagId t1, TagId t2) {
  if (t1 >= a.num_tags() || t2 >= a.num_tags()) throw UnknownTag("tag not in universe");
  int exponent = static_cast<int>(a.coverage(t1) + a.coverage(t2)) - 1;
  return std::ldexp(1.0, -exponent);
}

enum class Direction { forward, backward, none };

struct Homogeneity {
  double score = 0;
  Direction direction = Direction::none;
  long long support = 0;
};

inline Homogeneity homogeneity(const EvidenceMatrix& e, TagId a, TagId b) {
  PairEstimate p = p_hat(e, a, b);
  if (p.support == 0) throw NoEvidence("tag pair never observed");
  Homogeneity h;
  h.support = p.support;
  long long fw = e.at(a, b), bw = e.at(b, a);
  if (fw == bw) return h;
  h.direction = fw > bw ? Direction::forward : Direction::backward;
  h.score = std::abs(2.0 * p.probability - 1.0);
  return h;
}

struct Relation {
  TagId cause = 0;
  TagId effect = 0;
  double probability = 0;
  long long support = 0;
  double score = 0;

  // Percentage truncated to an integer, as in `"A" -> "B" (85% / 7)`.
  long long percent(const EvidenceMatrix& e) const { return 100 * e.at(cause, effect) / support; }
};

inline std::vector<Relation> mine_relations(const EvidenceMatrix& e, long long min_support = 1) {
  std::vector<Relation> out;
  for (TagId a = 0; a < e.num_tags(); ++a)
    for (TagId b = a + 1; b < e.num_tags(); ++b) {
      long long s = e.support(a, b);
      if (s == 0 || s < min_support) continue;
      Homogeneity h = homogeneity(e, a, b);
      if (h.direction == Direction::none || h.score <= 0) continue;
      Relation r;
      r.cause = h.direction == Direction::forward ? a : b;
      r.effect = h.direction == Direction::forward ? b : a;
      r.support = s;
      r.probability = static_cast<double>(e.at(r.cause, r.effect)) / static_cast<double>(s);
      r.score = h.score;
      out.push_back(r);
    }
  std::stable_sort(out.begin(), out.end(), [](const Relation& x, const Relation& y) {
    if (x.support != y.support) return x.support > y.support;
    return x.score > y.score;
  });
  return out;
}

inline std::string render_relation(const Relation& r, const EvidenceMatrix& e, const TagAssignment& a) {
  return "\"" + a.label(r.cause) + "\" -> \"" + a.label(r.effect) + "\" (" + std::to_string(r.percent(e)) +
         "% / " + std::to_string(r.support) + ")";
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string relations_csv(const std::vector<Relation>& rel, const TagAssignment& a) {
  std::ostringstream os;
  os << "tag_a,tag_b,probability,support,score\n";
  for (const auto& r : rel) {
    os << csv_field(a.label(r.cause)) << ',' << csv_field(a.label(r.effect)) << ',';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%lld,%.6f", r.probability, r.support, r.score);
    os << buf << '\n';
  }
  return os.str();
}

}  // namespace tagdir
