#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tagdir/data.hpp"
#include "tagdir/graph.hpp"
#include "tagdir/rng.hpp"

namespace tagdir {

struct BifVariable {
  std::string name;
  std::vector<std::string> states;
  friend bool operator==(const BifVariable&, const BifVariable&) = default;
};

// Discrete Bayesian network. cpts[v][config * k + s] is P(v = s | config),
// where parent configurations are mixed-radix with the last parent fastest.
struct BifNetwork {
  std::string name;
  std::vector<BifVariable> variables;
  std::vector<std::vector<VarId>> parents;
  std::vector<std::vector<double>> cpts;

  std::size_t size() const { return variables.size(); }
  std::size_t cardinality(VarId v) const { return variables[v].states.size(); }

  std::size_t num_configs(VarId v) const {
    std::size_t c = 1;
    for (VarId p : parents[v]) c *= cardinality(p);
    return c;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& v : variables) out.push_back(v.name);
    return out;
  }

  std::optional<VarId> find(std::string_view name) const {
    for (VarId v = 0; v < variables.size(); ++v)
      if (variables[v].name == name) return v;
    return std::nullopt;
  }

  friend bool operator==(const BifNetwork&, const BifNetwork&) = default;
};

inline Dag dag_of(const BifNetwork& net) {
  Dag d(net.names());
  for (VarId v = 0; v < net.size(); ++v)
    for (VarId p : net.parents[v]) d.add_arc(p, v);
  return d;
}

namespace detail {

class BifLexer {
 public:
  struct Token {
    std::string text;
    std::size_t line = 0;
    bool punct = false;
  };

  explicit BifLexer(std::string_view src) {
    std::size_t line = 1;
    std::size_t i = 0;
    auto is_punct = [](char c) { return std::string_view("{}()[],;|").find(c) != std::string_view::npos; };
    while (i < src.size()) {
      char c = src[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
        while (i < src.size() && src[i] != '\n') ++i;
      } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
        i += 2;
        while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
          if (src[i] == '\n') ++line;
          ++i;
        }
        i += 2;
      } else if (is_punct(c)) {
        tokens_.push_back({std::string(1, c), line, true});
        ++i;
      } else if (c == '"') {
        std::size_t j = i + 1;
        while (j < src.size() && src[j] != '"') ++j;
        tokens_.push_back({std::string(src.substr(i + 1, j - i - 1)), line, false});
        i = j + 1;
      } else {
        std::size_t j = i;
        while (j < src.size() && !std::isspace(static_cast<unsigned char>(src[j])) && !is_punct(src[j])) ++j;
        tokens_.push_back({std::string(src.substr(i, j - i)), line, false});
        i = j;
      }
    }
    end_line_ = line;
  }

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t line() const { return done() ? end_line_ : tokens_[pos_].line; }
  const Token* peek() const { return done() ? nullptr : &tokens_[pos_]; }

  bool peek_is(std::string_view s) const { return peek() && peek()->text == s; }

  void expect(std::string_view s) {
    if (!peek_is(s)) throw SyntaxError(line(), "'" + std::string(s) + "'");
    ++pos_;
  }

  std::string word(const std::string& what) {
    if (done() || tokens_[pos_].punct) throw SyntaxError(line(), what);
    return tokens_[pos_++].text;
  }

  double number() {
    std::size_t at = line();
    std::string w = word("number");
    double v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size()) throw SyntaxError(at, "number");
    return v;
  }

  std::size_t integer() {
    std::size_t at = line();
    std::string w = word("integer");
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size()) throw SyntaxError(at, "integer");
    return v;
  }

  // Comma-separated items up to (not including) the terminator.
  template <class F>
  void list(std::string_view terminator, F&& item) {
    item();
    while (peek_is(",")) {
      ++pos_;
      item();
    }
    if (!peek_is(terminator)) throw SyntaxError(line(), "'" + std::string(terminator) + "'");
  }

  void skip_statement() {
    while (!done() && !peek_is(";")) ++pos_;
    expect(";");
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_line_ = 1;
};

}  // namespace detail

inline constexpr double cpt_tolerance = 1e-6;

inline BifNetwork parse_bif(std::string_view text) {
  detail::BifLexer lex(text);
  BifNetwork net;

  struct RawCpt {
    std::size_t line = 0;
    std::vector<std::string> parents;
    std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;
    std::optional<std::vector<double>> table;
    std::optional<std::vector<double>> fallback;
  };
  std::vector<std::optional<RawCpt>> raw;

  while (!lex.done()) {
    std::string kw = lex.word("block keyword");
    if (kw == "network") {
      net.name = lex.word("network name");
      lex.expect("{");
      while (!lex.peek_is("}")) lex.skip_statement();
      lex.expect("}");
    } else if (kw == "variable") {
      BifVariable var;
      var.name = lex.word("variable name");
      if (net.find(var.name)) throw ValidationError("variable declared twice: " + var.name);
      lex.expect("{");
      bool typed = false;
      while (!lex.peek_is("}")) {
        if (lex.done()) throw SyntaxError(lex.line(), "'}'");
        if (lex.peek_is("type")) {
          lex.word("type");
          std::string t = lex.word("'discrete'");
          if (t != "discrete") throw SyntaxError(lex.line(), "'discrete'");
          lex.expect("[");
          std::size_t k = lex.integer();
          lex.expect("]");
          lex.expect("{");
          lex.list("}", [&] { var.states.push_back(lex.word("state name")); });
          lex.expect("}");
          lex.expect(";");
          if (var.states.size() != k)
            throw ValidationError("variable " + var.name + " declares " + std::to_string(k) +
                                  " states but lists " + std::to_string(var.states.size()));
          typed = true;
        } else {
          lex.skip_statement();
        }
      }
      lex.expect("}");
      if (!typed) throw ValidationError("variable " + var.name + " has no type");
      net.variables.push_back(std::move(var));
    } else if (kw == "probability") {
      RawCpt cpt;
      cpt.line = lex.line();
      lex.expect("(");
      std::string child = lex.word("variable name");
      if (lex.peek_is("|")) {
        lex.expect("|");
        lex.list(")", [&] { cpt.parents.push_back(lex.word("parent name")); });
      }
      lex.expect(")");
      lex.expect("{");
      auto values = [&] {
        std::vector<double> v;
        lex.list(";", [&] { v.push_back(lex.number()); });
        lex.expect(";");
        return v;
      };
      while (!lex.peek_is("}")) {
        if (lex.done()) throw SyntaxError(lex.line(), "'}'");
        if (lex.peek_is("(")) {
          lex.expect("(");
          std::vector<std::string> states;
          lex.list(")", [&] { states.push_back(lex.word("state name")); });
          lex.expect(")");
          cpt.rows.emplace_back(std::move(states), values());
        } else if (lex.peek_is("table")) {
          lex.word("table");
          cpt.table = values();
        } else if (lex.peek_is("default")) {
          lex.word("default");
          cpt.fallback = values();
        } else {
          lex.skip_statement();
        }
      }
      lex.expect("}");
      auto v = net.find(child);
      if (!v) throw ValidationError("probability block for undeclared variable " + child);
      if (raw.size() < net.size()) raw.resize(net.size());
      if (raw[*v]) throw ValidationError("two probability blocks for " + child);
      raw[*v] = std::move(cpt);
    } else {
      throw SyntaxError(lex.line(), "'network', 'variable' or 'probability'");
    }
  }

  raw.resize(net.size());
  net.parents.assign(net.size(), {});
  net.cpts.assign(net.size(), {});
  for (VarId v = 0; v < net.size(); ++v) {
    const std::string& vname = net.variables[v].name;
    if (!raw[v]) throw ValidationError("no probability block for " + vname);
    const RawCpt& cpt = *raw[v];
    for (const auto& p : cpt.parents) {
      auto pid = net.find(p);
      if (!pid) throw ValidationError("undeclared parent " + p + " of " + vname);
      net.parents[v].push_back(*pid);
    }
    const std::size_t k = net.cardinality(v);
    const std::size_t configs = net.num_configs(v);
    std::vector<double> table(configs * k, 0.0);
    std::vector<char> filled(configs, 0);
    auto put = [&](std::size_t config, const std::vector<double>& probs) {
      if (probs.size() != k) throw ValidationError("wrong number of probabilities for " + vname);
      std::copy(probs.begin(), probs.end(), table.begin() + static_cast<std::ptrdiff_t>(config * k));
      filled[config] = 1;
    };
    if (cpt.fallback)
      for (std::size_t c = 0; c < configs; ++c) put(c, *cpt.fallback);
    if (cpt.table) {
      if (cpt.table->size() != configs * k) throw ValidationError("table size mismatch for " + vname);
      // Table form lists the child state slowest.
      for (std::size_t c = 0; c < configs; ++c) {
        std::vector<double> probs(k);
        for (std::size_t s = 0; s < k; ++s) probs[s] = (*cpt.table)[s * configs + c];
        put(c, probs);
      }
    }
    for (const auto& [states, probs] : cpt.rows) {
      if (states.size() != net.parents[v].size())
        throw ValidationError("row arity mismatch in probability block of " + vname);
      std::size_t config = 0;
      for (std::size_t q = 0; q < states.size(); ++q) {
        const auto& pstates = net.variables[net.parents[v][q]].states;
        auto it = std::find(pstates.begin(), pstates.end(), states[q]);
        if (it == pstates.end()) throw ValidationError("unknown state " + states[q] + " in block of " + vname);
        config = config * pstates.size() + static_cast<std::size_t>(it - pstates.begin());
      }
      put(config, probs);
    }
    for (std::size_t c = 0; c < configs; ++c) {
      if (!filled[c]) throw ValidationError("missing parent configuration in block of " + vname);
      double sum = 0;
      for (std::size_t s = 0; s < k; ++s) {
        double p = table[c * k + s];
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("invalid probability for " + vname);
        sum += p;
      }
      if (std::abs(sum - 1.0) > cpt_tolerance) throw ValidationError("probabilities do not sum to 1 for " + vname);
    }
    net.cpts[v] = std::move(table);
  }
  // Mutual parents would collapse into one arc in a Pdag, so check them first.
  for (VarId v = 0; v < net.size(); ++v)
    for (VarId p : net.parents[v]) {
      const auto& back = net.parents[p];
      if (p == v || std::find(back.begin(), back.end(), v) != back.end())
        throw ValidationError("parent relation is cyclic");
    }
  if (!is_acyclic(dag_of(net))) throw ValidationError("parent relation is cyclic");
  return net;
}

inline BifNetwork read_bif(const std::string& path) { return parse_bif(read_file(path)); }

namespace detail {
inline std::string shortest(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, p);
}
}  // namespace detail

inline std::string render_bif(const BifNetwork& net) {
  std::ostringstream os;
  os << "network " << (net.name.empty() ? "unknown" : net.name) << " {\n}\n";
  for (const auto& v : net.variables) {
    os << "variable " << v.name << " {\n  type discrete [ " << v.states.size() << " ] { ";
    for (std::size_t s = 0; s < v.states.size(); ++s) os << (s ? ", " : "") << v.states[s];
    os << " };\n}\n";
  }
  for (VarId v = 0; v < net.size(); ++v) {
    const std::size_t k = net.cardinality(v);
    os << "probability ( " << net.variables[v].name;
    if (!net.parents[v].empty()) {
      os << " | ";
      for (std::size_t q = 0; q < net.parents[v].size(); ++q)
        os << (q ? ", " : "") << net.variables[net.parents[v][q]].name;
    }
    os << " ) {\n";
    auto probs = [&](std::size_t c) {
      for (std::size_t s = 0; s < k; ++s) os << (s ? ", " : "") << detail::shortest(net.cpts[v][c * k + s]);
      os << ";\n";
    };
    if (net.parents[v].empty()) {
      os << "  table ";
      probs(0);
    } else {
      const std::size_t configs = net.num_configs(v);
      for (std::size_t c = 0; c < configs; ++c) {
        std::vector<std::size_t> digits(net.parents[v].size());
        std::size_t rest = c;
        for (std::size_t q = digits.size(); q-- > 0;) {
          std::size_t card = net.cardinality(net.parents[v][q]);
          digits[q] = rest % card;
          rest /= card;
        }
        os << "  (";
        for (std::size_t q = 0; q < digits.size(); ++q)
          os << (q ? ", " : "") << net.variables[net.parents[v][q]].states[digits[q]];
        os << ") ";
        probs(c);
      }
    }
    os << "}\n";
  }
  return os.str();
}

// Ancestral sampling; columns follow declaration order.
inline DataTable forward_sample(const BifNetwork& net, std::size_t n, std::uint64_t seed) {
  DataTable t;
  t.names = net.names();
  for (VarId v = 0; v < net.size(); ++v) t.cardinality.push_back(net.cardinality(v));
  t.columns.assign(net.size(), std::vector<StateCode>(n, 0));
  const auto order = topological_order(dag_of(net));
  Rng rng(seed);
  for (std::size_t r = 0; r < n; ++r) {
    for (VarId v : order) {
      std::size_t config = 0;
      for (VarId p : net.parents[v]) config = config * net.cardinality(p) + t.columns[p][r];
      const std::size_t k = net.cardinality(v);
      const double* probs = net.cpts[v].data() + config * k;
      double u = uniform_real(rng);
      std::size_t s = 0;
      double acc = probs[0];
      while (s + 1 < k && u >= acc) acc += probs[++s];
      // Guard against rounding slack landing on a zero-probability tail.
      while (s > 0 && probs[s] == 0.0) --s;
      t.columns[v][r] = static_cast<StateCode>(s);
    }
  }
  return t;
}

}  // namespace tagdir
