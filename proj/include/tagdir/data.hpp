#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tagdir/error.hpp"

namespace tagdir {

using StateCode = std::uint16_t;

// Integer-coded discrete data, stored column-wise.
struct DataTable {
  std::vector<std::string> names;
  std::vector<std::size_t> cardinality;
  std::vector<std::vector<StateCode>> columns;

  std::size_t num_vars() const { return names.size(); }
  std::size_t num_rows() const { return columns.empty() ? 0 : columns[0].size(); }

  void validate() const {
    if (cardinality.size() != names.size() || columns.size() != names.size())
      throw ValidationError("data table: column count mismatch");
    for (std::size_t v = 0; v < columns.size(); ++v) {
      if (columns[v].size() != num_rows()) throw ValidationError("data table: ragged columns");
      for (StateCode c : columns[v])
        if (c >= cardinality[v]) throw ValidationError("data table: code out of range in " + names[v]);
    }
  }

  friend bool operator==(const DataTable&, const DataTable&) = default;
};

inline std::string to_csv(const DataTable& t) {
  std::ostringstream os;
  for (std::size_t v = 0; v < t.num_vars(); ++v) os << (v ? "," : "") << t.names[v];
  os << '\n';
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    for (std::size_t v = 0; v < t.num_vars(); ++v) os << (v ? "," : "") << t.columns[v][r];
    os << '\n';
  }
  return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Parses integer-coded CSV. With `expected` names the header must match
// exactly; without cardinalities each column's range is max code + 1.
inline DataTable parse_csv(const std::string& text,
                           const std::optional<std::vector<std::string>>& expected = std::nullopt,
                           const std::optional<std::vector<std::size_t>>& cardinality = std::nullopt) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw SchemaMismatch("missing header row");
  DataTable t;
  t.names = split_csv_line(line);
  if (expected && *expected != t.names) throw SchemaMismatch("header does not match expected variables");
  t.columns.assign(t.names.size(), {});
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.names.size())
      throw SchemaMismatch("row " + std::to_string(lineno) + " has wrong column count");
    for (std::size_t v = 0; v < cells.size(); ++v) {
      unsigned value = 0;
      auto [p, ec] = std::from_chars(cells[v].data(), cells[v].data() + cells[v].size(), value);
      if (ec != std::errc{} || p != cells[v].data() + cells[v].size() || value > 0xffff)
        throw SchemaMismatch("row " + std::to_string(lineno) + ": bad state code");
      t.columns[v].push_back(static_cast<StateCode>(value));
    }
  }
  if (cardinality) {
    if (cardinality->size() != t.names.size()) throw SchemaMismatch("cardinality count mismatch");
    t.cardinality = *cardinality;
  } else {
    for (const auto& col : t.columns) {
      std::size_t k = 0;
      for (StateCode c : col) k = std::max<std::size_t>(k, c + 1u);
      t.cardinality.push_back(std::max<std::size_t>(k, 1));
    }
  }
  t.validate();
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

inline void write_csv(const std::string& path, const DataTable& t) { write_file(path, to_csv(t)); }

inline DataTable read_csv(const std::string& path,
                          const std::optional<std::vector<std::string>>& expected = std::nullopt,
                          const std::optional<std::vector<std::size_t>>& cardinality = std::nullopt) {
  return parse_csv(read_file(path), expected, cardinality);
}

}  // namespace tagdir
