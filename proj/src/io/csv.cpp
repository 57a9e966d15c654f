#include "learnafe/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "learnafe/common.hpp"
#include "learnafe/io/atomic_file.hpp"

namespace learnafe::io {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

namespace {

double parse_cell(const std::string& s, std::size_t lineno) {
  if (s == "inf" || s == "clean" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) {
    throw FormatError("CSV line " + std::to_string(lineno) + ": cannot parse '" + s + "'");
  }
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw FormatError("CSV is empty");
  t.header = split_fields(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != t.header.size()) {
      throw FormatError("CSV line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(f.size()));
    }
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(parse_cell(s, lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace learnafe::io
