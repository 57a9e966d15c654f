#pragma once

#include <string>
#include <vector>

namespace learnafe::io {

/// Numeric CSV with a single header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws FormatError when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Parses a numeric CSV. "inf", "nan" and "clean" cells parse as non-finite
/// values. Every row must have the header's width.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::vector<std::string> split_fields(const std::string& line, char sep = ',');

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace learnafe::io
