#pragma once

// Minimal delimited-text reader shared by the dataset, explanation and
// metric file formats. Lines starting with '#' are comments; the first
// non-comment line is the header.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace survshap {

struct CsvTable {
  std::string source;
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  /// Parses cell (row, col) as a double; throws ValidationError naming the
  /// source line and column on failure.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::string_view text, std::string source, char delimiter = ',');
CsvTable read_csv_file(const std::string& path, char delimiter = ',');

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Strict C-locale double parse of the whole string.
std::optional<double> parse_double(std::string_view text);

}  // namespace survshap
