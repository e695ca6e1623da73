#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/survival.hpp"

namespace survshap {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    cell = trim(cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    out.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t CsvTable::require_column(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw ValidationError(source + ": missing required column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const auto v = parse_double(rows[row][col]);
  if (!v) {
    throw ValidationError(source + ": line " + std::to_string(line_numbers[row]) + ", column '" + header[col] +
                          "': not a number: '" + rows[row][col] + "'");
  }
  return *v;
}

CsvTable parse_csv(std::string_view text, std::string source, char delimiter) {
  CsvTable table;
  table.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool have_header = false;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      table.comments.emplace_back(line);
    } else if (!have_header) {
      table.header = split(line, delimiter);
      have_header = true;
    } else {
      auto cells = split(line, delimiter);
      if (cells.size() != table.header.size()) {
        throw ValidationError(table.source + ": line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(cells));
      table.line_numbers.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ValidationError(table.source + ": no header row");
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ValidationError("write failed: " + path);
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
  return parse_csv(read_text_file(path), path, delimiter);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

SurvivalDataset parse_dataset_csv(const std::string& text, const std::string& source) {
  const CsvTable table = parse_csv(text, source);
  if (std::find(table.comments.begin(), table.comments.end(), kDatasetSchema) == table.comments.end()) {
    throw ValidationError(source + ": missing schema line '" + kDatasetSchema + "'");
  }
  const std::size_t time_col = table.require_column("time");
  const std::size_t event_col = table.require_column("event");
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == time_col || c == event_col) continue;
    feature_cols.push_back(c);
    names.push_back(table.header[c]);
  }
  const std::size_t n = table.rows.size();
  std::vector<double> feats;
  feats.reserve(n * names.size());
  std::vector<double> times(n);
  std::vector<std::uint8_t> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c : feature_cols) feats.push_back(table.number(i, c));
    times[i] = table.number(i, time_col);
    const double e = table.number(i, event_col);
    if (e != 0.0 && e != 1.0) {
      throw ValidationError(source + ": line " + std::to_string(table.line_numbers[i]) +
                            ", column 'event': must be 0 or 1");
    }
    events[i] = static_cast<std::uint8_t>(e);
  }
  return SurvivalDataset(std::move(names), std::move(feats), std::move(times), std::move(events));
}

SurvivalDataset read_dataset_csv(const std::string& path) { return parse_dataset_csv(read_text_file(path), path); }

std::string format_dataset_csv(const SurvivalDataset& data) {
  std::string out = std::string(kDatasetSchema) + "\n";
  for (const auto& name : data.feature_names()) out += name + ",";
  out += "time,event\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) out += format_double(v) + ",";
    out += format_double(data.time(i)) + (data.event(i) ? ",1\n" : ",0\n");
  }
  return out;
}

void write_dataset_csv(const SurvivalDataset& data, const std::string& path) {
  write_text_file(path, format_dataset_csv(data));
}

}  // namespace survshap
