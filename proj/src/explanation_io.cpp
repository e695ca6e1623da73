#include <cmath>

#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/report.hpp"

namespace survshap {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> optional_number(const CsvTable& table, std::size_t row, std::size_t col) {
  if (table.rows[row][col].empty()) return std::nullopt;
  return table.number(row, col);
}

void require_schema(const CsvTable& table, const char* schema) {
  for (const auto& c : table.comments) {
    if (c == schema) return;
  }
  throw ValidationError(table.source + ": missing schema line '" + schema + "'");
}

std::string header_block(const char* schema, const std::vector<std::string>& comments) {
  std::string out = std::string(schema) + "\n";
  for (const auto& c : comments) out += "# " + c + "\n";
  return out;
}

void append_ranks(std::vector<ExplanationRecord>& out, std::size_t observation, const ImportanceRanking& ranking,
                  const std::vector<std::string>& names) {
  const auto ranks = ranking.ranks();
  for (std::size_t d = 0; d < ranks.size(); ++d) {
    out.push_back({"rank", observation, names[d], std::nullopt, static_cast<double>(ranks[d] + 1), std::nullopt});
  }
}

}  // namespace

void append_records(std::vector<ExplanationRecord>& out, std::size_t observation, const SurvShapResult& result,
                    double psi_t_max) {
  const TimeGrid& grid = result.grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out.push_back({"baseline", observation, "", grid[j], result.baseline[j], std::nullopt});
    out.push_back({"prediction", observation, "", grid[j], result.prediction[j], std::nullopt});
  }
  for (std::size_t d = 0; d < result.num_features(); ++d) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::optional<double> normalized;
      if (!result.normalized.empty()) normalized = result.normalized[d][j];
      out.push_back({"phi", observation, result.feature_names[d], grid[j], result.attributions[d][j], normalized});
    }
  }
  const std::vector<double> psi = attribution_importance(result, psi_t_max);
  for (std::size_t d = 0; d < psi.size(); ++d) {
    out.push_back({"psi", observation, result.feature_names[d], psi_t_max, psi[d], std::nullopt});
  }
  append_ranks(out, observation, ImportanceRanking::from_scores(psi), result.feature_names);
  out.push_back({"error", observation, "", std::nullopt, result.reconstruction_error(), std::nullopt});
}

void append_records(std::vector<ExplanationRecord>& out, std::size_t observation, const SurvLimeResult& result,
                    const std::vector<std::string>& feature_names) {
  for (std::size_t d = 0; d < result.coefficients.size(); ++d) {
    out.push_back({"coefficient", observation, feature_names[d], std::nullopt, result.coefficients[d], std::nullopt});
  }
  append_ranks(out, observation, survlime_ranking(result, result.observation), feature_names);
  const StepCurve s = result.surrogate_survival(result.observation);
  for (std::size_t j = 0; j < s.size(); ++j) {
    out.push_back({"surrogate", observation, "", s.grid()[j], s[j], std::nullopt});
  }
}

std::string format_explanations(const std::vector<ExplanationRecord>& records,
                                const std::vector<std::string>& comments) {
  std::string out = header_block(kExplanationSchema, comments);
  out += "record,observation,variable,time,value,normalized\n";
  for (const auto& r : records) {
    out += r.record + "," + std::to_string(r.observation) + "," + r.variable + "," + cell(r.time) + "," +
           format_double(r.value) + "," + cell(r.normalized) + "\n";
  }
  return out;
}

std::vector<ExplanationRecord> parse_explanations(const std::string& text, const std::string& source) {
  const CsvTable table = parse_csv(text, source);
  require_schema(table, kExplanationSchema);
  const std::size_t c_record = table.require_column("record");
  const std::size_t c_obs = table.require_column("observation");
  const std::size_t c_var = table.require_column("variable");
  const std::size_t c_time = table.require_column("time");
  const std::size_t c_value = table.require_column("value");
  const std::size_t c_norm = table.require_column("normalized");
  std::vector<ExplanationRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double obs = table.number(r, c_obs);
    if (!(obs >= 0.0) || obs != std::floor(obs)) {
      throw ValidationError(source + ": line " + std::to_string(table.line_numbers[r]) +
                            ": observation must be a non-negative integer");
    }
    out.push_back({table.rows[r][c_record], static_cast<std::size_t>(obs), table.rows[r][c_var],
                   optional_number(table, r, c_time), table.number(r, c_value), optional_number(table, r, c_norm)});
  }
  return out;
}

std::string format_metrics(const std::vector<MetricRecord>& records, const std::vector<std::string>& comments) {
  std::string out = header_block(kMetricSchema, comments);
  out += "metric,variable,time,value\n";
  for (const auto& r : records) out += r.metric + "," + r.variable + "," + cell(r.time) + "," + cell(r.value) + "\n";
  return out;
}

std::vector<MetricRecord> parse_metrics(const std::string& text, const std::string& source) {
  const CsvTable table = parse_csv(text, source);
  require_schema(table, kMetricSchema);
  const std::size_t c_metric = table.require_column("metric");
  const std::size_t c_var = table.require_column("variable");
  const std::size_t c_time = table.require_column("time");
  const std::size_t c_value = table.require_column("value");
  std::vector<MetricRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.push_back({table.rows[r][c_metric], table.rows[r][c_var], optional_number(table, r, c_time),
                   optional_number(table, r, c_value)});
  }
  return out;
}

}  // namespace survshap
