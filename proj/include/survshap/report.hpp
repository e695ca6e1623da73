#pragma once

// Versioned text records for explanations and metric tables.
//
// Explanation file (`# survshap-explanation v1`), columns
//   record,observation,variable,time,value,normalized
// with record one of
//   phi         attribution of `variable` at `time` (normalized holds phi*)
//   baseline    empty-coalition value at `time`
//   prediction  model output at `time`
//   psi         integral of |phi| up to `time`
//   rank        1-based importance rank of `variable` (psi, or |x * b| for
//               SurvLIME; time empty)
//   coefficient SurvLIME surrogate coefficient (time empty)
//   surrogate   SurvLIME surrogate survival at `time`
//   error       max |baseline + sum(phi) - prediction| (footer, time empty)
// Empty cells are written as an empty string.
//
// Metric file (`# survshap-metrics v1`), columns metric,variable,time,value.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "survshap/explain.hpp"

namespace survshap {

inline constexpr const char* kExplanationSchema = "# survshap-explanation v1";
inline constexpr const char* kMetricSchema = "# survshap-metrics v1";

struct ExplanationRecord {
  std::string record;
  std::size_t observation = 0;
  std::string variable;
  std::optional<double> time;
  double value = 0.0;
  std::optional<double> normalized;
};

/// Appends the records of one SurvSHAP(t) explanation; psi is integrated up
/// to `psi_t_max`.
void append_records(std::vector<ExplanationRecord>& out, std::size_t observation, const SurvShapResult& result,
                    double psi_t_max);
void append_records(std::vector<ExplanationRecord>& out, std::size_t observation, const SurvLimeResult& result,
                    const std::vector<std::string>& feature_names);

std::string format_explanations(const std::vector<ExplanationRecord>& records,
                                const std::vector<std::string>& comments = {});
std::vector<ExplanationRecord> parse_explanations(const std::string& text, const std::string& source = "<memory>");

struct MetricRecord {
  std::string metric;
  std::string variable;
  std::optional<double> time;
  std::optional<double> value;  // empty for undefined values
};

std::string format_metrics(const std::vector<MetricRecord>& records, const std::vector<std::string>& comments = {});
std::vector<MetricRecord> parse_metrics(const std::string& text, const std::string& source = "<memory>");

}  // namespace survshap
