#pragma once

// Censored-data types, step curves and the nonparametric estimators.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace survshap {

/// Strictly increasing, positive, non-empty sequence of event times.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  std::span<const double> times() const { return times_; }
  auto begin() const { return times_.begin(); }
  auto end() const { return times_.end(); }

  /// Number of grid times <= t; the index of the step in effect at t is
  /// steps_through(t) - 1, or "before the grid" when it returns 0.
  std::size_t steps_through(double t) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

enum class CurveKind { survival, cumulative_hazard, attribution };

/// Right-continuous step function over a TimeGrid. values[j] holds on
/// [t_j, t_{j+1}); before t_1 the curve takes its kind's default (1 for
/// survival, 0 otherwise) and after t_m it stays at values[m-1].
class StepCurve {
 public:
  StepCurve(TimeGrid grid, std::vector<double> values, CurveKind kind);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }
  CurveKind kind() const { return kind_; }

  /// Value held before the first grid time.
  double initial_value() const { return kind_ == CurveKind::survival ? 1.0 : 0.0; }

  double at(double t) const;

  /// Values evaluated at every time of `target` (step semantics).
  std::vector<double> sample(const TimeGrid& target) const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  CurveKind kind_;
};

double curve_at(const StepCurve& curve, double t);

enum class Transform { identity, absolute };

/// Exact integral of the step function over [t_start, t_end].
double integrate_step(const StepCurve& curve, double t_start, double t_end,
                      Transform transform = Transform::identity);

/// Rows of features with right-censored outcomes (x_i, y_i, delta_i).
class SurvivalDataset {
 public:
  SurvivalDataset(std::vector<std::string> feature_names, std::vector<double> features_row_major,
                  std::vector<double> times, std::vector<std::uint8_t> events);

  std::size_t rows() const { return times_.size(); }
  std::size_t cols() const { return names_.size(); }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * cols(), cols()}; }
  double feature(std::size_t i, std::size_t d) const { return features_[i * cols() + d]; }
  double time(std::size_t i) const { return times_[i]; }
  bool event(std::size_t i) const { return events_[i] != 0; }

  const std::vector<std::string>& feature_names() const { return names_; }
  std::span<const double> features() const { return features_; }
  std::span<const double> times() const { return times_; }
  std::span<const std::uint8_t> events() const { return events_; }
  std::size_t event_count() const;

  std::vector<double> column(std::size_t d) const;

  /// Rows selected by index, in the given order (repeats allowed).
  SurvivalDataset subset(std::span<const std::size_t> indices) const;

  /// Copy with column d replaced.
  SurvivalDataset with_column(std::size_t d, std::span<const double> values) const;

  /// Copy with the event indicator flipped (censoring becomes the event).
  /// The result may contain zero events and is only meant for censoring
  /// distribution estimates; it skips the at-least-one-event check.
  SurvivalDataset censoring_view() const;

  /// Observed-time quantile (linear interpolation between order statistics).
  double time_quantile(double q) const;

 private:
  struct Unchecked {};
  SurvivalDataset(Unchecked, std::vector<std::string> names, std::vector<double> features,
                  std::vector<double> times, std::vector<std::uint8_t> events);
  void validate(bool require_event) const;

  std::vector<std::string> names_;
  std::vector<double> features_;
  std::vector<double> times_;
  std::vector<std::uint8_t> events_;
};

/// Distinct event times with their event counts d_j and at-risk counts r_j.
struct RiskTable {
  std::vector<double> times;
  std::vector<double> events;
  std::vector<double> at_risk;
};

RiskTable risk_table(const SurvivalDataset& data);

/// Sorted distinct times among observations with delta = 1.
TimeGrid build_event_grid(const SurvivalDataset& data);

StepCurve kaplan_meier(const SurvivalDataset& data);
StepCurve nelson_aalen(const SurvivalDataset& data);

/// S = exp(-H), clipped to [0, 1].
StepCurve chf_to_survival(const StepCurve& chf);

// Dataset interchange: '#'-prefixed schema line, header of feature names plus
// the reserved `time` and `event` columns, comma-delimited, C-locale numbers.
inline constexpr const char* kDatasetSchema = "# survshap-dataset v1";

SurvivalDataset read_dataset_csv(const std::string& path);
SurvivalDataset parse_dataset_csv(const std::string& text, const std::string& source = "<memory>");
void write_dataset_csv(const SurvivalDataset& data, const std::string& path);
std::string format_dataset_csv(const SurvivalDataset& data);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace survshap
