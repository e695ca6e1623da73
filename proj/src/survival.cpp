#include "survshap/survival.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

#include "survshap/error.hpp"

namespace survshap {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw ValidationError("time grid must not be empty");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] <= 0.0) {
      throw ValidationError("time grid values must be finite and > 0 (index " + std::to_string(i) + ")");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("time grid must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

std::size_t TimeGrid::steps_through(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

StepCurve::StepCurve(TimeGrid grid, std::vector<double> values, CurveKind kind)
    : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
  if (values_.size() != grid_.size()) {
    throw ValidationError("step curve has " + std::to_string(values_.size()) + " values for a grid of " +
                          std::to_string(grid_.size()));
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double v = values_[j];
    if (!std::isfinite(v)) throw ValidationError("step curve value is not finite at index " + std::to_string(j));
    const double prev = j == 0 ? initial_value() : values_[j - 1];
    switch (kind_) {
      case CurveKind::survival:
        if (v < 0.0 || v > 1.0 || v > prev) {
          throw ValidationError("survival curve must lie in [0,1] and be non-increasing (index " +
                                std::to_string(j) + ")");
        }
        break;
      case CurveKind::cumulative_hazard:
        if (v < prev) {
          throw ValidationError("cumulative hazard must be >= 0 and non-decreasing (index " + std::to_string(j) +
                                ")");
        }
        break;
      case CurveKind::attribution:
        break;
    }
  }
}

double StepCurve::at(double t) const {
  const std::size_t k = grid_.steps_through(t);
  return k == 0 ? initial_value() : values_[k - 1];
}

std::vector<double> StepCurve::sample(const TimeGrid& target) const {
  std::vector<double> out(target.size());
  if (target == grid_) {
    std::copy(values_.begin(), values_.end(), out.begin());
    return out;
  }
  for (std::size_t i = 0; i < target.size(); ++i) out[i] = at(target[i]);
  return out;
}

double curve_at(const StepCurve& curve, double t) { return curve.at(t); }

double integrate_step(const StepCurve& curve, double t_start, double t_end, Transform transform) {
  if (!(t_start < t_end)) throw ValidationError("integration range must satisfy t_start < t_end");
  auto f = [transform](double v) { return transform == Transform::absolute ? std::abs(v) : v; };
  const TimeGrid& grid = curve.grid();
  double total = 0.0;
  // Segment before the first grid time.
  if (t_start < grid.front()) {
    total += f(curve.initial_value()) * (std::min(t_end, grid.front()) - t_start);
  }
  std::size_t j = grid.steps_through(t_start);
  j = j == 0 ? 0 : j - 1;
  for (; j < grid.size(); ++j) {
    const double seg_lo = std::max(grid[j], t_start);
    const double seg_hi = j + 1 < grid.size() ? std::min(grid[j + 1], t_end) : t_end;
    if (grid[j] >= t_end) break;
    if (seg_hi > seg_lo) total += f(curve[j]) * (seg_hi - seg_lo);
  }
  return total;
}

SurvivalDataset::SurvivalDataset(std::vector<std::string> feature_names, std::vector<double> features_row_major,
                                 std::vector<double> times, std::vector<std::uint8_t> events)
    : names_(std::move(feature_names)),
      features_(std::move(features_row_major)),
      times_(std::move(times)),
      events_(std::move(events)) {
  validate(true);
}

SurvivalDataset::SurvivalDataset(Unchecked, std::vector<std::string> names, std::vector<double> features,
                                 std::vector<double> times, std::vector<std::uint8_t> events)
    : names_(std::move(names)), features_(std::move(features)), times_(std::move(times)), events_(std::move(events)) {
  validate(false);
}

void SurvivalDataset::validate(bool require_event) const {
  if (times_.empty()) throw ValidationError("dataset has no rows");
  if (events_.size() != times_.size()) throw ValidationError("times and events differ in length");
  if (features_.size() != times_.size() * names_.size()) {
    throw ValidationError("feature matrix size does not match rows x feature names");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
      throw ValidationError("observed time must be finite and non-negative (row " + std::to_string(i) + ")");
    }
    if (events_[i] > 1) throw ValidationError("event indicator must be 0 or 1 (row " + std::to_string(i) + ")");
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (!std::isfinite(features_[k])) {
      throw ValidationError("feature value is not finite (row " + std::to_string(k / names_.size()) + ", column " +
                            names_[k % names_.size()] + ")");
    }
  }
  if (require_event && event_count() == 0) throw ValidationError("dataset contains no events (all rows censored)");
}

std::size_t SurvivalDataset::event_count() const {
  return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [](auto e) { return e != 0; }));
}

std::vector<double> SurvivalDataset::column(std::size_t d) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = feature(i, d);
  return out;
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> feats;
  feats.reserve(indices.size() * cols());
  std::vector<double> t;
  std::vector<std::uint8_t> e;
  t.reserve(indices.size());
  e.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows()) throw ValidationError("row index out of range: " + std::to_string(i));
    auto r = row(i);
    feats.insert(feats.end(), r.begin(), r.end());
    t.push_back(times_[i]);
    e.push_back(events_[i]);
  }
  return SurvivalDataset(Unchecked{}, names_, std::move(feats), std::move(t), std::move(e));
}

SurvivalDataset SurvivalDataset::with_column(std::size_t d, std::span<const double> values) const {
  if (d >= cols() || values.size() != rows()) throw ValidationError("replacement column has the wrong shape");
  std::vector<double> feats = features_;
  for (std::size_t i = 0; i < rows(); ++i) feats[i * cols() + d] = values[i];
  return SurvivalDataset(Unchecked{}, names_, std::move(feats), times_, events_);
}

SurvivalDataset SurvivalDataset::censoring_view() const {
  std::vector<std::uint8_t> flipped(events_.size());
  std::transform(events_.begin(), events_.end(), flipped.begin(), [](auto e) -> std::uint8_t { return e ? 0 : 1; });
  return SurvivalDataset(Unchecked{}, names_, features_, times_, std::move(flipped));
}

double SurvivalDataset::time_quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile must lie in [0,1]");
  std::vector<double> sorted(times_.begin(), times_.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RiskTable risk_table(const SurvivalDataset& data) {
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.time(a) < data.time(b); });

  RiskTable table;
  std::size_t i = 0;
  const std::size_t n = order.size();
  while (i < n) {
    const double t = data.time(order[i]);
    std::size_t j = i;
    double d = 0.0;
    while (j < n && data.time(order[j]) == t) {
      d += data.event(order[j]) ? 1.0 : 0.0;
      ++j;
    }
    if (d > 0.0) {
      table.times.push_back(t);
      table.events.push_back(d);
      table.at_risk.push_back(static_cast<double>(n - i));
    }
    i = j;
  }
  return table;
}

TimeGrid build_event_grid(const SurvivalDataset& data) {
  RiskTable table = risk_table(data);
  if (table.times.empty()) throw ValidationError("no event times: every observation is censored");
  // A zero event time cannot sit on a strictly positive grid; shift it to the
  // smallest positive double so the step still sits at the origin.
  for (double& t : table.times) {
    if (t <= 0.0) t = std::numeric_limits<double>::denorm_min();
  }
  return TimeGrid(std::move(table.times));
}

StepCurve kaplan_meier(const SurvivalDataset& data) {
  const RiskTable table = risk_table(data);
  if (table.times.empty()) throw ValidationError("Kaplan-Meier needs at least one event");
  std::vector<double> s(table.times.size());
  double surv = 1.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    surv *= 1.0 - table.events[j] / table.at_risk[j];
    s[j] = std::clamp(surv, 0.0, 1.0);
  }
  return StepCurve(build_event_grid(data), std::move(s), CurveKind::survival);
}

StepCurve nelson_aalen(const SurvivalDataset& data) {
  const RiskTable table = risk_table(data);
  if (table.times.empty()) throw ValidationError("Nelson-Aalen needs at least one event");
  std::vector<double> h(table.times.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    acc += table.events[j] / table.at_risk[j];
    h[j] = acc;
  }
  return StepCurve(build_event_grid(data), std::move(h), CurveKind::cumulative_hazard);
}

StepCurve chf_to_survival(const StepCurve& chf) {
  if (chf.kind() != CurveKind::cumulative_hazard) throw ValidationError("expected a cumulative-hazard curve");
  std::vector<double> s(chf.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::clamp(std::exp(-chf[j]), 0.0, 1.0);
  return StepCurve(chf.grid(), std::move(s), CurveKind::survival);
}

}  // namespace survshap
