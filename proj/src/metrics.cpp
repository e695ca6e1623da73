#include "survshap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "survshap/error.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

namespace {

std::optional<StepCurve> censoring_curve(const SurvivalDataset& data) {
  if (data.event_count() == data.rows()) return std::nullopt;
  return kaplan_meier(data.censoring_view());
}

std::vector<StepCurve> predict_all(const SurvivalModel& model, const SurvivalDataset& data, std::size_t threads) {
  std::vector<std::optional<StepCurve>> slots(data.rows());
  parallel_for(data.rows(), threads, [&](std::size_t i) { slots[i].emplace(model.predict_survival(data.row(i))); });
  std::vector<StepCurve> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

BrierEvaluator::BrierEvaluator(const SurvivalDataset& data, std::vector<StepCurve> predictions)
    : data_(data), predictions_(std::move(predictions)), censoring_(censoring_curve(data)),
      event_grid_(build_event_grid(data)) {
  if (predictions_.size() != data.rows()) throw ValidationError("one predicted curve per dataset row is required");
  for (const auto& s : predictions_) {
    if (s.kind() != CurveKind::survival) throw ValidationError("Brier score needs survival curves");
  }
}

BrierEvaluator::BrierEvaluator(const SurvivalModel& model, const SurvivalDataset& data, std::size_t threads)
    : BrierEvaluator(data, predict_all(model, data, threads)) {}

double BrierEvaluator::censoring_survival(double t) const { return censoring_ ? censoring_->at(t) : 1.0; }

BrierScore BrierEvaluator::at(double t) const {
  BrierScore out;
  double total = 0.0;
  const double g_t = censoring_survival(t);
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    const double y = data_.time(i);
    const double s = predictions_[i].at(t);
    if (y <= t) {
      if (!data_.event(i)) {
        ++out.used;  // censored before t: counted with zero contribution
        continue;
      }
      const double g = censoring_survival(y);
      if (g <= 0.0) {
        ++out.dropped;
        continue;
      }
      total += s * s / g;
    } else {
      if (g_t <= 0.0) {
        ++out.dropped;
        continue;
      }
      total += (1.0 - s) * (1.0 - s) / g_t;
    }
    ++out.used;
  }
  if (out.used == 0) throw ComputationError("Brier score: every observation was dropped at t = " + std::to_string(t));
  out.value = total / static_cast<double>(out.used);
  return out;
}

double BrierEvaluator::integrated(double t_start, double t_end) const {
  if (!(t_start < t_end)) throw ValidationError("integrated Brier score needs t_start < t_end");
  double area = 0.0;
  double left = t_start;
  double value = at(t_start).value;
  for (std::size_t j = event_grid_.steps_through(t_start); j < event_grid_.size() && event_grid_[j] < t_end; ++j) {
    area += value * (event_grid_[j] - left);
    left = event_grid_[j];
    value = at(left).value;
  }
  area += value * (t_end - left);
  return area / (t_end - t_start);
}

MetricCurve BrierEvaluator::curve(const TimeGrid& grid) const {
  MetricCurve out{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
  for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = at(grid[j]).value;
  return out;
}

double brier_score(const SurvivalModel& model, const SurvivalDataset& data, double t) {
  return BrierEvaluator(model, data).at(t).value;
}

double integrated_brier(const SurvivalModel& model, const SurvivalDataset& data, double t_start, double t_end,
                        std::size_t threads) {
  return BrierEvaluator(model, data, threads).integrated(t_start, t_end);
}

double local_accuracy_sigma(std::span<const StepCurve> reconstructions, std::span<const StepCurve> predictions,
                            double t) {
  if (reconstructions.size() != predictions.size() || predictions.empty()) {
    throw ValidationError("local accuracy needs aligned, non-empty explanation and prediction sets");
  }
  double residual = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double s = predictions[i].at(t);
    const double r = s - reconstructions[i].at(t);
    residual += r * r;
    scale += s * s;
  }
  if (scale == 0.0) throw ComputationError("local accuracy is undefined: all predictions are 0 at t");
  return std::sqrt(residual / scale);
}

SignMeasure sign_measure(const StepCurve& curve, double t_start, double t_end) {
  if (!(t_start < t_end)) throw ValidationError("sign measure needs t_start < t_end");
  SignMeasure out;
  auto tally = [&](double lo, double hi) {
    if (hi <= lo) return;
    const double v = curve.at(lo);
    if (v >= 0.0) out.non_negative += hi - lo;
    if (v <= 0.0) out.non_positive += hi - lo;
  };
  const TimeGrid& grid = curve.grid();
  double left = t_start;
  for (std::size_t j = grid.steps_through(t_start); j < grid.size() && grid[j] < t_end; ++j) {
    tally(left, grid[j]);
    left = grid[j];
  }
  tally(left, t_end);
  return out;
}

double changing_sign_proportion(std::span<const StepCurve> attributions, double alpha, double t_start, double t_end) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("CSP alpha must lie in (0, 0.5)");
  if (attributions.empty()) throw ValidationError("CSP needs at least one attribution curve");
  const double threshold = alpha * (t_end - t_start);
  std::size_t changing = 0;
  for (const StepCurve& phi : attributions) {
    const SignMeasure m = sign_measure(phi, t_start, t_end);
    if (m.non_negative > threshold && m.non_positive > threshold) ++changing;
  }
  return static_cast<double>(changing) / static_cast<double>(attributions.size());
}

namespace {

void check_aligned(const std::vector<std::vector<StepCurve>>& a, const std::vector<std::vector<StepCurve>>& b) {
  if (a.size() != b.size() || a.empty()) throw ValidationError("explanation sets must be aligned and non-empty");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw ValidationError("explanations differ in feature count at observation " +
                                                          std::to_string(i));
  }
}

}  // namespace

SkippingMean gt_shapley(const std::vector<std::vector<StepCurve>>& explanations,
                        const std::vector<std::vector<StepCurve>>& ground_truth, double t) {
  check_aligned(explanations, ground_truth);
  SkippingMean out;
  double total = 0.0;
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    const std::size_t p = explanations[i].size();
    if (p < 2) throw ValidationError("GT-Shapley needs at least two features");
    std::vector<double> a(p), b(p);
    double ma = 0.0, mb = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      a[d] = explanations[i][d].at(t);
      b[d] = ground_truth[i][d].at(t);
      ma += a[d];
      mb += b[d];
    }
    ma /= static_cast<double>(p);
    mb /= static_cast<double>(p);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      sab += (a[d] - ma) * (b[d] - mb);
      saa += (a[d] - ma) * (a[d] - ma);
      sbb += (b[d] - mb) * (b[d] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
      ++out.skipped;
      continue;
    }
    total += sab / std::sqrt(saa * sbb);
    ++out.used;
  }
  out.value = out.used ? total / static_cast<double>(out.used) : std::nan("");
  return out;
}

std::optional<double> normalized_rmse(const std::vector<std::vector<StepCurve>>& explanations,
                                      const std::vector<std::vector<StepCurve>>& ground_truth, double t,
                                      std::size_t d) {
  check_aligned(explanations, ground_truth);
  double residual = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    if (d >= explanations[i].size()) throw ValidationError("feature index out of range");
    const double truth = ground_truth[i][d].at(t);
    const double r = explanations[i][d].at(t) - truth;
    residual += r * r;
    scale += truth * truth;
  }
  if (scale == 0.0) return std::nullopt;
  return std::sqrt(residual / scale);
}

double hyperbolic_weight(std::size_t rank) { return 1.0 / (static_cast<double>(rank) + 1.0); }

double kendall_tau_h(const ImportanceRanking& reference, const ImportanceRanking& other, const RankWeigher& weigher) {
  const std::size_t p = reference.size();
  if (other.size() != p) throw ValidationError("rankings differ in length");
  if (p < 2) throw ValidationError("weighted Kendall tau needs at least two features");
  const std::vector<std::size_t> ra = reference.ranks();
  const std::vector<std::size_t> rb = other.ranks();
  double agree = 0.0, total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const double w = weigher(ra[i]) + weigher(ra[j]);
      const bool a_first = ra[i] < ra[j];
      const bool b_first = rb[i] < rb[j];
      agree += a_first == b_first ? w : -w;
      total += w;
    }
  }
  return agree / total;
}

}  // namespace survshap
