#pragma once

// Evaluation instruments: IPCW Brier score, local accuracy sigma(t), changing
// sign proportion, GT-Shapley correlation, normalised RMSE and the additive
// hyperbolic weighted Kendall tau.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "survshap/models.hpp"
#include "survshap/survival.hpp"

namespace survshap {

struct MetricCurve {
  std::vector<double> times;
  std::vector<double> values;
};

struct BrierScore {
  double value = 0.0;
  std::size_t used = 0;     // observations entering the mean
  std::size_t dropped = 0;  // dropped because the censoring survival was 0
};

/// Brier scores for a fixed set of predicted survival curves. Predictions are
/// evaluated once; individual time points are cheap afterwards.
class BrierEvaluator {
 public:
  /// `predictions[i]` is the predicted survival curve of row i of `data`.
  BrierEvaluator(const SurvivalDataset& data, std::vector<StepCurve> predictions);
  BrierEvaluator(const SurvivalModel& model, const SurvivalDataset& data, std::size_t threads = 1);

  /// (1/n) * sum of S(t|x_i)^2 / G(y_i) over events with y_i <= t plus
  /// (1 - S(t|x_i))^2 / G(t) over rows with y_i > t, where G is the
  /// Kaplan-Meier estimate of the censoring distribution.
  BrierScore at(double t) const;

  /// Time-normalised step integral of the Brier score over [t_start, t_end],
  /// sampled at t_start and every event time inside the window.
  double integrated(double t_start, double t_end) const;

  MetricCurve curve(const TimeGrid& grid) const;

 private:
  double censoring_survival(double t) const;

  const SurvivalDataset& data_;
  std::vector<StepCurve> predictions_;
  std::optional<StepCurve> censoring_;  // absent when nothing is censored
  TimeGrid event_grid_;
};

double brier_score(const SurvivalModel& model, const SurvivalDataset& data, double t);
double integrated_brier(const SurvivalModel& model, const SurvivalDataset& data, double t_start, double t_end,
                        std::size_t threads = 1);

/// sqrt( E[(S - R)^2] / E[S^2] ) at time t over aligned prediction curves S
/// and reconstructions R (baseline plus summed attributions).
double local_accuracy_sigma(std::span<const StepCurve> reconstructions, std::span<const StepCurve> predictions,
                            double t);

/// Fraction of attribution curves that are >= 0 on more than alpha of the
/// window's length and <= 0 on more than alpha of it. Zeros count for both.
double changing_sign_proportion(std::span<const StepCurve> attributions, double alpha, double t_start, double t_end);

/// Lengths of {phi >= 0} and {phi <= 0} inside [t_start, t_end].
struct SignMeasure {
  double non_negative = 0.0;
  double non_positive = 0.0;
};
SignMeasure sign_measure(const StepCurve& curve, double t_start, double t_end);

struct SkippingMean {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// Mean over observations of the Pearson correlation between the per-variable
/// attribution vectors at time t. `explanations[i][d]` is the curve of
/// variable d for observation i. Observations with a zero-variance vector are
/// skipped and counted.
SkippingMean gt_shapley(const std::vector<std::vector<StepCurve>>& explanations,
                        const std::vector<std::vector<StepCurve>>& ground_truth, double t);

/// sqrt( E[(phi - phi_true)^2] / E[phi_true^2] ) for variable d at time t;
/// empty when the denominator is 0.
std::optional<double> normalized_rmse(const std::vector<std::vector<StepCurve>>& explanations,
                                      const std::vector<std::vector<StepCurve>>& ground_truth, double t,
                                      std::size_t d);

using RankWeigher = std::function<double(std::size_t rank)>;

/// 1 / (rank + 1)
double hyperbolic_weight(std::size_t rank);

/// Weighted Kendall correlation with additive pair weights
/// w(i,j) = weigher(rank_i) + weigher(rank_j), ranks taken from `reference`.
/// Consumes the orderings only; needs at least two features.
double kendall_tau_h(const ImportanceRanking& reference, const ImportanceRanking& other,
                     const RankWeigher& weigher = hyperbolic_weight);

}  // namespace survshap
