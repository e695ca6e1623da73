#pragma once

// SurvSHAP(t): Shapley attribution curves over predicted survival functions,
// by exact enumeration, permutation sampling or the constrained Shapley-kernel
// regression; and the SurvLIME surrogate-Cox baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "survshap/models.hpp"
#include "survshap/survival.hpp"

namespace survshap {

/// Coalition value e_t(S): mean predicted survival over background rows with
/// the coalition's features taken from x and the rest from the row. Values are
/// computed on the model grid, projected onto the explanation grid and cached
/// by coalition bitmask.
class ValueFunction {
 public:
  ValueFunction(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                const TimeGrid& grid);

  std::size_t features() const { return x_.size(); }
  const TimeGrid& grid() const { return grid_; }

  const std::vector<double>& operator()(std::uint64_t coalition);

  /// Model prediction for x itself on the explanation grid.
  const std::vector<double>& prediction() const { return prediction_; }

  /// Number of distinct coalitions evaluated so far.
  std::size_t evaluations() const { return cache_.size(); }

 private:
  const SurvivalModel& model_;
  std::vector<double> x_;
  const SurvivalDataset& background_;
  TimeGrid grid_;
  GridProjection projection_;
  std::vector<double> prediction_;
  std::unordered_map<std::uint64_t, std::vector<double>> cache_;
  std::vector<double> composite_, native_, sum_;
};

/// Seeded row subsample of at most `cap` rows (all rows when cap is 0 or not
/// smaller than the dataset). Row order is preserved.
SurvivalDataset select_background(const SurvivalDataset& data, std::size_t cap, std::uint64_t seed);

enum class ShapMethod { exact, sampling, kernel };

const char* method_name(ShapMethod method);
ShapMethod parse_method(const std::string& name);

struct ShapSettings {
  ShapMethod method = ShapMethod::kernel;
  std::size_t n_permutations = 1000;    // sampling
  std::size_t kernel_coalitions = 4096; // kernel, only when p exceeds kKernelEnumerationLimit
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kExactFeatureLimit = 12;
inline constexpr std::size_t kKernelEnumerationLimit = 13;

struct SurvShapResult {
  ShapSettings settings;
  std::vector<std::string> feature_names;
  std::vector<double> observation;
  StepCurve baseline;                  // empty-coalition value
  StepCurve prediction;                // model output for the observation
  std::vector<StepCurve> attributions; // one per feature
  std::vector<StepCurve> normalized;   // filled by normalize_attributions
  std::vector<std::uint8_t> zero_total;  // grid points where every attribution is 0
  std::size_t background_rows = 0;
  std::size_t evaluations = 0;

  const TimeGrid& grid() const { return baseline.grid(); }
  std::size_t num_features() const { return attributions.size(); }

  /// baseline + sum of attributions.
  StepCurve reconstruction() const;
  /// max over grid points of |reconstruction - prediction|.
  double reconstruction_error() const;
};

SurvShapResult survshap_exact(const SurvivalModel& model, std::span<const double> x,
                              const SurvivalDataset& background, const TimeGrid& grid);

SurvShapResult survshap_sampling(const SurvivalModel& model, std::span<const double> x,
                                 const SurvivalDataset& background, const TimeGrid& grid,
                                 std::size_t n_permutations, std::uint64_t seed);

SurvShapResult survshap_kernel(const SurvivalModel& model, std::span<const double> x,
                               const SurvivalDataset& background, const TimeGrid& grid,
                               std::size_t sampled_coalitions = 4096, std::uint64_t seed = 0);

/// Dispatches on settings.method.
SurvShapResult survshap(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                        const TimeGrid& grid, const ShapSettings& settings);

/// Explains rows of `targets` in parallel. Sampling seeds derive from
/// (settings.seed, row index), so results do not depend on the thread count.
std::vector<SurvShapResult> survshap_rows(const SurvivalModel& model, const SurvivalDataset& targets,
                                          std::span<const std::size_t> rows, const SurvivalDataset& background,
                                          const TimeGrid& grid, const ShapSettings& settings,
                                          std::size_t threads = 1);

/// (p-1) / (C(p,s) * s * (p-s)) for 0 < s < p.
double shapley_kernel_weight(std::size_t p, std::size_t s);

/// phi_d(t) / sum_j |phi_j(t)|; 0 where the sum vanishes (flagged in zero_total).
SurvShapResult normalize_attributions(SurvShapResult result);

/// Integral of |phi_d| over [0, t_max] per feature.
std::vector<double> attribution_importance(const SurvShapResult& result, double t_max);
std::vector<double> attribution_importance(const SurvShapResult& result, double t_start, double t_end);

ImportanceRanking aggregate_importance(const SurvShapResult& result, double t_max);

struct SurvLimeOptions {
  std::size_t n_neighbors = 1000;
  double scale = 0.1;      // neighbour sd, in units of each feature's sd
  double bandwidth = 0.0;  // Epanechnikov radius in standardised units; 0 picks 2 * scale * sqrt(p)
  std::uint64_t seed = 0;
};

struct SurvLimeResult {
  std::vector<double> coefficients;
  std::vector<double> observation;
  SurvLimeOptions options;  // bandwidth resolved
  double loss = 0.0;
  std::size_t clamped = 0;  // CHF values raised to the 1e-12 floor
  StepCurve baseline_chf;   // dataset Nelson-Aalen on the model grid

  /// exp(-H0(t) * exp(b'x)), the surrogate's survival curve at x.
  StepCurve surrogate_survival(std::span<const double> x) const;
};

SurvLimeResult survlime(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& dataset,
                        const SurvLimeOptions& options = {});

/// Ranks by |x_d * b_d|.
ImportanceRanking survlime_ranking(const SurvLimeResult& result, std::span<const double> x);

}  // namespace survshap
