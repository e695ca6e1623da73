#pragma once

// End-to-end pipelines behind `survshap reproduce`: EXP1 (time-dependent
// effect), EXP2 (sphere datasets, ranking fidelity) and EXP3 (heart failure).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "survshap/datagen.hpp"
#include "survshap/explain.hpp"
#include "survshap/metrics.hpp"
#include "survshap/models.hpp"

namespace survshap {

using Progress = std::function<void(const std::string&)>;

/// fractions[r][d]: share of rankings that put feature d at rank r.
std::vector<std::vector<double>> rank_distribution(const std::vector<ImportanceRanking>& rankings);

struct Exp1Options {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t background_cap = 0;  // 0: whole dataset
  double alpha = 0.05;
  ForestOptions forest;
  // Ground-truth reference (GT-Shapley, normalised RMSE); skipped when 0.
  std::size_t reference_observations = 100;
  std::size_t reference_background = 10000;
};

struct Exp1ModelReport {
  std::string model;
  double ibs = 0.0;
  MetricCurve brier;
  std::vector<double> csp;  // per variable
  MetricCurve sigma;        // local accuracy over the event grid
  std::optional<MetricCurve> gt_shapley;
  std::vector<MetricCurve> normalized_rmse;  // per variable; NaN where undefined
  std::vector<SurvShapResult> explanations;
};

struct Exp1Report {
  Exp1Options options;
  SurvivalDataset data;
  IbsWindow ibs_window;
  double csp_start = 0.0, csp_end = 0.0;
  std::vector<Exp1ModelReport> models;  // cph, rsf
};

Exp1Report run_exp1(const Exp1Options& options, const Progress& progress = {});

struct Exp2Options {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double test_fraction = 0.1;
  std::size_t background_cap = 0;
  ForestOptions forest;
  SurvLimeOptions survlime;
  std::size_t permutation_repeats = 10;
};

struct Exp2DatasetReport {
  std::string name;
  SurvivalDataset train, test;
  std::vector<double> cox_coefficients;
  double ibs_cox = 0.0, ibs_rsf = 0.0;
  MetricCurve brier_cox, brier_rsf;
  // Glass-box part: explanations of the Cox model against |x * b|.
  std::vector<double> tau_survshap, tau_survlime;  // per test row
  double mean_tau_survshap = 0.0, mean_tau_survlime = 0.0;
  // Black-box part: explanations of the forest.
  MetricCurve sigma_survshap_rsf, sigma_survlime_rsf;
  std::vector<ImportanceRanking> rsf_survshap_rankings, rsf_survlime_rankings;
  ImportanceRanking rsf_permutation;
};

struct Exp2Report {
  Exp2Options options;
  std::vector<Exp2DatasetReport> datasets;  // dataset0, dataset1
};

Exp2DatasetReport run_exp2_dataset(const std::string& name, const SphereConfig& config, const Exp2Options& options,
                                   const Progress& progress = {});
Exp2Report run_exp2(const Exp2Options& options, const Progress& progress = {});

struct Exp3Options {
  std::string path;
  std::vector<std::string> features = default_heart_failure_features();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  ForestOptions forest;
  SurvLimeOptions survlime;
  std::size_t permutation_repeats = 10;
};

struct Exp3ModelReport {
  std::string model;
  double ibs = 0.0;
  MetricCurve brier;
  ImportanceRanking permutation;
  std::vector<ImportanceRanking> survshap_rankings, survlime_rankings;
  std::vector<SurvShapResult> explanations;
  /// Share of observations whose top-2 psi variables equal the top-2 of the
  /// permutation importance (as sets).
  double top2_agreement = 0.0;
};

struct Exp3Report {
  Exp3Options options;
  SurvivalDataset data;
  std::vector<Exp3ModelReport> models;  // cph, rsf
};

Exp3Report run_exp3(const Exp3Options& options, const Progress& progress = {});

}  // namespace survshap
