#include "survshap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "survshap/error.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

namespace {

void report(const Progress& progress, const std::string& message) {
  if (progress) progress(message);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

MetricCurve sigma_curve(const TimeGrid& grid, const std::vector<StepCurve>& reconstructions,
                        const std::vector<StepCurve>& predictions) {
  MetricCurve out{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
  for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = local_accuracy_sigma(reconstructions, predictions, grid[j]);
  return out;
}

MetricCurve sigma_curve(const std::vector<SurvShapResult>& results) {
  std::vector<StepCurve> rec, pred;
  for (const auto& r : results) {
    rec.push_back(r.reconstruction());
    pred.push_back(r.prediction);
  }
  return sigma_curve(results.front().grid(), rec, pred);
}

std::vector<std::vector<StepCurve>> attribution_sets(const std::vector<SurvShapResult>& results, std::size_t count) {
  std::vector<std::vector<StepCurve>> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(results[i].attributions);
  return out;
}

std::vector<SurvLimeResult> survlime_rows(const SurvivalModel& model, const SurvivalDataset& targets,
                                          const SurvivalDataset& reference, const SurvLimeOptions& options,
                                          std::uint64_t seed, std::size_t threads) {
  std::vector<std::optional<SurvLimeResult>> slots(targets.rows());
  parallel_for(targets.rows(), threads, [&](std::size_t i) {
    SurvLimeOptions local = options;
    local.seed = substream(seed, i)();
    slots[i].emplace(survlime(model, targets.row(i), reference, local));
  });
  std::vector<SurvLimeResult> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ForestOptions forest_for(ForestOptions forest, std::uint64_t seed, std::size_t threads) {
  forest.seed = seed;
  forest.threads = threads;
  return forest;
}

}  // namespace

std::vector<std::vector<double>> rank_distribution(const std::vector<ImportanceRanking>& rankings) {
  if (rankings.empty()) throw ValidationError("rank distribution needs at least one ranking");
  const std::size_t p = rankings.front().size();
  std::vector<std::vector<double>> out(p, std::vector<double>(p, 0.0));
  for (const auto& r : rankings) {
    if (r.size() != p) throw ValidationError("rankings differ in length");
    for (std::size_t k = 0; k < p; ++k) out[k][r.order[k]] += 1.0;
  }
  for (auto& row : out) {
    for (double& v : row) v /= static_cast<double>(rankings.size());
  }
  return out;
}

Exp1Report run_exp1(const Exp1Options& options, const Progress& progress) {
  report(progress, "exp1: generating " + std::to_string(options.n) + " observations");
  Exp1Config config;
  config.n = options.n;
  config.seed = options.seed;
  config.threads = options.threads;
  SurvivalDataset data = generate_exp1(config);
  const IbsWindow window = default_ibs_window(data);
  const double csp_start = data.time_quantile(0.1), csp_end = data.time_quantile(0.9);
  const TimeGrid grid = build_event_grid(data);
  const SurvivalDataset background = select_background(data, options.background_cap, options.seed);

  std::optional<SurvivalDataset> reference;
  const std::size_t ref_rows = std::min(options.reference_observations, data.rows());
  if (ref_rows > 0 && options.reference_background > 0) {
    report(progress, "exp1: generating the " + std::to_string(options.reference_background) +
                         "-row reference background");
    Exp1Config ref = config;
    ref.n = options.reference_background;
    ref.seed = substream(options.seed, 1)();
    reference = generate_exp1(ref);
  }

  report(progress, "exp1: fitting models");
  const CoxModel cox = CoxModel::fit(data);
  const RandomSurvivalForest rsf = RandomSurvivalForest::fit(data, forest_for(options.forest, options.seed,
                                                                              options.threads));
  const std::vector<std::pair<std::string, const SurvivalModel*>> models = {{"cph", &cox}, {"rsf", &rsf}};

  Exp1Report out{options, data, window, csp_start, csp_end, {}};
  ShapSettings settings;
  settings.method = ShapMethod::kernel;
  settings.seed = options.seed;
  for (const auto& [name, model] : models) {
    Exp1ModelReport m;
    m.model = name;
    const BrierEvaluator brier(*model, data, options.threads);
    m.ibs = brier.integrated(window.start, window.end);
    m.brier = brier.curve(grid);
    report(progress, "exp1: explaining " + std::to_string(data.rows()) + " observations of " + name);
    m.explanations = survshap_rows(*model, data, all_rows(data.rows()), background, grid, settings, options.threads);
    for (std::size_t d = 0; d < data.cols(); ++d) {
      std::vector<StepCurve> curves;
      for (const auto& e : m.explanations) curves.push_back(e.attributions[d]);
      m.csp.push_back(changing_sign_proportion(curves, options.alpha, csp_start, csp_end));
    }
    m.sigma = sigma_curve(m.explanations);
    if (reference) {
      report(progress, "exp1: reference explanations of " + name);
      const auto truth = survshap_rows(*model, data, all_rows(ref_rows), *reference, grid, settings, options.threads);
      const auto est = attribution_sets(m.explanations, ref_rows);
      const auto ref_sets = attribution_sets(truth, ref_rows);
      MetricCurve rho{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
      for (std::size_t j = 0; j < grid.size(); ++j) rho.values[j] = gt_shapley(est, ref_sets, grid[j]).value;
      m.gt_shapley = std::move(rho);
      for (std::size_t d = 0; d < data.cols(); ++d) {
        MetricCurve err{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
        for (std::size_t j = 0; j < grid.size(); ++j) {
          err.values[j] = normalized_rmse(est, ref_sets, grid[j], d).value_or(std::numeric_limits<double>::quiet_NaN());
        }
        m.normalized_rmse.push_back(std::move(err));
      }
    }
    out.models.push_back(std::move(m));
  }
  return out;
}

Exp2DatasetReport run_exp2_dataset(const std::string& name, const SphereConfig& config, const Exp2Options& options,
                                   const Progress& progress) {
  report(progress, "exp2: " + name + ": generating and splitting");
  SphereConfig c = config;
  c.n = options.n;
  c.seed = options.seed;
  const SurvivalDataset data = generate_sphere_dataset(c);
  TrainTest split = split_train_test(data, options.test_fraction, options.seed);
  const SurvivalDataset& train = split.train;
  const SurvivalDataset& test = split.test;

  report(progress, "exp2: " + name + ": fitting models");
  const CoxModel cox = CoxModel::fit(train);
  const RandomSurvivalForest rsf = RandomSurvivalForest::fit(train, forest_for(options.forest, options.seed,
                                                                               options.threads));
  const IbsWindow window = default_ibs_window(test);
  const BrierEvaluator brier_cox(cox, test, options.threads), brier_rsf(rsf, test, options.threads);
  const TimeGrid grid = build_event_grid(train);
  const SurvivalDataset background = select_background(train, options.background_cap, options.seed);
  ShapSettings settings;
  settings.seed = options.seed;
  const auto rows = all_rows(test.rows());

  Exp2DatasetReport out{name,
                        train,
                        test,
                        cox.coefficients(),
                        brier_cox.integrated(window.start, window.end),
                        brier_rsf.integrated(window.start, window.end),
                        brier_cox.curve(build_event_grid(test)),
                        brier_rsf.curve(build_event_grid(test)),
                        {},
                        {},
                        0.0,
                        0.0,
                        {},
                        {},
                        {},
                        {},
                        {}};

  report(progress, "exp2: " + name + ": glass-box explanations of the Cox model");
  const auto cox_shap = survshap_rows(cox, test, rows, background, grid, settings, options.threads);
  const auto cox_lime = survlime_rows(cox, test, train, options.survlime, options.seed, options.threads);
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const ImportanceRanking truth = cox_local_ranking(cox, test.row(i));
    out.tau_survshap.push_back(kendall_tau_h(truth, aggregate_importance(cox_shap[i], grid.back())));
    out.tau_survlime.push_back(kendall_tau_h(truth, survlime_ranking(cox_lime[i], test.row(i))));
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  out.mean_tau_survshap = mean(out.tau_survshap);
  out.mean_tau_survlime = mean(out.tau_survlime);

  report(progress, "exp2: " + name + ": black-box explanations of the forest");
  const auto rsf_shap = survshap_rows(rsf, test, rows, background, grid, settings, options.threads);
  const auto rsf_lime = survlime_rows(rsf, test, train, options.survlime, options.seed, options.threads);
  out.sigma_survshap_rsf = sigma_curve(rsf_shap);
  std::vector<StepCurve> lime_rec, preds;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    lime_rec.push_back(rsf_lime[i].surrogate_survival(test.row(i)));
    preds.push_back(rsf_shap[i].prediction);
    out.rsf_survshap_rankings.push_back(aggregate_importance(rsf_shap[i], grid.back()));
    out.rsf_survlime_rankings.push_back(survlime_ranking(rsf_lime[i], test.row(i)));
  }
  out.sigma_survlime_rsf = sigma_curve(grid, lime_rec, preds);
  out.rsf_permutation = permutation_importance(rsf, test, options.permutation_repeats, options.seed, window,
                                               options.threads);
  return out;
}

Exp2Report run_exp2(const Exp2Options& options, const Progress& progress) {
  Exp2Report out{options, {}};
  out.datasets.push_back(run_exp2_dataset("dataset0", SphereConfig::dataset0(), options, progress));
  out.datasets.push_back(run_exp2_dataset("dataset1", SphereConfig::dataset1(), options, progress));
  return out;
}

Exp3Report run_exp3(const Exp3Options& options, const Progress& progress) {
  if (options.path.empty()) throw ValidationError("exp3 needs the heart-failure CSV path");
  report(progress, "exp3: loading " + options.path);
  SurvivalDataset data = load_heart_failure(options.path, options.features);
  const IbsWindow window = default_ibs_window(data);
  const TimeGrid grid = build_event_grid(data);
  const CoxModel cox = CoxModel::fit(data);
  const RandomSurvivalForest rsf = RandomSurvivalForest::fit(data, forest_for(options.forest, options.seed,
                                                                              options.threads));
  Exp3Report out{options, data, {}};
  ShapSettings settings;
  settings.seed = options.seed;
  for (const auto& [name, model] : std::vector<std::pair<std::string, const SurvivalModel*>>{{"cph", &cox},
                                                                                             {"rsf", &rsf}}) {
    report(progress, "exp3: explaining " + name);
    const BrierEvaluator brier(*model, data, options.threads);
    Exp3ModelReport m{name,
                      brier.integrated(window.start, window.end),
                      brier.curve(grid),
                      permutation_importance(*model, data, options.permutation_repeats, options.seed, window,
                                             options.threads),
                      {},
                      {},
                      survshap_rows(*model, data, all_rows(data.rows()), data, grid, settings, options.threads),
                      0.0};
    const auto lime = survlime_rows(*model, data, data, options.survlime, options.seed, options.threads);
    const std::set<std::size_t> global_top{m.permutation.order[0], m.permutation.order[1]};
    std::size_t agree = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      m.survshap_rankings.push_back(aggregate_importance(m.explanations[i], grid.back()));
      m.survlime_rankings.push_back(survlime_ranking(lime[i], data.row(i)));
      const auto& order = m.survshap_rankings.back().order;
      if (global_top == std::set<std::size_t>{order[0], order[1]}) ++agree;
    }
    m.top2_agreement = static_cast<double>(agree) / static_cast<double>(data.rows());
    out.models.push_back(std::move(m));
  }
  return out;
}

}  // namespace survshap
