#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "json.hpp"

#include "survshap/csv.hpp"
#include "survshap/datagen.hpp"
#include "survshap/error.hpp"
#include "survshap/experiments.hpp"
#include "survshap/metrics.hpp"
#include "survshap/parallel.hpp"
#include "survshap/report.hpp"

namespace survshap::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_index(const std::string& token, const std::string& whole) {
  std::size_t v = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError("bad observation selector '" + whole + "': '" + token + "' is not a row index");
  }
  return v;
}

void require_out(const GlobalOptions& global, const char* what) {
  if (global.out.empty()) throw ValidationError(std::string("--out is required: ") + what);
}

void progress_line(const std::string& message) { std::cerr << "[survshap] " << message << "\n"; }

void write_output(RunManifest& manifest, const std::string& path, const std::string& content) {
  write_text_file(path, content);
  manifest.outputs.push_back(path);
}

SurvivalDataset read_input(RunManifest& manifest, const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  SurvivalDataset data = read_dataset_csv(path);
  manifest.inputs.push_back(path);
  return data;
}

std::unique_ptr<SurvivalModel> read_model(RunManifest& manifest, const std::string& path) {
  if (path.empty()) throw ValidationError("--model is required");
  auto model = load_model(path);
  manifest.inputs.push_back(path);
  return model;
}

void check_columns(const SurvivalModel& model, const SurvivalDataset& data, const std::string& what) {
  if (model.feature_names() != data.feature_names()) {
    std::string expected;
    for (const auto& n : model.feature_names()) expected += (expected.empty() ? "" : ",") + n;
    throw ValidationError(what + " columns do not match the model features (" + expected + ")");
  }
}

std::vector<MetricRecord> curve_records(const std::string& metric, const std::string& variable,
                                        const MetricCurve& curve) {
  std::vector<MetricRecord> out;
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    std::optional<double> v;
    if (std::isfinite(curve.values[j])) v = curve.values[j];
    out.push_back({metric, variable, curve.times[j], v});
  }
  return out;
}

void append(std::vector<MetricRecord>& out, std::vector<MetricRecord> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void ranking_records(std::vector<MetricRecord>& out, const std::string& metric, const ImportanceRanking& ranking,
                     const std::vector<std::string>& names) {
  for (std::size_t d = 0; d < names.size(); ++d) out.push_back({metric, names[d], std::nullopt, ranking.scores[d]});
}

void fraction_records(std::vector<MetricRecord>& out, const std::string& metric,
                      const std::vector<ImportanceRanking>& rankings, const std::vector<std::string>& names) {
  const auto fractions = rank_distribution(rankings);
  for (std::size_t r = 0; r < fractions.size(); ++r) {
    for (std::size_t d = 0; d < names.size(); ++d) {
      out.push_back({metric + ".r" + std::to_string(r + 1), names[d], std::nullopt, fractions[r][d]});
    }
  }
}

// SurvSHAP(t) curves of one observation rebuilt from explanation records.
struct ObservationCurves {
  std::vector<double> times;
  std::vector<double> baseline, prediction;
  std::vector<std::string> variables;
  std::vector<std::vector<double>> phi;
};

std::map<std::size_t, ObservationCurves> collect_curves(const std::vector<ExplanationRecord>& records) {
  std::map<std::size_t, ObservationCurves> out;
  for (const auto& r : records) {
    if (r.record != "baseline" && r.record != "prediction" && r.record != "phi") continue;
    if (!r.time) throw ValidationError("explanation record '" + r.record + "' without a time");
    ObservationCurves& c = out[r.observation];
    if (r.record == "baseline") {
      c.times.push_back(*r.time);
      c.baseline.push_back(r.value);
    } else if (r.record == "prediction") {
      c.prediction.push_back(r.value);
    } else {
      auto it = std::find(c.variables.begin(), c.variables.end(), r.variable);
      if (it == c.variables.end()) {
        c.variables.push_back(r.variable);
        c.phi.emplace_back();
        it = c.variables.end() - 1;
      }
      c.phi[static_cast<std::size_t>(it - c.variables.begin())].push_back(r.value);
    }
  }
  for (const auto& [obs, c] : out) {
    bool ok = c.prediction.size() == c.times.size() && !c.phi.empty();
    for (const auto& v : c.phi) ok = ok && v.size() == c.times.size();
    if (!ok) throw ValidationError("explanation records of observation " + std::to_string(obs) + " are incomplete");
  }
  return out;
}

std::string plot_table(const std::vector<std::array<std::string, 4>>& rows) {
  std::string out = "# survshap-plotdata v1\nseries,x,y,group\n";
  for (const auto& r : rows) out += r[0] + "," + r[1] + "," + r[2] + "," + r[3] + "\n";
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

}  // namespace

std::vector<std::size_t> parse_selector(const std::string& text, std::size_t rows) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string token = trim(std::string_view(text).substr(start, comma - start));
    start = comma + 1;
    if (token == "all") {
      for (std::size_t i = 0; i < rows; ++i) out.push_back(i);
    } else if (const auto colon = token.find(':'); colon != std::string::npos) {
      const std::size_t a = parse_index(trim(token.substr(0, colon)), text);
      const std::size_t b = parse_index(trim(token.substr(colon + 1)), text);
      if (a >= b) throw ValidationError("bad observation selector '" + text + "': empty range " + token);
      if (b > rows) {
        throw ValidationError("observation range " + token + " exceeds the " + std::to_string(rows) + " rows");
      }
      for (std::size_t i = a; i < b; ++i) out.push_back(i);
    } else {
      const std::size_t i = parse_index(token, text);
      if (i >= rows) {
        throw ValidationError("observation " + token + " out of range (" + std::to_string(rows) + " rows)");
      }
      out.push_back(i);
    }
  }
  std::set<std::size_t> seen;
  for (std::size_t i : out) {
    if (!seen.insert(i).second) throw ValidationError("observation " + std::to_string(i) + " selected twice");
  }
  if (out.empty()) throw ValidationError("observation selector '" + text + "' selects no rows");
  return out;
}

std::string RunManifest::to_json() const {
  Json j;
  j["format"] = "survshap-manifest";
  j["version"] = 1;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  j["seed"] = seed;
  j["threads"] = threads;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["toolkit_version"] = version;
  j["duration_seconds"] = duration_seconds;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds = {"curves", "prediction", "ranking", "metric",
                                                 "brier",  "sigma",      "nrmse",   "gt_shapley"};
  return kinds;
}

void cmd_generate(const GenerateOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "path of the dataset file to write");
  std::optional<SurvivalDataset> data;
  if (options.kind == "exp1") {
    Exp1Config config;
    config.n = options.n;
    config.seed = global.seed;
    config.left_censor_lo = options.left_censor_lo;
    config.left_censor_hi = options.left_censor_hi;
    config.right_censor_lo = options.right_censor_lo;
    config.right_censor_hi = options.right_censor_hi;
    config.threads = global.threads;
    Exp1Sample sample = generate_exp1_sample(config);
    if (!options.latent_out.empty()) {
      std::string text = "# survshap-latent v1\nrow,latent_time,uniform,left_censor,right_censor\n";
      for (std::size_t i = 0; i < sample.latent_times.size(); ++i) {
        text += std::to_string(i) + "," + format_double(sample.latent_times[i]) + "," +
                format_double(sample.uniforms[i]) + "," + format_double(sample.left_censor[i]) + "," +
                format_double(sample.right_censor[i]) + "\n";
      }
      write_output(manifest, options.latent_out, text);
    }
    data.emplace(std::move(sample.data));
  } else if (options.kind == "dataset0" || options.kind == "dataset1") {
    SphereConfig config = options.kind == "dataset0" ? SphereConfig::dataset0() : SphereConfig::dataset1();
    auto set5 = [](std::array<double, 5>& target, const std::vector<double>& v, const char* flag) {
      if (v.empty()) return;
      if (v.size() != 5) throw ValidationError(std::string(flag) + " takes exactly 5 values");
      std::copy(v.begin(), v.end(), target.begin());
    };
    set5(config.center, options.center, "--center");
    set5(config.coefficients, options.coefficients, "--coefficients");
    if (options.radius > 0.0) config.radius = options.radius;
    if (options.lambda > 0.0) config.lambda = options.lambda;
    if (options.shape > 0.0) config.shape = options.shape;
    if (options.event_probability >= 0.0) config.event_probability = options.event_probability;
    config.n = options.n;
    config.seed = global.seed;
    data.emplace(generate_sphere_dataset(config));
  } else if (options.kind == "heart-failure") {
    if (options.source.empty()) throw ValidationError("--source is required for heart-failure");
    data.emplace(load_heart_failure(options.source,
                                    options.features.empty() ? default_heart_failure_features() : options.features));
    manifest.inputs.push_back(options.source);
  } else {
    throw ValidationError("unknown dataset kind '" + options.kind + "'");
  }
  write_output(manifest, global.out, format_dataset_csv(*data));
  std::cout << "wrote " << global.out << ": " << data->rows() << " rows, " << data->cols() << " features, "
            << data->event_count() << " events\n";
}

void cmd_fit(const FitOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "path of the model file to write");
  const SurvivalDataset data = read_input(manifest, options.data, "--data");
  std::optional<TrainTest> split;
  if (options.test_fraction > 0.0) split.emplace(split_train_test(data, options.test_fraction, global.seed));
  const SurvivalDataset& train = split ? split->train : data;
  const SurvivalDataset& eval = split ? split->test : data;

  std::unique_ptr<SurvivalModel> model;
  if (options.model == "cph") {
    CoxFitOptions cox;
    cox.max_iter = options.cox_max_iter;
    cox.tol = options.cox_tol;
    model = std::make_unique<CoxModel>(CoxModel::fit(train, cox));
  } else if (options.model == "rsf") {
    ForestOptions forest = options.forest;
    forest.seed = global.seed;
    forest.threads = global.threads;
    model = std::make_unique<RandomSurvivalForest>(RandomSurvivalForest::fit(train, forest));
  } else {
    throw ValidationError("unknown model '" + options.model + "' (expected cph or rsf)");
  }
  write_output(manifest, global.out, serialize_model(*model));
  const IbsWindow window = default_ibs_window(eval);
  const double ibs = integrated_brier(*model, eval, window.start, window.end, global.threads);
  std::cout << "model=" << model->kind() << " ibs=" << format_double(ibs) << " window=[" << format_double(window.start)
            << "," << format_double(window.end) << "] evaluated_on=" << (split ? "test" : "train")
            << " rows=" << eval.rows() << "\n";
}

void cmd_explain(const ExplainOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "path of the explanation file to write");
  const auto model = read_model(manifest, options.model);
  const SurvivalDataset data = read_input(manifest, options.data, "--data");
  check_columns(*model, data, "--data");
  const SurvivalDataset reference =
      options.background.empty() ? data : read_input(manifest, options.background, "--background");
  check_columns(*model, reference, "--background");
  const std::vector<std::size_t> rows = parse_selector(options.rows, data.rows());
  const TimeGrid& grid = model->event_grid();
  const double psi_t_max = options.psi_t_max > 0.0 ? options.psi_t_max : grid.back();

  std::vector<ExplanationRecord> records;
  std::vector<std::string> comments = {"model=" + model->kind(), "method=" + options.method,
                                       "observations=" + options.rows, "seed=" + std::to_string(global.seed)};
  if (options.method == "survlime") {
    std::vector<std::optional<SurvLimeResult>> slots(rows.size());
    parallel_for(rows.size(), global.threads, [&](std::size_t k) {
      SurvLimeOptions local = options.survlime;
      local.seed = substream(global.seed, rows[k])();
      slots[k].emplace(survlime(*model, data.row(rows[k]), reference, local));
    });
    for (std::size_t k = 0; k < rows.size(); ++k) append_records(records, rows[k], *slots[k], data.feature_names());
    comments.push_back("neighbors=" + std::to_string(options.survlime.n_neighbors));
  } else {
    ShapSettings settings;
    settings.method = parse_method(options.method);
    settings.n_permutations = options.permutations;
    settings.kernel_coalitions = options.coalitions;
    settings.seed = global.seed;
    const SurvivalDataset background = select_background(reference, options.background_cap, global.seed);
    const auto results = survshap_rows(*model, data, rows, background, grid, settings, global.threads);
    double worst = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      append_records(records, rows[k], results[k], psi_t_max);
      worst = std::max(worst, results[k].reconstruction_error());
    }
    comments.push_back("background=" + std::to_string(background.rows()));
    std::cout << "explained " << rows.size() << " observations; max reconstruction error " << format_double(worst)
              << "\n";
  }
  write_output(manifest, global.out, format_explanations(records, comments));
}

void cmd_evaluate(const EvaluateOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "path of the metric file to write");
  const auto model = read_model(manifest, options.model);
  const SurvivalDataset data = read_input(manifest, options.data, "--data");
  check_columns(*model, data, "--data");
  IbsWindow window = default_ibs_window(data);
  if (options.window_start != 0.0 || options.window_end != 0.0) window = {options.window_start, options.window_end};

  std::vector<MetricRecord> records;
  const BrierEvaluator brier(*model, data, global.threads);
  const double ibs = brier.integrated(window.start, window.end);
  records.push_back({"ibs", "", std::nullopt, ibs});
  records.push_back({"ibs_window", "start", std::nullopt, window.start});
  records.push_back({"ibs_window", "end", std::nullopt, window.end});
  append(records, curve_records("brier", "", brier.curve(build_event_grid(data))));
  if (options.permutation_repeats > 0) {
    const ImportanceRanking pi =
        permutation_importance(*model, data, options.permutation_repeats, global.seed, window, global.threads);
    ranking_records(records, "permutation_importance", pi, data.feature_names());
  }
  if (!options.explanations.empty()) {
    const auto curves = collect_curves(parse_explanations(read_text_file(options.explanations), options.explanations));
    manifest.inputs.push_back(options.explanations);
    if (curves.empty()) throw ValidationError(options.explanations + " holds no SurvSHAP(t) attributions");
    std::vector<StepCurve> rec, pred;
    std::vector<std::vector<StepCurve>> phi;
    for (const auto& [obs, c] : curves) {
      const TimeGrid g(c.times);
      std::vector<double> r = c.baseline;
      std::vector<StepCurve> per;
      for (const auto& v : c.phi) {
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += v[j];
        per.emplace_back(g, v, CurveKind::attribution);
      }
      // Attribution kind: reconstructions may leave [0, 1] by rounding.
      rec.emplace_back(g, std::move(r), CurveKind::attribution);
      pred.emplace_back(g, c.prediction, CurveKind::attribution);
      phi.push_back(std::move(per));
    }
    const ObservationCurves& first = curves.begin()->second;
    for (double t : first.times) {
      records.push_back({"sigma", "", t, local_accuracy_sigma(rec, pred, t)});
    }
    const double a = data.time_quantile(options.csp_lo), b = data.time_quantile(options.csp_hi);
    for (std::size_t d = 0; d < first.variables.size(); ++d) {
      std::vector<StepCurve> column;
      for (const auto& per : phi) {
        if (per.size() != first.variables.size()) throw ValidationError("observations differ in their variables");
        column.push_back(per[d]);
      }
      records.push_back({"csp", first.variables[d], std::nullopt, changing_sign_proportion(column, options.alpha, a, b)});
    }
  }
  write_output(manifest, global.out,
               format_metrics(records, {"model=" + model->kind(), "data=" + options.data}));
  std::cout << "ibs=" << format_double(ibs) << "\n";
}

void cmd_reproduce(const ReproduceOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "directory for the report");
  std::filesystem::create_directories(global.out);
  const std::filesystem::path dir(global.out);
  auto path = [&](const std::string& name) { return (dir / name).string(); };
  ForestOptions forest = options.forest;
  std::vector<MetricRecord> metrics, table;
  std::vector<std::string> comments = {"experiment=" + options.experiment, "seed=" + std::to_string(global.seed)};

  if (options.experiment == "exp1") {
    Exp1Options o;
    o.n = options.n;
    o.seed = global.seed;
    o.threads = global.threads;
    o.background_cap = options.background_cap;
    o.forest = forest;
    o.reference_observations = options.reference_observations;
    o.reference_background = options.reference_background;
    const Exp1Report r = run_exp1(o, progress_line);
    write_output(manifest, path("dataset.csv"), format_dataset_csv(r.data));
    comments.push_back("ibs_window=" + format_double(r.ibs_window.start) + ":" + format_double(r.ibs_window.end));
    comments.push_back("csp_window=" + format_double(r.csp_start) + ":" + format_double(r.csp_end));
    const auto& names = r.data.feature_names();
    for (const auto& m : r.models) {
      metrics.push_back({"ibs." + m.model, "", std::nullopt, m.ibs});
      append(metrics, curve_records("brier." + m.model, "", m.brier));
      for (std::size_t d = 0; d < names.size(); ++d) {
        metrics.push_back({"csp." + m.model, names[d], std::nullopt, m.csp[d]});
        table.push_back(metrics.back());
      }
      append(metrics, curve_records("sigma." + m.model, "", m.sigma));
      if (m.gt_shapley) append(metrics, curve_records("gt_shapley." + m.model, "", *m.gt_shapley));
      for (std::size_t d = 0; d < m.normalized_rmse.size(); ++d) {
        append(metrics, curve_records("normalized_rmse." + m.model, names[d], m.normalized_rmse[d]));
      }
      std::vector<ExplanationRecord> records;
      const std::size_t keep = std::min(options.save_explanations, m.explanations.size());
      for (std::size_t i = 0; i < keep; ++i) {
        append_records(records, i, m.explanations[i], m.explanations[i].grid().back());
      }
      write_output(manifest, path("explanations_" + m.model + ".csv"), format_explanations(records, comments));
    }
    write_output(manifest, path("table1.csv"), format_metrics(table, comments));
  } else if (options.experiment == "exp2") {
    Exp2Options o;
    o.n = options.n;
    o.seed = global.seed;
    o.threads = global.threads;
    o.background_cap = options.background_cap;
    o.forest = forest;
    o.permutation_repeats = options.permutation_repeats;
    const Exp2Report r = run_exp2(o, progress_line);
    for (const auto& ds : r.datasets) {
      const std::string& n = ds.name;
      const auto& names = ds.train.feature_names();
      write_output(manifest, path(n + "_train.csv"), format_dataset_csv(ds.train));
      write_output(manifest, path(n + "_test.csv"), format_dataset_csv(ds.test));
      for (std::size_t d = 0; d < names.size(); ++d) {
        metrics.push_back({"cox_coefficient." + n, names[d], std::nullopt, ds.cox_coefficients[d]});
      }
      metrics.push_back({"ibs." + n + ".cph", "", std::nullopt, ds.ibs_cox});
      metrics.push_back({"ibs." + n + ".rsf", "", std::nullopt, ds.ibs_rsf});
      append(metrics, curve_records("brier." + n + ".cph", "", ds.brier_cox));
      append(metrics, curve_records("brier." + n + ".rsf", "", ds.brier_rsf));
      metrics.push_back({"tau_h." + n + ".survshap", "", std::nullopt, ds.mean_tau_survshap});
      table.push_back(metrics.back());
      metrics.push_back({"tau_h." + n + ".survlime", "", std::nullopt, ds.mean_tau_survlime});
      table.push_back(metrics.back());
      for (std::size_t i = 0; i < ds.tau_survshap.size(); ++i) {
        metrics.push_back({"tau_h_row." + n + ".survshap", "row" + std::to_string(i), std::nullopt, ds.tau_survshap[i]});
        metrics.push_back({"tau_h_row." + n + ".survlime", "row" + std::to_string(i), std::nullopt, ds.tau_survlime[i]});
      }
      append(metrics, curve_records("sigma." + n + ".survshap_rsf", "", ds.sigma_survshap_rsf));
      append(metrics, curve_records("sigma." + n + ".survlime_rsf", "", ds.sigma_survlime_rsf));
      fraction_records(metrics, "rank_fraction." + n + ".rsf.survshap", ds.rsf_survshap_rankings, names);
      fraction_records(metrics, "rank_fraction." + n + ".rsf.survlime", ds.rsf_survlime_rankings, names);
      ranking_records(metrics, "permutation_importance." + n + ".rsf", ds.rsf_permutation, names);
    }
    write_output(manifest, path("table2.csv"), format_metrics(table, comments));
  } else if (options.experiment == "exp3") {
    Exp3Options o;
    o.path = options.data;
    if (!options.features.empty()) o.features = options.features;
    o.seed = global.seed;
    o.threads = global.threads;
    o.forest = forest;
    o.permutation_repeats = options.permutation_repeats;
    if (!options.data.empty()) manifest.inputs.push_back(options.data);
    const Exp3Report r = run_exp3(o, progress_line);
    const auto& names = r.data.feature_names();
    for (const auto& m : r.models) {
      metrics.push_back({"ibs." + m.model, "", std::nullopt, m.ibs});
      append(metrics, curve_records("brier." + m.model, "", m.brier));
      ranking_records(metrics, "permutation_importance." + m.model, m.permutation, names);
      fraction_records(metrics, "rank_fraction." + m.model + ".survshap", m.survshap_rankings, names);
      fraction_records(metrics, "rank_fraction." + m.model + ".survlime", m.survlime_rankings, names);
      metrics.push_back({"top2_agreement." + m.model, "", std::nullopt, m.top2_agreement});
      std::vector<ExplanationRecord> records;
      for (std::size_t i = 0; i < m.explanations.size(); ++i) {
        append_records(records, i, m.explanations[i], m.explanations[i].grid().back());
      }
      write_output(manifest, path("explanations_" + m.model + ".csv"), format_explanations(records, comments));
    }
  } else {
    throw ValidationError("unknown experiment '" + options.experiment + "' (expected exp1, exp2 or exp3)");
  }
  write_output(manifest, path("metrics.csv"), format_metrics(metrics, comments));
  for (const auto& rec : metrics) {
    const bool summary = rec.metric.rfind("ibs.", 0) == 0 || rec.metric.rfind("csp.", 0) == 0 ||
                         rec.metric.rfind("tau_h.", 0) == 0 || rec.metric.rfind("top2_agreement.", 0) == 0;
    if (summary) std::cout << rec.metric << (rec.variable.empty() ? "" : " " + rec.variable) << " = " << cell(rec.value) << "\n";
  }
}

void cmd_plotdata(const PlotOptions& options, const GlobalOptions& global, RunManifest& manifest) {
  require_out(global, "path of the plot table to write");
  const auto& kinds = plot_kinds();
  if (std::find(kinds.begin(), kinds.end(), options.kind) == kinds.end()) {
    std::string list;
    for (const auto& k : kinds) list += (list.empty() ? "" : ", ") + k;
    throw ValidationError("unknown plot kind '" + options.kind + "'; supported kinds: " + list);
  }
  if (options.inputs.empty()) throw ValidationError("--input is required");
  std::vector<std::array<std::string, 4>> rows;
  for (const auto& input : options.inputs) {
    const std::string text = read_text_file(input);
    manifest.inputs.push_back(input);
    if (options.kind == "curves" || options.kind == "prediction") {
      const auto records = parse_explanations(text, input);
      const std::string group = std::to_string(options.observation);
      bool found = false;
      for (const auto& r : records) {
        if (r.observation != options.observation || !r.time) continue;
        if (options.kind == "curves" && r.record == "phi") {
          const std::optional<double> y = options.normalized ? r.normalized : std::optional<double>(r.value);
          if (options.normalized && !y) throw ValidationError(input + ": no normalized attributions");
          rows.push_back({r.variable, format_double(*r.time), format_double(*y), group});
          found = true;
        } else if (options.kind == "prediction" && (r.record == "baseline" || r.record == "prediction")) {
          rows.push_back({r.record, format_double(*r.time), format_double(r.value), group});
          found = true;
        }
      }
      if (!found) throw ValidationError(input + ": no curves for observation " + group);
    } else if (options.kind == "ranking") {
      std::map<std::size_t, std::vector<double>> scores;
      std::vector<std::string> names;
      for (const auto& r : parse_explanations(text, input)) {
        if (r.record != "rank") continue;
        auto it = std::find(names.begin(), names.end(), r.variable);
        if (it == names.end()) {
          names.push_back(r.variable);
          it = names.end() - 1;
        }
        auto& s = scores[r.observation];
        const std::size_t d = static_cast<std::size_t>(it - names.begin());
        if (s.size() <= d) s.resize(d + 1);
        s[d] = -r.value;  // rank 1 must sort first
      }
      if (scores.empty()) throw ValidationError(input + ": no rank records");
      std::vector<ImportanceRanking> rankings;
      for (auto& [obs, s] : scores) {
        if (s.size() != names.size()) {
          throw ValidationError(input + ": observation " + std::to_string(obs) + " lacks some ranks");
        }
        rankings.push_back(ImportanceRanking::from_scores(s));
      }
      const auto fractions = rank_distribution(rankings);
      for (std::size_t r = 0; r < fractions.size(); ++r) {
        for (std::size_t d = 0; d < names.size(); ++d) {
          rows.push_back({names[d], std::to_string(r + 1), format_double(fractions[r][d]), stem(input)});
        }
      }
    } else {
      std::string prefix = options.kind == "metric" ? options.metric : options.kind;
      if (prefix == "nrmse") prefix = "normalized_rmse";
      if (prefix.empty()) throw ValidationError("--metric is required for the metric plot kind");
      bool found = false;
      for (const auto& r : parse_metrics(text, input)) {
        const bool match = options.kind == "metric" ? r.metric == prefix
                                                    : r.metric == prefix || r.metric.rfind(prefix + ".", 0) == 0;
        if (!match || !r.value) continue;
        rows.push_back({r.variable.empty() ? r.metric : r.variable, cell(r.time), format_double(*r.value), r.metric});
        found = true;
      }
      if (!found) throw ValidationError(input + ": no records for metric '" + prefix + "'");
    }
  }
  write_output(manifest, global.out, plot_table(rows));
}

}  // namespace survshap::cli
