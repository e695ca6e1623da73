#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli.hpp"
#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/parallel.hpp"
#include "survshap/report.hpp"

#ifndef SURVSHAP_VERSION
#define SURVSHAP_VERSION "0.0.0"
#endif

using namespace survshap;
using namespace survshap::cli;

namespace {

void add_forest_options(CLI::App* cmd, ForestOptions& forest) {
  cmd->add_option("--trees", forest.n_trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--min-leaf", forest.min_leaf, "Minimum rows per leaf")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--max-features", forest.max_features, "Features tried per split (0: floor(sqrt(p)))")
      ->capture_default_str();
  cmd->add_option("--max-depth", forest.max_depth, "Tree depth limit (0: none)")->capture_default_str();
}

void add_survlime_options(CLI::App* cmd, SurvLimeOptions& lime) {
  cmd->add_option("--neighbors", lime.n_neighbors, "SurvLIME neighbourhood size")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--scale", lime.scale, "SurvLIME neighbour sd per standardised feature")->capture_default_str();
  cmd->add_option("--bandwidth", lime.bandwidth, "SurvLIME kernel radius (0: 2 * scale * sqrt(p))")
      ->capture_default_str();
}

// Bundles the metric table and the manifest into one JSON report.
void write_report_bundle(const std::string& dir, RunManifest& manifest) {
  const std::string metrics_path = (std::filesystem::path(dir) / "metrics.csv").string();
  const std::string path = (std::filesystem::path(dir) / "report.json").string();
  manifest.outputs.push_back(path);
  nlohmann::ordered_json j;
  j["manifest"] = nlohmann::ordered_json::parse(manifest.to_json());
  auto& rows = j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& r : parse_metrics(read_text_file(metrics_path), metrics_path)) {
    nlohmann::ordered_json row;
    row["metric"] = r.metric;
    row["variable"] = r.variable;
    row["time"] = r.time ? nlohmann::ordered_json(*r.time) : nlohmann::ordered_json();
    row["value"] = r.value ? nlohmann::ordered_json(*r.value) : nlohmann::ordered_json();
    rows.push_back(std::move(row));
  }
  write_text_file(path, j.dump(2) + "\n");
}

std::string config_value(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void config_lines(const CLI::App& app, std::string& out) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "version" || name == "config" || !opt->get_configurable()) continue;
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      if (opt->get_default_str().empty()) continue;
      values.push_back(opt->get_default_str());
    }
    out += name + "=";
    if (values.size() == 1 && opt->get_expected_max() <= 1) {
      out += config_value(values.front());
    } else {
      out += "[";
      for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + config_value(values[i]);
      out += "]";
    }
    out += "\n";
  }
}

// Options of the run in config-file syntax: globals, then the subcommand's
// section. Passing it back through --config replays the run.
std::string resolved_config(const CLI::App& app, const CLI::App& command) {
  std::string out;
  config_lines(app, out);
  out += "[" + command.get_name() + "]\n";
  config_lines(command, out);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SurvSHAP(t): time-dependent explanations of survival models", "survshap"};
  app.set_version_flag("--version", SURVSHAP_VERSION);
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  GlobalOptions global;
  global.threads = default_threads();
  app.add_option("--seed", global.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", global.out, "Output file, or output directory for reproduce");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic or converted dataset");
  generate->add_option("--kind", gen.kind, "Dataset kind")
      ->capture_default_str()
      ->check(CLI::IsMember({"exp1", "dataset0", "dataset1", "heart-failure"}));
  generate->add_option("--n", gen.n, "Rows")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--left-censor-lo", gen.left_censor_lo, "exp1: lower bound of C_l")->capture_default_str();
  generate->add_option("--left-censor-hi", gen.left_censor_hi, "exp1: upper bound of C_l")->capture_default_str();
  generate->add_option("--right-censor-lo", gen.right_censor_lo, "exp1: lower bound of C_r")->capture_default_str();
  generate->add_option("--right-censor-hi", gen.right_censor_hi, "exp1: upper bound of C_r")->capture_default_str();
  generate->add_option("--latent-out", gen.latent_out, "exp1: also write latent times and uniforms here");
  generate->add_option("--center", gen.center, "sphere: centre (5 values)")->expected(5);
  generate->add_option("--coefficients", gen.coefficients, "sphere: Cox coefficients (5 values)")->expected(5);
  generate->add_option("--radius", gen.radius, "sphere: radius override");
  generate->add_option("--lambda", gen.lambda, "sphere: Weibull scale override");
  generate->add_option("--shape", gen.shape, "sphere: Weibull shape override");
  generate->add_option("--event-probability", gen.event_probability, "sphere: event probability override");
  generate->add_option("--source", gen.source, "heart-failure: source CSV");
  generate->add_option("--features", gen.features, "heart-failure: feature columns")->delimiter(',');

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Cox or random survival forest model");
  fit_cmd->add_option("--model", fit.model, "Model kind")->capture_default_str()->check(CLI::IsMember({"cph", "rsf"}));
  fit_cmd->add_option("--data", fit.data, "Training dataset");
  fit_cmd->add_option("--test-fraction", fit.test_fraction, "Hold out this share for the printed IBS (0: in-sample)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.9));
  fit_cmd->add_option("--cox-max-iter", fit.cox_max_iter, "Newton iterations")->capture_default_str();
  fit_cmd->add_option("--cox-tol", fit.cox_tol, "Gradient tolerance")->capture_default_str();
  add_forest_options(fit_cmd, fit.forest);

  ExplainOptions ex;
  auto* explain = app.add_subcommand("explain", "Explain observations with SurvSHAP(t) or SurvLIME");
  explain->add_option("--model", ex.model, "Model file");
  explain->add_option("--data", ex.data, "Dataset holding the observations");
  explain->add_option("--background", ex.background, "Background / neighbourhood dataset (default: --data)");
  explain->add_option("--rows", ex.rows, "Observations: all, N, a:b or a comma list")->capture_default_str();
  explain->add_option("--method", ex.method, "Estimator")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "sampling", "kernel", "survlime"}));
  explain->add_option("--permutations", ex.permutations, "sampling: permutations")->capture_default_str();
  explain->add_option("--coalitions", ex.coalitions, "kernel: sampled coalitions above 13 features")
      ->capture_default_str();
  explain->add_option("--background-cap", ex.background_cap, "Subsample the background (0: all rows)")
      ->capture_default_str();
  explain->add_option("--psi-t-max", ex.psi_t_max, "Upper time of the aggregated importance (0: last grid time)")
      ->capture_default_str();
  add_survlime_options(explain, ex.survlime);

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Brier scores, permutation importance and explanation metrics");
  evaluate->add_option("--model", ev.model, "Model file");
  evaluate->add_option("--data", ev.data, "Evaluation dataset");
  evaluate->add_option("--explanations", ev.explanations, "SurvSHAP(t) explanation file for sigma and CSP");
  evaluate->add_option("--window-start", ev.window_start, "IBS window start (default: first event time)");
  evaluate->add_option("--window-end", ev.window_end, "IBS window end (default: last event time)");
  evaluate->add_option("--alpha", ev.alpha, "CSP threshold")->capture_default_str();
  evaluate->add_option("--csp-lo", ev.csp_lo, "CSP window start quantile")->capture_default_str();
  evaluate->add_option("--csp-hi", ev.csp_hi, "CSP window end quantile")->capture_default_str();
  evaluate->add_option("--permutation-repeats", ev.permutation_repeats, "Permutation importance repeats (0: skip)")
      ->capture_default_str();

  ReproduceOptions rep;
  auto* reproduce = app.add_subcommand("reproduce", "Run an experiment end to end into --out");
  reproduce->add_option("--experiment", rep.experiment, "Experiment")
      ->capture_default_str()
      ->check(CLI::IsMember({"exp1", "exp2", "exp3"}));
  reproduce->add_option("--data", rep.data, "exp3: heart-failure CSV");
  reproduce->add_option("--features", rep.features, "exp3: feature columns")->delimiter(',');
  reproduce->add_option("--n", rep.n, "exp1/exp2: rows")->capture_default_str();
  reproduce->add_option("--background-cap", rep.background_cap, "Background subsample (0: all rows)")
      ->capture_default_str();
  reproduce->add_option("--reference-observations", rep.reference_observations,
                        "exp1: observations explained with the large reference background (0: skip)")
      ->capture_default_str();
  reproduce->add_option("--reference-background", rep.reference_background, "exp1: reference background rows")
      ->capture_default_str();
  reproduce->add_option("--permutation-repeats", rep.permutation_repeats, "Permutation importance repeats")
      ->capture_default_str();
  reproduce->add_option("--save-explanations", rep.save_explanations, "exp1: explanation curves kept on disk")
      ->capture_default_str();
  reproduce->add_flag("--report-json", rep.report_json, "Also bundle metrics and manifest into report.json");
  add_forest_options(reproduce, rep.forest);

  PlotOptions plot;
  auto* plotdata = app.add_subcommand("plotdata", "Long-format plot tables from explanation or metric files");
  plotdata->add_option("--kind", plot.kind, "Plot kind: curves, prediction, ranking, metric, brier, sigma, nrmse, "
                                            "gt_shapley")
      ->required();
  plotdata->add_option("--input", plot.inputs, "Explanation or metric files");
  plotdata->add_option("--observation", plot.observation, "curves/prediction: observation")->capture_default_str();
  plotdata->add_option("--metric", plot.metric, "metric: exact metric name");
  plotdata->add_flag("--normalized", plot.normalized, "curves: plot normalised attributions");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough()->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* selected = app.get_subcommands().front();
  RunManifest manifest;
  manifest.command = selected->get_name();
  manifest.argv.assign(argv, argv + argc);
  manifest.config = resolved_config(app, *selected);
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.version = SURVSHAP_VERSION;

  const std::map<std::string, std::function<void()>> commands = {
      {"generate", [&] { cmd_generate(gen, global, manifest); }},
      {"fit", [&] { cmd_fit(fit, global, manifest); }},
      {"explain", [&] { cmd_explain(ex, global, manifest); }},
      {"evaluate", [&] { cmd_evaluate(ev, global, manifest); }},
      {"reproduce", [&] { cmd_reproduce(rep, global, manifest); }},
      {"plotdata", [&] { cmd_plotdata(plot, global, manifest); }},
  };

  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    commands.at(manifest.command)();
  } catch (const ValidationError& e) {
    std::cerr << "survshap " << manifest.command << ": " << e.what() << "\n";
    manifest.status = "validation_error";
    manifest.error = e.what();
    code = 2;
  } catch (const ComputationError& e) {
    std::cerr << "survshap " << manifest.command << ": computation failed: " << e.what() << "\n";
    manifest.status = "computation_error";
    manifest.error = e.what();
    code = 3;
  } catch (const std::exception& e) {
    std::cerr << "survshap " << manifest.command << ": " << e.what() << "\n";
    manifest.status = "error";
    manifest.error = e.what();
    code = 3;
  }
  manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (global.out.empty()) return code;
  try {
    const bool directory = manifest.command == "reproduce";
    if (directory && code == 0 && rep.report_json) write_report_bundle(global.out, manifest);
    const std::string path =
        directory ? (std::filesystem::path(global.out) / "manifest.json").string() : global.out + ".manifest.json";
    if (directory) std::filesystem::create_directories(global.out);
    write_text_file(path, manifest.to_json());
  } catch (const std::exception& e) {
    std::cerr << "survshap: cannot write the run manifest: " << e.what() << "\n";
    if (code == 0) code = 2;
  }
  return code;
}
