#pragma once

// Subcommands of the `survshap` tool. Each command reads its inputs, writes
// its outputs through a single writer and records both in the run manifest.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "survshap/explain.hpp"
#include "survshap/models.hpp"

namespace survshap::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

/// `all`, a row index `7`, a half-open range `10:20`, or a comma list of
/// those (`0,3,10:12`). Indices are 0-based and checked against `rows`.
std::vector<std::size_t> parse_selector(const std::string& text, std::size_t rows);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config;  // resolved options in config-file syntax
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version;
  double duration_seconds = 0.0;
  std::string status = "ok";
  std::string error;

  std::string to_json() const;
};

struct GenerateOptions {
  std::string kind = "exp1";  // exp1, dataset0, dataset1, heart-failure
  std::size_t n = 1000;
  double left_censor_lo = 11.0, left_censor_hi = 16.0;
  double right_censor_lo = 0.0, right_censor_hi = 24.0;
  std::vector<double> center, coefficients;  // sphere overrides; empty keeps the preset
  double radius = 0.0, lambda = 0.0, shape = 0.0, event_probability = -1.0;  // sphere overrides when set
  std::string latent_out;  // exp1: latent times and uniforms
  std::string source;      // heart-failure CSV
  std::vector<std::string> features;
};

struct FitOptions {
  std::string model = "rsf";
  std::string data;
  double test_fraction = 0.0;
  ForestOptions forest;
  int cox_max_iter = 100;
  double cox_tol = 1e-9;
};

struct ExplainOptions {
  std::string model;
  std::string data;
  std::string background;  // defaults to `data`
  std::string rows = "0";
  std::string method = "kernel";  // exact, sampling, kernel, survlime
  std::size_t permutations = 1000;
  std::size_t coalitions = 4096;
  std::size_t background_cap = 0;
  double psi_t_max = 0.0;  // 0: last grid time
  SurvLimeOptions survlime;
};

struct EvaluateOptions {
  std::string model;
  std::string data;
  std::string explanations;
  double window_start = 0.0, window_end = 0.0;  // both 0: first to last event time
  double alpha = 0.05;
  double csp_lo = 0.1, csp_hi = 0.9;  // quantiles of the observed times
  std::size_t permutation_repeats = 0;
};

struct ReproduceOptions {
  std::string experiment = "exp1";
  std::string data;  // exp3
  std::vector<std::string> features;
  std::size_t n = 1000;
  std::size_t background_cap = 0;
  ForestOptions forest;
  std::size_t reference_observations = 100;
  std::size_t reference_background = 10000;
  std::size_t permutation_repeats = 10;
  std::size_t save_explanations = 10;
  bool report_json = false;
};

struct PlotOptions {
  std::string kind;
  std::vector<std::string> inputs;
  std::size_t observation = 0;
  std::string metric;
  bool normalized = false;
};

const std::vector<std::string>& plot_kinds();

void cmd_generate(const GenerateOptions& options, const GlobalOptions& global, RunManifest& manifest);
void cmd_fit(const FitOptions& options, const GlobalOptions& global, RunManifest& manifest);
void cmd_explain(const ExplainOptions& options, const GlobalOptions& global, RunManifest& manifest);
void cmd_evaluate(const EvaluateOptions& options, const GlobalOptions& global, RunManifest& manifest);
void cmd_reproduce(const ReproduceOptions& options, const GlobalOptions& global, RunManifest& manifest);
void cmd_plotdata(const PlotOptions& options, const GlobalOptions& global, RunManifest& manifest);

}  // namespace survshap::cli
