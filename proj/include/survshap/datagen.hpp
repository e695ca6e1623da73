#pragma once

// Synthetic data for the experiments: the EXP1 time-dependent-effect law, the
// Weibull sphere datasets, and ingestion of the heart-failure records.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "survshap/survival.hpp"

namespace survshap {

/// h0(t) = exp(-17.8 + 6.5 t - 11 sqrt(t) ln t + 9.5 sqrt(t)), t > 0.
double baseline_hazard_exp1(double t);

/// h0(t) * exp((-0.9 + 0.1 t + 0.9 ln t) x1 + 0.5 x2 - 0.2 x3 + 0.1 x4 + 1e-6 x5).
double hazard_exp1(double t, std::span<const double> x);

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                        int max_depth = 50);

inline constexpr double kExp1Epsilon = 1e-6;
inline constexpr double kExp1Horizon = 30.0;

/// Numeric cumulative hazard over (kExp1Epsilon, t].
double cumulative_hazard_exp1(double t, std::span<const double> x);
double survival_exp1(double t, std::span<const double> x);

/// Brent's method for a root of f bracketed by [lo, hi].
double brent_root(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-14,
                  int max_iter = 200);

/// t with S(t) = u, searched on [eps, horizon]; the horizon is doubled once
/// when S(horizon) is still above u.
double invert_survival(const std::function<double(double)>& survival, double u, double horizon = kExp1Horizon,
                       double eps = kExp1Epsilon);

struct Exp1Config {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double left_censor_lo = 11.0, left_censor_hi = 16.0;   // C_l ~ U[11, 16]
  double right_censor_lo = 0.0, right_censor_hi = 24.0;  // C_r ~ U[0, 24]
  std::size_t threads = 1;
};

/// Generated EXP1 data plus the latent draws behind each row.
struct Exp1Sample {
  SurvivalDataset data;
  std::vector<double> latent_times;
  std::vector<double> uniforms;
  std::vector<double> left_censor;
  std::vector<double> right_censor;
};

Exp1Sample generate_exp1_sample(const Exp1Config& config);
SurvivalDataset generate_exp1(const Exp1Config& config);

struct SphereConfig {
  std::array<double, 5> center{};
  double radius = 8.0;
  double lambda = 1e-5;
  double shape = 2.0;
  std::array<double, 5> coefficients{};
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double event_probability = 0.9;

  static SphereConfig dataset0();
  static SphereConfig dataset1();
};

/// (-ln u / (lambda exp(lp)))^(1/shape)
double weibull_time(double u, double lambda, double shape, double linear_predictor);

SurvivalDataset generate_sphere_dataset(const SphereConfig& config);

struct TrainTest {
  SurvivalDataset train;
  SurvivalDataset test;
};

/// Seeded split with round(test_fraction * n) test rows; both parts keep the
/// original row order.
TrainTest split_train_test(const SurvivalDataset& data, double test_fraction, std::uint64_t seed);

/// Clinical columns of the 299-patient heart-failure records.
const std::vector<std::string>& heart_failure_columns();
/// age, anaemia, creatinine_phosphokinase, ejection_fraction,
/// high_blood_pressure, platelets, serum_creatinine, serum_sodium.
std::vector<std::string> default_heart_failure_features();

SurvivalDataset parse_heart_failure(const std::string& text, const std::vector<std::string>& features,
                                    const std::string& source = "<memory>");
SurvivalDataset load_heart_failure(const std::string& path,
                                   const std::vector<std::string>& features = default_heart_failure_features());

}  // namespace survshap
