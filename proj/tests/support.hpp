#pragma once

// Fixtures and independent reference computations shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "survshap/explain.hpp"
#include "survshap/models.hpp"
#include "survshap/survival.hpp"

namespace testing {

using namespace survshap;

inline std::vector<std::string> names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < p; ++d) out.push_back("x" + std::to_string(d + 1));
  return out;
}

/// Cox-style data with hazard exp(b'x) and uniform censoring.
inline SurvivalDataset cox_data(std::size_t n, const std::vector<double>& b, std::uint64_t seed,
                                double censor_max = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t p = b.size();
  std::vector<double> x(n * p), t(n);
  std::vector<std::uint8_t> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lp = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      x[i * p + d] = normal(rng);
      lp += b[d] * x[i * p + d];
    }
    const double latent = -std::log(1.0 - unit(rng)) / std::exp(lp);
    const double censor = censor_max * unit(rng);
    t[i] = std::min(latent, censor);
    e[i] = latent <= censor ? 1 : 0;
  }
  return SurvivalDataset(names(p), std::move(x), std::move(t), std::move(e));
}

/// Survival curve of row z evaluated at every time of `grid`.
inline std::vector<double> predict_on(const SurvivalModel& model, std::span<const double> z, const TimeGrid& grid) {
  return model.predict_survival(z, grid).sample(grid);
}

/// Coalition value straight from its definition: average prediction over the
/// background with features in `mask` taken from x.
inline std::vector<double> coalition_value(const SurvivalModel& model, std::span<const double> x,
                                           const SurvivalDataset& background, const TimeGrid& grid,
                                           std::uint64_t mask) {
  std::vector<double> acc(grid.size(), 0.0);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < background.rows(); ++i) {
    for (std::size_t d = 0; d < x.size(); ++d) z[d] = (mask >> d) & 1U ? x[d] : background.feature(i, d);
    const auto s = predict_on(model, z, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) acc[j] += s[j];
  }
  for (double& v : acc) v /= static_cast<double>(background.rows());
  return acc;
}

/// Shapley values by averaging marginal contributions over all p! orderings.
inline std::vector<std::vector<double>> shapley_by_orderings(const SurvivalModel& model, std::span<const double> x,
                                                             const SurvivalDataset& background, const TimeGrid& grid) {
  const std::size_t p = x.size();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> phi(p, std::vector<double>(grid.size(), 0.0));
  std::size_t count = 0;
  do {
    std::uint64_t mask = 0;
    auto before = coalition_value(model, x, background, grid, mask);
    for (std::size_t d : order) {
      mask |= std::uint64_t{1} << d;
      auto after = coalition_value(model, x, background, grid, mask);
      for (std::size_t j = 0; j < grid.size(); ++j) phi[d][j] += after[j] - before[j];
      before = std::move(after);
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& row : phi) {
    for (double& v : row) v /= static_cast<double>(count);
  }
  return phi;
}

/// Deterministic model whose survival depends on an arbitrary non-additive
/// risk function of the features.
class FormulaModel final : public SurvivalModel {
 public:
  using Risk = double (*)(std::span<const double>);

  FormulaModel(std::size_t p, Risk risk, std::vector<double> grid)
      : names_(names(p)), risk_(risk), grid_(std::move(grid)) {}

  std::string kind() const override { return "formula"; }
  std::size_t num_features() const override { return names_.size(); }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const TimeGrid& event_grid() const override { return grid_; }
  void cumulative_hazard_into(std::span<const double> x, std::span<double> out) const override {
    const double r = std::exp(risk_(x));
    for (std::size_t j = 0; j < grid_.size(); ++j) out[j] = r * (0.1 * grid_[j] + 0.02 * grid_[j] * grid_[j]);
  }

 private:
  std::vector<std::string> names_;
  Risk risk_;
  TimeGrid grid_;
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
