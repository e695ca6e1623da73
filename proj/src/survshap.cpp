#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "survshap/error.hpp"
#include "survshap/explain.hpp"
#include "survshap/kernels.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

const char* method_name(ShapMethod method) {
  switch (method) {
    case ShapMethod::exact:
      return "exact";
    case ShapMethod::sampling:
      return "sampling";
    case ShapMethod::kernel:
      return "kernel";
  }
  return "?";
}

ShapMethod parse_method(const std::string& name) {
  if (name == "exact") return ShapMethod::exact;
  if (name == "sampling") return ShapMethod::sampling;
  if (name == "kernel") return ShapMethod::kernel;
  throw ValidationError("unknown SurvSHAP(t) method '" + name + "' (expected exact, sampling or kernel)");
}

StepCurve SurvShapResult::reconstruction() const {
  std::vector<double> r(baseline.values().begin(), baseline.values().end());
  for (const StepCurve& phi : attributions) kernels::add(r, phi.values());
  return StepCurve(grid(), std::move(r), CurveKind::attribution);
}

double SurvShapResult::reconstruction_error() const {
  const StepCurve r = reconstruction();
  double worst = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) worst = std::max(worst, std::abs(r[j] - prediction[j]));
  return worst;
}

namespace {

void check_inputs(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background) {
  if (x.size() != model.num_features()) throw ValidationError("observation width does not match the model");
  if (background.rows() == 0) throw ValidationError("background sample is empty");
  if (background.cols() != x.size()) throw ValidationError("background width does not match the model");
}

SurvShapResult assemble(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                        ValueFunction& value, std::vector<std::vector<double>> phi, ShapSettings settings) {
  const TimeGrid& grid = value.grid();
  std::vector<StepCurve> curves;
  curves.reserve(phi.size());
  for (auto& v : phi) curves.emplace_back(grid, std::move(v), CurveKind::attribution);
  SurvShapResult result{settings,
                        model.feature_names(),
                        std::vector<double>(x.begin(), x.end()),
                        StepCurve(grid, value(0), CurveKind::survival),
                        StepCurve(grid, value.prediction(), CurveKind::survival),
                        std::move(curves),
                        {},
                        {},
                        background.rows(),
                        0};
  result.evaluations = value.evaluations();
  return normalize_attributions(std::move(result));
}

std::uint64_t full_mask(std::size_t p) { return p == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1; }

}  // namespace

SurvShapResult survshap_exact(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                              const TimeGrid& grid) {
  check_inputs(model, x, background);
  const std::size_t p = x.size();
  if (p > kExactFeatureLimit) {
    throw ValidationError("exact SurvSHAP(t) enumerates 2^p coalitions and is limited to p <= " +
                          std::to_string(kExactFeatureLimit) + " (got p = " + std::to_string(p) +
                          "); use the sampling or kernel method");
  }
  ValueFunction value(model, x, background, grid);
  // |S|! (p-|S|-1)! / p!
  std::vector<double> weight(p);
  for (std::size_t s = 0; s < p; ++s) {
    weight[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(static_cast<double>(p - s)) - std::lgamma(p + 1.0));
  }
  std::vector<std::vector<double>> phi(p, std::vector<double>(grid.size(), 0.0));
  std::vector<double> diff(grid.size());
  const std::uint64_t all = full_mask(p);
  for (std::uint64_t mask = 0; mask <= all; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t d = 0; d < p; ++d) {
      if ((mask >> d) & 1U) continue;
      const auto& with = value(mask | (std::uint64_t{1} << d));
      const auto& without = value(mask);
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = with[j] - without[j];
      kernels::axpy(phi[d], weight[size], diff);
    }
  }
  ShapSettings settings;
  settings.method = ShapMethod::exact;
  return assemble(model, x, background, value, std::move(phi), settings);
}

SurvShapResult survshap_sampling(const SurvivalModel& model, std::span<const double> x,
                                 const SurvivalDataset& background, const TimeGrid& grid, std::size_t n_permutations,
                                 std::uint64_t seed) {
  check_inputs(model, x, background);
  if (n_permutations == 0) throw ValidationError("sampling needs at least one permutation");
  const std::size_t p = x.size();
  ValueFunction value(model, x, background, grid);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> phi(p, std::vector<double>(grid.size(), 0.0));
  for (std::size_t k = 0; k < n_permutations; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    std::uint64_t mask = 0;
    const std::vector<double>* previous = &value(mask);
    for (std::size_t d : order) {
      mask |= std::uint64_t{1} << d;
      const std::vector<double>* current = &value(mask);
      kernels::add(phi[d], *current);
      kernels::axpy(phi[d], -1.0, *previous);
      previous = current;
    }
  }
  for (auto& v : phi) kernels::scale(v, 1.0 / static_cast<double>(n_permutations));
  ShapSettings settings;
  settings.method = ShapMethod::sampling;
  settings.n_permutations = n_permutations;
  settings.seed = seed;
  return assemble(model, x, background, value, std::move(phi), settings);
}

double shapley_kernel_weight(std::size_t p, std::size_t s) {
  if (s == 0 || s >= p) throw ValidationError("Shapley kernel weight is finite only for 0 < s < p");
  const double log_binom = std::lgamma(p + 1.0) - std::lgamma(s + 1.0) - std::lgamma(static_cast<double>(p - s) + 1.0);
  return static_cast<double>(p - 1) / (std::exp(log_binom) * static_cast<double>(s) * static_cast<double>(p - s));
}

namespace {

struct Design {
  std::vector<std::uint64_t> masks;
  std::vector<double> weights;
};

Design enumerate_coalitions(std::size_t p) {
  Design design;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << p); ++mask) {
    design.masks.push_back(mask);
    design.weights.push_back(shapley_kernel_weight(p, static_cast<std::size_t>(std::popcount(mask))));
  }
  return design;
}

// Coalition sizes are drawn in proportion to their total kernel mass, then a
// uniform subset of that size; every draw then carries unit weight.
Design sample_coalitions(std::size_t p, std::size_t count, std::uint64_t seed) {
  std::vector<double> mass(p - 1);
  for (std::size_t s = 1; s < p; ++s) mass[s - 1] = 1.0 / (static_cast<double>(s) * static_cast<double>(p - s));
  std::discrete_distribution<std::size_t> size_law(mass.begin(), mass.end());
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), 0);
  Design design;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = size_law(rng) + 1;
    std::shuffle(features.begin(), features.end(), rng);
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < s; ++i) mask |= std::uint64_t{1} << features[i];
    design.masks.push_back(mask);
    design.weights.push_back(1.0);
  }
  return design;
}

}  // namespace

SurvShapResult survshap_kernel(const SurvivalModel& model, std::span<const double> x,
                               const SurvivalDataset& background, const TimeGrid& grid,
                               std::size_t sampled_coalitions, std::uint64_t seed) {
  check_inputs(model, x, background);
  const std::size_t p = x.size();
  if (p < 2) throw ValidationError("the kernel method needs at least two features; use exact for p = 1");
  const bool enumerate = p <= kKernelEnumerationLimit;
  const Design design = enumerate ? enumerate_coalitions(p) : sample_coalitions(p, sampled_coalitions, seed);

  ValueFunction value(model, x, background, grid);
  const std::size_t m = grid.size();
  const auto rows = static_cast<Eigen::Index>(design.masks.size());
  const auto q = static_cast<Eigen::Index>(p - 1);
  const std::vector<double>& empty = value(0);
  const std::vector<double>& full = value(full_mask(p));

  // Eliminating the last feature through sum(phi) = full - empty leaves an
  // unconstrained weighted regression on the first p-1 features.
  Eigen::MatrixXd a(rows, q);
  Eigen::MatrixXd b(rows, static_cast<Eigen::Index>(m));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::uint64_t mask = design.masks[static_cast<std::size_t>(r)];
    const double root_w = std::sqrt(design.weights[static_cast<std::size_t>(r)]);
    const double last = static_cast<double>((mask >> (p - 1)) & 1U);
    for (Eigen::Index d = 0; d < q; ++d) a(r, d) = root_w * (static_cast<double>((mask >> d) & 1U) - last);
    const std::vector<double>& v = value(mask);
    for (std::size_t j = 0; j < m; ++j) {
      const double delta = full[j] - empty[j];
      b(r, static_cast<Eigen::Index>(j)) = root_w * (v[j] - empty[j] - last * delta);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < q) {
    throw ComputationError("kernel SurvSHAP(t): coalition design has rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(q) + " after eliminating the sum constraint; sample more coalitions");
  }
  const Eigen::MatrixXd solution = qr.solve(b);

  std::vector<std::vector<double>> phi(p, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    double rest = 0.0;
    for (std::size_t d = 0; d + 1 < p; ++d) {
      phi[d][j] = solution(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j));
      rest += phi[d][j];
    }
    phi[p - 1][j] = (full[j] - empty[j]) - rest;
  }
  ShapSettings settings;
  settings.method = ShapMethod::kernel;
  settings.kernel_coalitions = enumerate ? design.masks.size() : sampled_coalitions;
  settings.seed = seed;
  return assemble(model, x, background, value, std::move(phi), settings);
}

SurvShapResult survshap(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                        const TimeGrid& grid, const ShapSettings& settings) {
  switch (settings.method) {
    case ShapMethod::exact:
      return survshap_exact(model, x, background, grid);
    case ShapMethod::sampling:
      return survshap_sampling(model, x, background, grid, settings.n_permutations, settings.seed);
    case ShapMethod::kernel:
      return survshap_kernel(model, x, background, grid, settings.kernel_coalitions, settings.seed);
  }
  throw ValidationError("unknown method");
}

std::vector<SurvShapResult> survshap_rows(const SurvivalModel& model, const SurvivalDataset& targets,
                                          std::span<const std::size_t> rows, const SurvivalDataset& background,
                                          const TimeGrid& grid, const ShapSettings& settings, std::size_t threads) {
  for (std::size_t r : rows) {
    if (r >= targets.rows()) throw ValidationError("observation index " + std::to_string(r) + " is out of range");
  }
  std::vector<std::optional<SurvShapResult>> slots(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    ShapSettings local = settings;
    local.seed = substream(settings.seed, rows[k])();
    slots[k].emplace(survshap(model, targets.row(rows[k]), background, grid, local));
  });
  std::vector<SurvShapResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

SurvShapResult normalize_attributions(SurvShapResult result) {
  const std::size_t m = result.grid().size();
  const std::size_t p = result.num_features();
  std::vector<double> total(m, 0.0);
  for (const StepCurve& phi : result.attributions) {
    for (std::size_t j = 0; j < m; ++j) total[j] += std::abs(phi[j]);
  }
  result.zero_total.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) result.zero_total[j] = total[j] == 0.0 ? 1 : 0;
  result.normalized.clear();
  for (std::size_t d = 0; d < p; ++d) {
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = total[j] == 0.0 ? 0.0 : result.attributions[d][j] / total[j];
    result.normalized.emplace_back(result.grid(), std::move(v), CurveKind::attribution);
  }
  return result;
}

std::vector<double> attribution_importance(const SurvShapResult& result, double t_start, double t_end) {
  std::vector<double> psi;
  psi.reserve(result.num_features());
  for (const StepCurve& phi : result.attributions) psi.push_back(integrate_step(phi, t_start, t_end, Transform::absolute));
  return psi;
}

std::vector<double> attribution_importance(const SurvShapResult& result, double t_max) {
  if (!(t_max >= result.grid().front())) throw ValidationError("t_max must not precede the first grid time");
  return attribution_importance(result, 0.0, t_max);
}

ImportanceRanking aggregate_importance(const SurvShapResult& result, double t_max) {
  return ImportanceRanking::from_scores(attribution_importance(result, t_max));
}

}  // namespace survshap
