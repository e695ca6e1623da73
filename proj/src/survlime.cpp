#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "survshap/error.hpp"
#include "survshap/explain.hpp"

namespace survshap {

namespace {
constexpr double kChfFloor = 1e-12;
}

StepCurve SurvLimeResult::surrogate_survival(std::span<const double> x) const {
  if (x.size() != coefficients.size()) throw ValidationError("surrogate input has the wrong width");
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) lp += coefficients[d] * x[d];
  const double r = std::min(std::exp(lp), 1e300);
  std::vector<double> h(baseline_chf.values().begin(), baseline_chf.values().end());
  for (double& v : h) v *= r;
  return chf_to_survival(StepCurve(baseline_chf.grid(), std::move(h), CurveKind::cumulative_hazard));
}

SurvLimeResult survlime(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& dataset,
                        const SurvLimeOptions& options) {
  const std::size_t p = x.size();
  if (p != model.num_features() || dataset.cols() != p) throw ValidationError("SurvLIME: width mismatch");
  if (options.n_neighbors < p + 1) {
    throw ValidationError("SurvLIME needs n_neighbors >= p + 1 (" + std::to_string(p + 1) + ")");
  }
  if (!(options.scale > 0.0)) throw ValidationError("SurvLIME neighbour scale must be > 0");

  std::vector<double> sd(p);
  for (std::size_t d = 0; d < p; ++d) {
    const std::vector<double> col = dataset.column(d);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    sd[d] = std::sqrt(ss / static_cast<double>(col.size()));
    if (!(sd[d] > 0.0)) sd[d] = 1.0;
  }

  SurvLimeOptions resolved = options;
  if (resolved.bandwidth <= 0.0) resolved.bandwidth = 2.0 * options.scale * std::sqrt(static_cast<double>(p));

  const TimeGrid& grid = model.event_grid();
  const std::size_t m = grid.size();
  std::vector<double> h0 = nelson_aalen(dataset).sample(grid);
  std::size_t clamped = 0;
  std::vector<double> log_h0(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (h0[j] < kChfFloor) ++clamped;
    log_h0[j] = std::log(std::max(h0[j], kChfFloor));
  }
  std::vector<double> segment(m, 0.0);
  for (std::size_t j = 0; j + 1 < m; ++j) segment[j] = grid[j + 1] - grid[j];

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  std::vector<Eigen::VectorXd> points;
  std::vector<std::vector<double>> targets;   // ln H - ln H0
  std::vector<std::vector<double>> weights;   // kernel * segment * curvature^2
  std::vector<double> neighbour(p), chf(m);
  for (std::size_t k = 0; k < options.n_neighbors; ++k) {
    double dist2 = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      const double z = options.scale * noise(rng);
      neighbour[d] = x[d] + z * sd[d];
      dist2 += z * z;
    }
    const double u = std::sqrt(dist2) / resolved.bandwidth;
    const double kernel = u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    if (kernel == 0.0) continue;
    model.cumulative_hazard_into(neighbour, chf);
    Eigen::VectorXd point = Eigen::Map<const Eigen::VectorXd>(neighbour.data(), static_cast<Eigen::Index>(p));
    std::vector<double> target(m), weight(m);
    double total = 0.0, weighted_target = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (chf[j] < kChfFloor) ++clamped;
      const double h = std::max(chf[j], kChfFloor);
      target[j] = std::log(h) - log_h0[j];
      weight[j] = kernel * segment[j] * h * h;
      total += weight[j];
      weighted_target += weight[j] * target[j];
    }
    normal.noalias() += total * point * point.transpose();
    rhs.noalias() += weighted_target * point;
    points.push_back(std::move(point));
    targets.push_back(std::move(target));
    weights.push_back(std::move(weight));
  }
  if (points.size() < p) {
    throw ComputationError("SurvLIME: only " + std::to_string(points.size()) +
                           " neighbours fell inside the kernel bandwidth");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(largest > 0.0) || eig.eigenvalues().minCoeff() <= 1e-14 * largest) {
    throw ComputationError("SurvLIME: singular normal equations (neighbourhood or CHF weights are degenerate)");
  }
  const Eigen::VectorXd b = normal.ldlt().solve(rhs);

  double loss = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double fit = b.dot(points[k]);
    for (std::size_t j = 0; j < m; ++j) loss += weights[k][j] * (targets[k][j] - fit) * (targets[k][j] - fit);
  }

  return SurvLimeResult{std::vector<double>(b.data(), b.data() + b.size()),
                        std::vector<double>(x.begin(), x.end()),
                        resolved,
                        loss,
                        clamped,
                        StepCurve(grid, std::move(h0), CurveKind::cumulative_hazard)};
}

ImportanceRanking survlime_ranking(const SurvLimeResult& result, std::span<const double> x) {
  if (x.size() != result.coefficients.size()) throw ValidationError("ranking input has the wrong width");
  std::vector<double> scores(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) scores[d] = std::abs(x[d] * result.coefficients[d]);
  return ImportanceRanking::from_scores(std::move(scores));
}

}  // namespace survshap
