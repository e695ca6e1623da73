#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "survshap/error.hpp"
#include "survshap/kernels.hpp"
#include "survshap/models.hpp"

namespace survshap {

GridProjection::GridProjection(const TimeGrid& native, const TimeGrid& target) : index_(target.size()) {
  identity_ = native == target;
  for (std::size_t i = 0; i < target.size(); ++i) {
    index_[i] = static_cast<std::int64_t>(native.steps_through(target[i])) - 1;
  }
}

void GridProjection::gather(std::span<const double> native, std::span<double> out, double before) const {
  for (std::size_t i = 0; i < index_.size(); ++i) out[i] = index_[i] < 0 ? before : native[index_[i]];
}

void SurvivalModel::check_width(std::span<const double> x) const {
  if (x.size() != num_features()) {
    throw ValidationError("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(num_features()));
  }
}

namespace {
// exp(-H) rounding can break monotonicity by an ulp; restore it.
void enforce_non_increasing(std::span<double> s) {
  double prev = 1.0;
  for (double& v : s) {
    v = std::min(std::max(v, 0.0), prev);
    prev = v;
  }
}
}  // namespace

void SurvivalModel::survival_into(std::span<const double> x, std::span<double> out) const {
  cumulative_hazard_into(x, out);
  kernels::exp_neg_scaled(out, out, 1.0);
  enforce_non_increasing(out);
}

StepCurve SurvivalModel::predict_survival(std::span<const double> x) const {
  check_width(x);
  std::vector<double> s(event_grid().size());
  survival_into(x, s);
  return StepCurve(event_grid(), std::move(s), CurveKind::survival);
}

StepCurve SurvivalModel::predict_survival(std::span<const double> x, const TimeGrid& grid) const {
  StepCurve native = predict_survival(x);
  if (grid == event_grid()) return native;
  return StepCurve(grid, native.sample(grid), CurveKind::survival);
}

StepCurve SurvivalModel::predict_cumulative_hazard(std::span<const double> x) const {
  check_width(x);
  std::vector<double> h(event_grid().size());
  cumulative_hazard_into(x, h);
  return StepCurve(event_grid(), std::move(h), CurveKind::cumulative_hazard);
}

CoxModel::CoxModel(std::vector<std::string> feature_names, std::vector<double> coefficients, std::vector<double> means,
                   StepCurve baseline_chf)
    : names_(std::move(feature_names)),
      coefficients_(std::move(coefficients)),
      means_(std::move(means)),
      baseline_(std::move(baseline_chf)) {
  if (coefficients_.size() != names_.size() || means_.size() != names_.size()) {
    throw ValidationError("Cox model: coefficient, mean and name counts differ");
  }
  for (double b : coefficients_) {
    if (!std::isfinite(b)) throw ValidationError("Cox model: coefficients must be finite");
  }
  if (baseline_.kind() != CurveKind::cumulative_hazard) {
    throw ValidationError("Cox model: baseline must be a cumulative hazard");
  }
}

double CoxModel::linear_predictor(std::span<const double> x) const {
  double lp = 0.0;
  for (std::size_t d = 0; d < coefficients_.size(); ++d) lp += coefficients_[d] * (x[d] - means_[d]);
  return lp;
}

void CoxModel::cumulative_hazard_into(std::span<const double> x, std::span<double> out) const {
  const double r = std::exp(linear_predictor(x));
  const auto h0 = baseline_.values();
  std::copy(h0.begin(), h0.end(), out.begin());
  kernels::scale(out, r);
}

void CoxModel::survival_into(std::span<const double> x, std::span<double> out) const {
  kernels::exp_neg_scaled(out, baseline_.values(), std::exp(linear_predictor(x)));
  enforce_non_increasing(out);
}

namespace {

struct PartialLikelihood {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // negative Hessian
};

// Breslow partial likelihood on the standardised design `z`, rows ordered by
// descending time. `groups` delimits runs of equal time in that order.
PartialLikelihood evaluate(const Eigen::MatrixXd& z, const std::vector<std::uint8_t>& events,
                           const std::vector<std::size_t>& group_ends, const Eigen::VectorXd& beta) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  const Eigen::VectorXd eta = z * beta;
  const double shift = eta.maxCoeff();
  PartialLikelihood out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.information = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  Eigen::Index start = 0;
  for (std::size_t end_u : group_ends) {
    const auto end = static_cast<Eigen::Index>(end_u);
    double d = 0.0;
    Eigen::VectorXd event_sum = Eigen::VectorXd::Zero(p);
    double eta_sum = 0.0;
    for (Eigen::Index i = start; i < end; ++i) {
      const double w = std::exp(eta[i] - shift);
      s0 += w;
      s1.noalias() += w * z.row(i).transpose();
      s2.noalias() += w * z.row(i).transpose() * z.row(i);
      if (events[static_cast<std::size_t>(i)]) {
        d += 1.0;
        event_sum += z.row(i).transpose();
        eta_sum += eta[i];
      }
    }
    if (d > 0.0) {
      const Eigen::VectorXd mean = s1 / s0;
      out.loglik += eta_sum - d * (std::log(s0) + shift);
      out.gradient += event_sum - d * mean;
      out.information += d * (s2 / s0 - mean * mean.transpose());
    }
    start = end;
  }
  (void)n;
  return out;
}

// Cholesky of a symmetric positive definite matrix; names the first
// dimension whose pivot collapses.
Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& a, const std::vector<std::string>& names) {
  const Eigen::Index p = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index j = 0; j < p; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 1e-10 * scale)) {
      throw ComputationError("Cox fit: singular Hessian at dimension " + std::to_string(j) + " ('" +
                             names[static_cast<std::size_t>(j)] + "'); the feature is collinear with earlier ones");
    }
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

}  // namespace

CoxModel CoxModel::fit(const SurvivalDataset& data, const CoxFitOptions& options) {
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  if (data.event_count() == 0) throw ValidationError("Cox fit: dataset has no events");
  if (n <= p) throw ValidationError("Cox fit: need more rows than features");

  std::vector<double> means(p, 0.0), scales(p, 0.0);
  for (std::size_t d = 0; d < p; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.feature(i, d);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data.feature(i, d) - m) * (data.feature(i, d) - m);
    means[d] = m;
    scales[d] = std::sqrt(ss / static_cast<double>(n));
    if (!(scales[d] > 0.0)) {
      throw ComputationError("Cox fit: singular Hessian at dimension " + std::to_string(d) + " ('" +
                             data.feature_names()[d] + "'); the feature is constant");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.time(a) > data.time(b); });
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::uint8_t> events(n);
  std::vector<std::size_t> group_ends;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    for (std::size_t d = 0; d < p; ++d) {
      z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = (data.feature(i, d) - means[d]) / scales[d];
    }
    events[k] = data.event(i) ? 1 : 0;
    if (k + 1 == n || data.time(order[k + 1]) != data.time(i)) group_ends.push_back(k + 1);
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  PartialLikelihood state = evaluate(z, events, group_ends, beta);
  int iter = 0;
  bool converged = false;
  for (; iter <= options.max_iter; ++iter) {
    if (state.gradient.lpNorm<Eigen::Infinity>() <= options.tol) {
      converged = true;
      break;
    }
    if (iter == options.max_iter) break;
    const Eigen::MatrixXd l = cholesky_or_throw(state.information, data.feature_names());
    const Eigen::VectorXd step = l.transpose().triangularView<Eigen::Upper>().solve(
        l.triangularView<Eigen::Lower>().solve(state.gradient));
    double factor = 1.0;
    PartialLikelihood next = evaluate(z, events, group_ends, beta + step);
    // Near the optimum the likelihood change is at rounding level.
    const double slack = 1e-12 * (1.0 + std::abs(state.loglik));
    auto worse = [&](const PartialLikelihood& c) { return !(c.loglik >= state.loglik - slack); };
    int halvings = 0;
    while (worse(next) && halvings < 40) {
      factor *= 0.5;
      next = evaluate(z, events, group_ends, beta + factor * step);
      ++halvings;
    }
    if (worse(next)) break;
    beta += factor * step;
    state = std::move(next);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Cox fit did not converge after " << options.max_iter
        << " iterations; gradient infinity-norm " << state.gradient.lpNorm<Eigen::Infinity>();
    throw ComputationError(msg.str());
  }

  std::vector<double> coefficients(p);
  for (std::size_t d = 0; d < p; ++d) coefficients[d] = beta[static_cast<Eigen::Index>(d)] / scales[d];

  // Breslow baseline on centred features.
  const RiskTable table = risk_table(data);
  std::vector<double> risk(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lp = 0.0;
    for (std::size_t d = 0; d < p; ++d) lp += coefficients[d] * (data.feature(i, d) - means[d]);
    risk[i] = std::exp(lp);
  }
  std::vector<double> h0(table.times.size());
  // Walk times in descending order accumulating the risk-set sum.
  double risk_sum = 0.0;
  std::size_t k = 0;
  for (std::size_t j = table.times.size(); j-- > 0;) {
    while (k < n && data.time(order[k]) >= table.times[j]) risk_sum += risk[order[k++]];
    h0[j] = table.events[j] / risk_sum;
  }
  for (std::size_t j = 1; j < h0.size(); ++j) h0[j] += h0[j - 1];

  CoxModel model(data.feature_names(), std::move(coefficients), std::move(means),
                 StepCurve(build_event_grid(data), std::move(h0), CurveKind::cumulative_hazard));
  model.iterations_ = iter;
  model.loglik_ = state.loglik;
  return model;
}

ImportanceRanking cox_local_ranking(const CoxModel& model, std::span<const double> x) {
  if (x.size() != model.num_features()) throw ValidationError("ranking input has the wrong width");
  std::vector<double> scores(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) scores[d] = std::abs(x[d] * model.coefficients()[d]);
  return ImportanceRanking::from_scores(std::move(scores));
}

}  // namespace survshap
