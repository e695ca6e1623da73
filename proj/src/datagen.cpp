#include "survshap/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

double baseline_hazard_exp1(double t) {
  if (!(t > 0.0)) throw ValidationError("EXP1 hazard is defined for t > 0 only");
  const double r = std::sqrt(t);
  return std::exp(-17.8 + 6.5 * t - 11.0 * r * std::log(t) + 9.5 * r);
}

double hazard_exp1(double t, std::span<const double> x) {
  if (x.size() != 5) throw ValidationError("EXP1 hazard expects 5 covariates");
  const double time_effect = -0.9 + 0.1 * t + 0.9 * std::log(t);
  return baseline_hazard_exp1(t) *
         std::exp(time_effect * x[0] + 0.5 * x[1] - 0.2 * x[2] + 0.1 * x[3] + 1e-6 * x[4]);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // Tolerance is relative once the integral exceeds 1.
  const double scaled = tol * std::max(1.0, std::abs(whole));
  return simpson_step(f, a, fa, b, fb, m, fm, whole, scaled, max_depth);
}

double cumulative_hazard_exp1(double t, std::span<const double> x) {
  if (t <= kExp1Epsilon) return 0.0;
  return adaptive_simpson([&](double s) { return hazard_exp1(s, x); }, kExp1Epsilon, t, 1e-13);
}

double survival_exp1(double t, std::span<const double> x) { return std::exp(-cumulative_hazard_exp1(t, x)); }

double brent_root(const std::function<double(double)>& f, double lo, double hi, double xtol, int max_iter) {
  double a = lo, b = hi, fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw ComputationError("Brent: the interval does not bracket a root");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * 2.220446049250313e-16 * std::abs(b) + 0.5 * xtol;
    const double half = 0.5 * (c - b);
    if (std::abs(half) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc, r = fb / fc;
        p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * half * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (half > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw ComputationError("Brent: no convergence within " + std::to_string(max_iter) + " iterations");
}

double invert_survival(const std::function<double(double)>& survival, double u, double horizon, double eps) {
  if (!(u > 0.0 && u < 1.0)) throw ValidationError("invert_survival needs u in (0, 1)");
  auto g = [&](double t) { return survival(t) - u; };
  double hi = horizon;
  if (g(hi) > 0.0) {
    hi *= 2.0;
    if (g(hi) > 0.0) {
      throw ComputationError("survival stays above u = " + std::to_string(u) + " up to t = " + std::to_string(hi));
    }
  }
  return brent_root(g, eps, hi);
}

Exp1Sample generate_exp1_sample(const Exp1Config& config) {
  if (config.n == 0) throw ValidationError("EXP1 needs n >= 1");
  const std::size_t n = config.n;
  std::vector<double> features(n * 5), times(n), latent(n), uniforms(n), left(n), right(n);
  std::vector<std::uint8_t> events(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    auto rng = substream(config.seed, i);
    std::bernoulli_distribution coin(0.5);
    std::span<double> x(features.data() + 5 * i, 5);
    x[0] = coin(rng) ? 1.0 : 0.0;
    x[1] = coin(rng) ? 1.0 : 0.0;
    x[2] = std::normal_distribution<double>(10.0, 2.0)(rng);
    x[3] = std::normal_distribution<double>(20.0, 4.0)(rng);
    x[4] = std::normal_distribution<double>(0.0, 1.0)(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = 0.0;
    while (u <= 0.0) u = unit(rng);
    const double cl = std::uniform_real_distribution<double>(config.left_censor_lo, config.left_censor_hi)(rng);
    const double cr = std::uniform_real_distribution<double>(config.right_censor_lo, config.right_censor_hi)(rng);
    const std::span<const double> cx = x;
    const double t = invert_survival([&](double s) { return survival_exp1(s, cx); }, u);
    latent[i] = t;
    uniforms[i] = u;
    left[i] = cl;
    right[i] = cr;
    times[i] = std::min({t, cl, cr});
    events[i] = t <= std::min(cl, cr) ? 1 : 0;
  });
  return Exp1Sample{SurvivalDataset({"x1", "x2", "x3", "x4", "x5"}, std::move(features), std::move(times),
                                    std::move(events)),
                    std::move(latent), std::move(uniforms), std::move(left), std::move(right)};
}

SurvivalDataset generate_exp1(const Exp1Config& config) { return generate_exp1_sample(config).data; }

SphereConfig SphereConfig::dataset0() {
  SphereConfig c;
  c.center = {0.0, 0.0, 0.0, 0.0, 0.0};
  c.coefficients = {1e-6, 0.1, -0.15, 1e-6, 1e-6};
  return c;
}

SphereConfig SphereConfig::dataset1() {
  SphereConfig c;
  c.center = {4.0, -8.0, 2.0, 4.0, 2.0};
  c.coefficients = {1e-6, -0.15, 1e-6, 1e-6, -0.1};
  return c;
}

double weibull_time(double u, double lambda, double shape, double linear_predictor) {
  if (!(u > 0.0 && u <= 1.0)) throw ValidationError("Weibull inversion needs u in (0, 1]");
  return std::pow(-std::log(u) / (lambda * std::exp(linear_predictor)), 1.0 / shape);
}

SurvivalDataset generate_sphere_dataset(const SphereConfig& config) {
  if (config.n == 0) throw ValidationError("sphere dataset needs n >= 1");
  if (!(config.radius > 0.0 && config.lambda > 0.0 && config.shape > 0.0)) {
    throw ValidationError("sphere dataset needs radius, lambda and shape > 0");
  }
  if (!(config.event_probability >= 0.0 && config.event_probability <= 1.0)) {
    throw ValidationError("event probability must lie in [0, 1]");
  }
  const std::size_t n = config.n;
  std::vector<double> features(n * 5), times(n);
  std::vector<std::uint8_t> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = substream(config.seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 5> dir{};
    double norm = 0.0;
    while (!(norm > 0.0)) {
      norm = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    double lp = 0.0;
    for (std::size_t d = 0; d < 5; ++d) {
      const double v = config.center[d] + config.radius * dir[d] / norm;
      features[5 * i + d] = v;
      lp += config.coefficients[d] * v;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = 1.0 - unit(rng);  // (0, 1]
    times[i] = weibull_time(u, config.lambda, config.shape, lp);
    events[i] = std::bernoulli_distribution(config.event_probability)(rng) ? 1 : 0;
  }
  return SurvivalDataset({"x1", "x2", "x3", "x4", "x5"}, std::move(features), std::move(times), std::move(events));
}

TrainTest split_train_test(const SurvivalDataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must lie in (0, 1)");
  const std::size_t n = data.rows();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) throw ValidationError("split leaves an empty part");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = substream(seed, 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return TrainTest{data.subset(train), data.subset(test)};
}

const std::vector<std::string>& heart_failure_columns() {
  static const std::vector<std::string> columns = {
      "age",       "anaemia",         "creatinine_phosphokinase", "diabetes", "ejection_fraction",
      "high_blood_pressure", "platelets", "serum_creatinine", "serum_sodium", "sex", "smoking"};
  return columns;
}

std::vector<std::string> default_heart_failure_features() {
  return {"age",       "anaemia",          "creatinine_phosphokinase", "ejection_fraction", "high_blood_pressure",
          "platelets", "serum_creatinine", "serum_sodium"};
}

SurvivalDataset parse_heart_failure(const std::string& text, const std::vector<std::string>& features,
                                    const std::string& source) {
  if (features.empty()) throw ValidationError(source + ": the feature selection is empty");
  std::set<std::string> seen;
  for (const auto& f : features) {
    if (!seen.insert(f).second) throw ValidationError(source + ": feature '" + f + "' is selected twice");
  }
  const CsvTable table = parse_csv(text, source);
  if (table.rows.empty()) throw ValidationError(source + ": no data rows");
  const std::size_t time_col = table.require_column("time");
  std::optional<std::size_t> event_col = table.find_column("event");
  if (!event_col) event_col = table.find_column("DEATH_EVENT");
  if (!event_col) throw ValidationError(source + ": missing required column 'event' (or 'DEATH_EVENT')");
  std::vector<std::size_t> cols;
  for (const auto& f : features) cols.push_back(table.require_column(f));

  const std::set<std::string> binary = {"anaemia", "diabetes", "high_blood_pressure", "sex", "smoking"};
  auto fail = [&](std::size_t r, std::size_t c, const std::string& why) {
    throw ValidationError(source + ": line " + std::to_string(table.line_numbers[r]) + ", column '" +
                          table.header[c] + "': " + why);
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const std::string& name = table.header[c];
      const bool known = binary.count(name) || name == "ejection_fraction" || name == "age";
      if (!known && c != *event_col) continue;
      const double v = table.number(r, c);
      if ((binary.count(name) || c == *event_col) && v != 0.0 && v != 1.0) fail(r, c, "expected 0 or 1");
      if (name == "ejection_fraction" && !(v > 0.0 && v <= 100.0)) fail(r, c, "ejection fraction outside (0, 100]");
      if (name == "age" && !(v > 0.0)) fail(r, c, "age must be positive");
    }
  }

  std::vector<double> x;
  std::vector<double> times;
  std::vector<std::uint8_t> events;
  x.reserve(table.rows.size() * cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c : cols) x.push_back(table.number(r, c));
    const double t = table.number(r, time_col);
    if (!(t >= 0.0)) fail(r, time_col, "time must be non-negative");
    times.push_back(t);
    events.push_back(table.number(r, *event_col) != 0.0 ? 1 : 0);
  }
  return SurvivalDataset(features, std::move(x), std::move(times), std::move(events));
}

SurvivalDataset load_heart_failure(const std::string& path, const std::vector<std::string>& features) {
  return parse_heart_failure(read_text_file(path), features, path);
}

}  // namespace survshap
