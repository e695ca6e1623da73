#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "survshap/error.hpp"

using namespace survshap;
using testing::max_abs_diff;

namespace {

double interacting(std::span<const double> x) { return 0.6 * x[0] - 0.4 * x[1] * x[2] + 0.3 * std::sin(x[3]); }
double ignores_second(std::span<const double> x) { return 0.7 * x[0] + 0.2 * x[2] * x[0] - 0.5 * x[3]; }
double symmetric_pair(std::span<const double> x) { return 0.5 * (x[0] + x[1]) + 0.3 * x[0] * x[1] - 0.2 * x[2]; }
double wide(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += (d % 3 == 0 ? 0.2 : -0.1) * x[d] + 0.05 * x[d] * x[(d + 1) % x.size()];
  return s;
}

SurvivalDataset gaussian_rows(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n * p), t(n, 1.0);
  for (double& v : x) v = normal(rng);
  for (std::size_t i = 0; i < n; ++i) t[i] = 1.0 + static_cast<double>(i);
  return SurvivalDataset(testing::names(p), std::move(x), std::move(t), std::vector<std::uint8_t>(n, 1));
}

const TimeGrid kGrid(testing::linspace(0.1, 4.0, 25));

}  // namespace

TEST_SUITE("explain") {
  TEST_CASE("exact SurvSHAP(t) equals the average over all orderings") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(6, 4, 1);
    const std::vector<double> x = {0.5, -1.2, 0.8, 2.0};
    const SurvShapResult r = survshap_exact(model, x, bg, kGrid);
    const auto oracle = testing::shapley_by_orderings(model, x, bg, kGrid);
    for (std::size_t d = 0; d < 4; ++d) CHECK(max_abs_diff(r.attributions[d].values(), oracle[d]) < 1e-13);
    CHECK(max_abs_diff(r.baseline.values(), testing::coalition_value(model, x, bg, kGrid, 0)) < 1e-14);
    CHECK(r.evaluations == 16);
  }

  TEST_CASE("kernel SurvSHAP(t) is the exact Shapley value") {
    const SurvivalDataset train = testing::cox_data(150, {0.6, -0.8, 0.3, 0.0, 0.2}, 5);
    ForestOptions o;
    o.n_trees = 10;
    const CoxModel cox = CoxModel::fit(train);
    const RandomSurvivalForest rsf = RandomSurvivalForest::fit(train, o);
    const SurvivalDataset bg = select_background(train, 30, 2);
    for (const SurvivalModel* m : {static_cast<const SurvivalModel*>(&cox), static_cast<const SurvivalModel*>(&rsf)}) {
      for (std::size_t i : {0, 7}) {
        const SurvShapResult exact = survshap_exact(*m, train.row(i), bg, m->event_grid());
        const SurvShapResult kernel = survshap_kernel(*m, train.row(i), bg, m->event_grid());
        for (std::size_t d = 0; d < 5; ++d) {
          CHECK(max_abs_diff(exact.attributions[d].values(), kernel.attributions[d].values()) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("every estimator is locally accurate") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(10, 4, 3);
    const std::vector<double> x = {1.0, 0.3, -0.7, 0.1};
    for (ShapMethod method : {ShapMethod::exact, ShapMethod::sampling, ShapMethod::kernel}) {
      ShapSettings s;
      s.method = method;
      s.n_permutations = 7;
      const SurvShapResult r = survshap::survshap(model, x, bg, kGrid, s);
      CAPTURE(method_name(method));
      CHECK(r.reconstruction_error() < 1e-12);
    }
  }

  TEST_CASE("sampled coalitions above the enumeration limit keep local accuracy") {
    const testing::FormulaModel model(15, wide, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(4, 15, 8);
    std::vector<double> x(15);
    for (std::size_t d = 0; d < 15; ++d) x[d] = 0.1 * static_cast<double>(d) - 0.6;
    const SurvShapResult r = survshap_kernel(model, x, bg, kGrid, 2000, 3);
    CHECK(r.reconstruction_error() < 1e-9);
    const SurvShapResult again = survshap_kernel(model, x, bg, kGrid, 2000, 3);
    for (std::size_t d = 0; d < 15; ++d) CHECK(r.attributions[d].values()[5] == again.attributions[d].values()[5]);
  }

  TEST_CASE("permutation sampling converges to the exact value") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(8, 4, 4);
    const std::vector<double> x = {-0.4, 1.5, 0.9, -2.0};
    const SurvShapResult exact = survshap_exact(model, x, bg, kGrid);
    const SurvShapResult sampled = survshap_sampling(model, x, bg, kGrid, 3000, 11);
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(max_abs_diff(exact.attributions[d].values(), sampled.attributions[d].values()) < 0.01);
    }
    const SurvShapResult same = survshap_sampling(model, x, bg, kGrid, 3000, 11);
    const SurvShapResult other = survshap_sampling(model, x, bg, kGrid, 3000, 12);
    CHECK(max_abs_diff(same.attributions[1].values(), sampled.attributions[1].values()) == 0.0);
    CHECK(max_abs_diff(other.attributions[1].values(), sampled.attributions[1].values()) > 0.0);
  }

  TEST_CASE("a feature the model ignores gets zero attribution") {
    const testing::FormulaModel model(4, ignores_second, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(9, 4, 6);
    const std::vector<double> x = {1.1, -3.0, 0.4, 0.7};
    const std::vector<double> zero(kGrid.size(), 0.0);
    CHECK(max_abs_diff(survshap_exact(model, x, bg, kGrid).attributions[1].values(), zero) == 0.0);
    CHECK(max_abs_diff(survshap_kernel(model, x, bg, kGrid).attributions[1].values(), zero) < 1e-12);
    CHECK(max_abs_diff(survshap_sampling(model, x, bg, kGrid, 20, 1).attributions[1].values(), zero) == 0.0);
  }

  TEST_CASE("exchangeable features get equal attributions") {
    const testing::FormulaModel model(3, symmetric_pair, testing::linspace(0.1, 4.0, 25));
    // Background closed under swapping the first two columns.
    const SurvivalDataset half = gaussian_rows(5, 3, 7);
    std::vector<double> rows;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto r = half.row(i);
      rows.insert(rows.end(), {r[0], r[1], r[2], r[1], r[0], r[2]});
    }
    const SurvivalDataset bg(testing::names(3), rows, testing::linspace(1, 10, 10), std::vector<std::uint8_t>(10, 1));
    const std::vector<double> x = {0.8, 0.8, -0.5};
    const SurvShapResult exact = survshap_exact(model, x, bg, kGrid);
    const SurvShapResult kernel = survshap_kernel(model, x, bg, kGrid);
    CHECK(max_abs_diff(exact.attributions[0].values(), exact.attributions[1].values()) < 1e-15);
    CHECK(max_abs_diff(kernel.attributions[0].values(), kernel.attributions[1].values()) < 1e-12);
  }

  TEST_CASE("normalised attributions have unit absolute sum") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvShapResult r = survshap_kernel(model, std::vector<double>{0.5, 0.5, -0.5, 1.0}, gaussian_rows(7, 4, 9), kGrid);
    REQUIRE(r.normalized.size() == 4);
    for (std::size_t j = 0; j < kGrid.size(); ++j) {
      double s = 0.0;
      for (const auto& c : r.normalized) s += std::abs(c[j]);
      if (r.zero_total[j]) {
        CHECK(s == 0.0);
      } else {
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("aggregated importance is the integral of |phi| and additive over windows") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvShapResult r = survshap_exact(model, std::vector<double>{0.5, 0.5, -0.5, 1.0}, gaussian_rows(7, 4, 9), kGrid);
    const auto whole = attribution_importance(r, 3.3);
    const auto left = attribution_importance(r, 0.0, 1.7);
    const auto right = attribution_importance(r, 1.7, 3.3);
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(whole[d] == doctest::Approx(integrate_step(r.attributions[d], 0.0, 3.3, Transform::absolute)));
      CHECK(left[d] + right[d] == doctest::Approx(whole[d]).epsilon(1e-12));
    }
    const ImportanceRanking ranking = aggregate_importance(r, 3.3);
    CHECK(ranking.scores == whole);
  }

  TEST_CASE("the exact method refuses large feature counts with guidance") {
    const testing::FormulaModel model(13, wide, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(3, 13, 1);
    try {
      survshap_exact(model, bg.row(0), bg, kGrid);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("12") != std::string::npos);
    }
  }

  TEST_CASE("row explanations do not depend on the thread count") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset data = gaussian_rows(12, 4, 10);
    const std::vector<std::size_t> rows = {0, 3, 5, 11};
    ShapSettings s;
    s.method = ShapMethod::sampling;
    s.n_permutations = 10;
    s.seed = 4;
    const auto one = survshap_rows(model, data, rows, data, kGrid, s, 1);
    const auto four = survshap_rows(model, data, rows, data, kGrid, s, 4);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (std::size_t d = 0; d < 4; ++d) CHECK(max_abs_diff(one[k].attributions[d].values(), four[k].attributions[d].values()) == 0.0);
    }
  }

  TEST_CASE("background selection is seeded and order-preserving") {
    const SurvivalDataset data = gaussian_rows(50, 2, 1);
    const SurvivalDataset a = select_background(data, 10, 3), b = select_background(data, 10, 3);
    CHECK(a.rows() == 10);
    CHECK(std::equal(a.features().begin(), a.features().end(), b.features().begin()));
    for (std::size_t i = 1; i < a.rows(); ++i) CHECK(a.time(i) > a.time(i - 1));
    CHECK(select_background(data, 0, 3).rows() == 50);
    CHECK(select_background(data, 80, 3).rows() == 50);
  }

  TEST_CASE("value function caches coalitions and projects onto the explanation grid") {
    const testing::FormulaModel model(4, interacting, testing::linspace(0.1, 4.0, 25));
    const SurvivalDataset bg = gaussian_rows(5, 4, 2);
    const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
    const TimeGrid coarse({0.05, 1.0, 2.0, 10.0});
    ValueFunction v(model, x, bg, coarse);
    const auto first = v(0b0101);
    CHECK(v(0b0101) == first);
    CHECK(v.evaluations() == 1);
    const auto oracle = testing::coalition_value(model, x, bg, coarse, 0b0101);
    CHECK(max_abs_diff(first, oracle) < 1e-15);
    CHECK(first[0] == 1.0);
    CHECK(max_abs_diff(v(0b1111), v.prediction()) < 1e-15);
  }

  TEST_CASE("Shapley kernel weight") {
    CHECK(shapley_kernel_weight(5, 1) == doctest::Approx(4.0 / (5.0 * 1.0 * 4.0)));
    CHECK(shapley_kernel_weight(5, 2) == doctest::Approx(4.0 / (10.0 * 2.0 * 3.0)));
    CHECK(shapley_kernel_weight(4, 2) == doctest::Approx(3.0 / (6.0 * 4.0)));
  }

  TEST_CASE("method names round-trip") {
    for (ShapMethod m : {ShapMethod::exact, ShapMethod::sampling, ShapMethod::kernel}) CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("lime"), ValidationError);
  }
}

TEST_SUITE("survlime") {
  TEST_CASE("SurvLIME on a Cox model points along its coefficients") {
    const SurvivalDataset train = testing::cox_data(400, {1.2, -0.6, 0.0}, 13);
    const CoxModel cox = CoxModel::fit(train);
    const std::vector<double> x = {1.0, 1.0, 1.0};
    SurvLimeOptions o;
    o.seed = 2;
    const SurvLimeResult r = survlime(cox, x, train, o);
    CHECK(r.clamped == 0);
    CHECK(r.coefficients[0] > 0.5);
    CHECK(r.coefficients[1] < -0.2);
    CHECK(std::abs(r.coefficients[2]) < 0.2);
    CHECK(survlime_ranking(r, x).order == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.options.bandwidth == doctest::Approx(2.0 * 0.1 * std::sqrt(3.0)));
  }

  TEST_CASE("SurvLIME is deterministic per seed") {
    const SurvivalDataset train = testing::cox_data(200, {0.5, -0.5}, 3);
    const CoxModel cox = CoxModel::fit(train);
    SurvLimeOptions o;
    o.seed = 9;
    const auto a = survlime(cox, train.row(0), train, o), b = survlime(cox, train.row(0), train, o);
    CHECK(a.coefficients == b.coefficients);
    o.seed = 10;
    CHECK(survlime(cox, train.row(0), train, o).coefficients != a.coefficients);
  }

  TEST_CASE("surrogate survival follows the fitted Cox form") {
    const SurvivalDataset train = testing::cox_data(200, {0.5, -0.5}, 3);
    const CoxModel cox = CoxModel::fit(train);
    const auto r = survlime(cox, train.row(1), train);
    const StepCurve s = r.surrogate_survival(train.row(1));
    const double lp = r.coefficients[0] * train.feature(1, 0) + r.coefficients[1] * train.feature(1, 1);
    for (std::size_t j = 0; j < s.size(); ++j) CHECK(s[j] == doctest::Approx(std::exp(-r.baseline_chf[j] * std::exp(lp))));
  }

  TEST_CASE("SurvLIME rejects bad options") {
    const SurvivalDataset train = testing::cox_data(100, {0.5, -0.5}, 3);
    const CoxModel cox = CoxModel::fit(train);
    SurvLimeOptions o;
    o.n_neighbors = 1;
    CHECK_THROWS_AS(survlime(cox, train.row(0), train, o), ValidationError);
    o = {};
    o.scale = -1.0;
    CHECK_THROWS_AS(survlime(cox, train.row(0), train, o), ValidationError);
  }
}
