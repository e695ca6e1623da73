#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "survshap/error.hpp"
#include "survshap/metrics.hpp"

using namespace survshap;

namespace {

// times 1..6, events 1 0 1 1 0 1 (no ties)
SurvivalDataset six() {
  return SurvivalDataset({"a"}, {0, 0, 0, 0, 0, 0}, {1, 2, 3, 4, 5, 6}, {1, 0, 1, 1, 0, 1});
}

StepCurve constant_survival(double v) { return StepCurve(TimeGrid({0.5}), {v}, CurveKind::survival); }

std::vector<StepCurve> fixed_predictions() {
  return {constant_survival(0.9), constant_survival(0.7), constant_survival(0.5),
          constant_survival(0.4), constant_survival(0.3), constant_survival(0.1)};
}

// Censoring Kaplan-Meier of six(): censored at 2 (5 at risk) and 5 (2 at risk).
double censoring_km(double t) {
  double g = 1.0;
  if (t >= 2.0) g *= 1.0 - 1.0 / 5.0;
  if (t >= 5.0) g *= 1.0 - 1.0 / 2.0;
  return g;
}

double brier_oracle(double t) {
  const SurvivalDataset d = six();
  const auto preds = fixed_predictions();
  double total = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double s = preds[i].at(t);
    if (d.time(i) <= t && d.event(i)) total += s * s / censoring_km(d.time(i));
    if (d.time(i) > t) total += (1 - s) * (1 - s) / censoring_km(t);
  }
  return total / static_cast<double>(d.rows());
}

StepCurve attribution(std::vector<double> times, std::vector<double> values) {
  return StepCurve(TimeGrid(std::move(times)), std::move(values), CurveKind::attribution);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("IPCW Brier score against the defining sum") {
    const SurvivalDataset d = six();
    const BrierEvaluator ev(d, fixed_predictions());
    for (double t : {0.5, 1.0, 2.5, 3.0, 4.5, 5.5}) {
      CAPTURE(t);
      CHECK(ev.at(t).value == doctest::Approx(brier_oracle(t)).epsilon(1e-14));
    }
  }

  TEST_CASE("integrated Brier score is the step integral over event times") {
    const SurvivalDataset d = six();
    const BrierEvaluator ev(d, fixed_predictions());
    // window [1.5, 5.5]: segments start at 1.5, 3, 4
    const double area = brier_oracle(1.5) * 1.5 + brier_oracle(3.0) * 1.0 + brier_oracle(4.0) * 1.5;
    CHECK(ev.integrated(1.5, 5.5) == doctest::Approx(area / 4.0).epsilon(1e-14));
    CHECK_THROWS_AS(ev.integrated(3.0, 3.0), ValidationError);
  }

  TEST_CASE("perfect predictions on uncensored data score zero") {
    const SurvivalDataset d({"a"}, {0, 0, 0}, {1, 2, 3}, {1, 1, 1});
    std::vector<StepCurve> preds;
    for (double y : {1.0, 2.0, 3.0}) preds.emplace_back(TimeGrid({y}), std::vector<double>{0.0}, CurveKind::survival);
    const BrierEvaluator ev(d, preds);
    CHECK(ev.integrated(0.5, 3.0) == 0.0);
  }

  TEST_CASE("default IBS window spans the first to last event time") {
    const IbsWindow w = default_ibs_window(six());
    CHECK(w.start == 1.0);
    CHECK(w.end == 6.0);
  }

  TEST_CASE("local accuracy sigma") {
    const std::vector<StepCurve> pred = {constant_survival(0.8), constant_survival(0.6)};
    const std::vector<StepCurve> rec = {constant_survival(0.7), constant_survival(0.6)};
    CHECK(local_accuracy_sigma(rec, pred, 1.0) == doctest::Approx(std::sqrt(0.01 / (0.64 + 0.36))));
    CHECK(local_accuracy_sigma(pred, pred, 1.0) == 0.0);
  }

  TEST_CASE("sign measure and changing sign proportion") {
    const StepCurve positive = attribution({1, 5}, {0.2, 0.1});
    const StepCurve flips = attribution({1, 3}, {0.2, -0.3});    // + on [1,3), - on [3,5]
    const StepCurve brief = attribution({1, 4.9}, {0.2, -0.3});  // - on 0.1 of a 4-long window
    const StepCurve zero = attribution({1}, {0.0});
    const SignMeasure m = sign_measure(flips, 1.0, 5.0);
    CHECK(m.non_negative == doctest::Approx(2.0));
    CHECK(m.non_positive == doctest::Approx(2.0));
    const std::vector<StepCurve> curves = {positive, flips, brief, zero};
    // alpha 0.05 of length 4 = 0.2: brief stays below it, zero counts for both signs.
    CHECK(changing_sign_proportion(curves, 0.05, 1.0, 5.0) == doctest::Approx(0.5));
    CHECK(changing_sign_proportion(std::vector<StepCurve>{brief}, 0.01, 1.0, 5.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(changing_sign_proportion(curves, 0.6, 1.0, 5.0), ValidationError);
  }

  TEST_CASE("GT-Shapley is the mean Pearson correlation and skips flat vectors") {
    auto at = [](double v) { return attribution({1}, {v}); };
    const std::vector<std::vector<StepCurve>> est = {{at(1), at(2), at(3)}, {at(1), at(1), at(1)}, {at(3), at(1), at(2)}};
    const std::vector<std::vector<StepCurve>> ref = {{at(2), at(4), at(6)}, {at(1), at(2), at(3)}, {at(1), at(2), at(3)}};
    const SkippingMean r = gt_shapley(est, ref, 1.0);
    CHECK(r.used == 2);
    CHECK(r.skipped == 1);
    // corr(1,2,3 ; 2,4,6) = 1, corr(3,1,2 ; 1,2,3) = -0.5
    CHECK(r.value == doctest::Approx(0.25));
  }

  TEST_CASE("normalised RMSE") {
    auto at = [](double v) { return attribution({1}, {v}); };
    const std::vector<std::vector<StepCurve>> est = {{at(1.0)}, {at(2.5)}};
    const std::vector<std::vector<StepCurve>> ref = {{at(2.0)}, {at(2.0)}};
    CHECK(*normalized_rmse(est, ref, 1.0, 0) == doctest::Approx(std::sqrt((1.0 + 0.25) / 8.0)));
    const std::vector<std::vector<StepCurve>> zeros = {{at(0.0)}, {at(0.0)}};
    CHECK_FALSE(normalized_rmse(est, zeros, 1.0, 0).has_value());
  }

  TEST_CASE("weighted Kendall tau matches the additive hyperbolic reference values") {
    const auto ref = ImportanceRanking::from_scores({5, 4, 3, 2, 1});
    // Values from scipy.stats.weightedtau(additive=True, rank=reference order).
    CHECK(kendall_tau_h(ref, ImportanceRanking::from_scores({4, 5, 3, 1, 2})) == doctest::Approx(0.5729927007299269));
    CHECK(kendall_tau_h(ref, ImportanceRanking::from_scores({3, 5, 4, 1, 2})) == doctest::Approx(0.28102189781021897));
    CHECK(kendall_tau_h(ref, ImportanceRanking::from_scores({1, 2, 3, 4, 5})) == doctest::Approx(-1.0));
    CHECK(kendall_tau_h(ref, ref) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kendall_tau_h(ImportanceRanking::from_scores({1}), ImportanceRanking::from_scores({1})),
                    ValidationError);
  }

  TEST_CASE("tau_h weights top-rank disagreements more") {
    const auto ref = ImportanceRanking::from_scores({5, 4, 3, 2, 1});
    const double top_swap = kendall_tau_h(ref, ImportanceRanking::from_scores({4, 5, 3, 2, 1}));
    const double bottom_swap = kendall_tau_h(ref, ImportanceRanking::from_scores({5, 4, 3, 1, 2}));
    CHECK(top_swap < bottom_swap);
  }
}
