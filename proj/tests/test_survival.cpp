#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "survshap/error.hpp"

using namespace survshap;

namespace {

// times 1 2 2 3 4 5, events 1 1 0 1 0 1
SurvivalDataset small() {
  return SurvivalDataset({"a"}, {0, 1, 2, 3, 4, 5}, {1, 2, 2, 3, 4, 5}, {1, 1, 0, 1, 0, 1});
}

}  // namespace

TEST_SUITE("survival") {
  TEST_CASE("time grid rejects unsorted, duplicate and non-positive times") {
    CHECK_THROWS_AS(TimeGrid({}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({2.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({1.0, NAN}), ValidationError);
    CHECK(TimeGrid({1.0, 2.5}).steps_through(2.5) == 2);
    CHECK(TimeGrid({1.0, 2.5}).steps_through(0.5) == 0);
  }

  TEST_CASE("step curves are right-continuous with kind-specific defaults") {
    const StepCurve s(TimeGrid({1, 2, 4}), {0.9, 0.5, 0.2}, CurveKind::survival);
    CHECK(s.at(0.5) == 1.0);
    CHECK(s.at(1.0) == 0.9);
    CHECK(s.at(1.999) == 0.9);
    CHECK(s.at(2.0) == 0.5);
    CHECK(s.at(100.0) == 0.2);
    const StepCurve h(TimeGrid({1, 2}), {0.1, 0.3}, CurveKind::cumulative_hazard);
    CHECK(h.at(0.0) == 0.0);
    CHECK_THROWS_AS(StepCurve(TimeGrid({1, 2}), {0.5, 0.6}, CurveKind::survival), ValidationError);
    CHECK_THROWS_AS(StepCurve(TimeGrid({1, 2}), {0.5, 0.4}, CurveKind::cumulative_hazard), ValidationError);
    CHECK_THROWS_AS(StepCurve(TimeGrid({1, 2}), {0.5}, CurveKind::attribution), ValidationError);
  }

  TEST_CASE("integrate_step matches the sum of rectangles") {
    const StepCurve c(TimeGrid({1, 2, 4}), {2.0, -1.0, 3.0}, CurveKind::attribution);
    // [0,1): 0, [1,2): 2, [2,4): -1, [4,6]: 3
    CHECK(integrate_step(c, 0.0, 6.0) == doctest::Approx(2.0 - 2.0 + 6.0));
    CHECK(integrate_step(c, 0.0, 6.0, Transform::absolute) == doctest::Approx(2.0 + 2.0 + 6.0));
    CHECK(integrate_step(c, 1.5, 3.0) == doctest::Approx(0.5 * 2.0 - 1.0));
    const StepCurve s(TimeGrid({1, 2}), {0.5, 0.25}, CurveKind::survival);
    CHECK(integrate_step(s, 0.0, 3.0) == doctest::Approx(1.0 + 0.5 + 0.25));
    CHECK_THROWS_AS(integrate_step(c, 2.0, 2.0), ValidationError);
  }

  TEST_CASE("integration is additive over adjacent windows") {
    const StepCurve c(TimeGrid({0.3, 1.1, 2.7, 3.2}), {0.4, -0.2, 0.9, 0.1}, CurveKind::attribution);
    for (double mid : {0.1, 0.3, 1.0, 2.7, 3.0}) {
      CHECK(integrate_step(c, 0.0, mid) + integrate_step(c, mid, 4.0) == doctest::Approx(integrate_step(c, 0.0, 4.0)));
    }
  }

  TEST_CASE("Kaplan-Meier and Nelson-Aalen against hand computation") {
    const SurvivalDataset d = small();
    const StepCurve km = kaplan_meier(d);
    const StepCurve na = nelson_aalen(d);
    // event times 1,2,3,5 with at-risk 6,5,3,1
    REQUIRE(km.grid() == TimeGrid({1, 2, 3, 5}));
    const double s1 = 5.0 / 6.0, s2 = s1 * 4.0 / 5.0, s3 = s2 * 2.0 / 3.0;
    CHECK(km[0] == doctest::Approx(s1));
    CHECK(km[1] == doctest::Approx(s2));
    CHECK(km[2] == doctest::Approx(s3));
    CHECK(km[3] == doctest::Approx(0.0));
    CHECK(na[0] == doctest::Approx(1.0 / 6.0));
    CHECK(na[1] == doctest::Approx(1.0 / 6.0 + 1.0 / 5.0));
    CHECK(na[2] == doctest::Approx(1.0 / 6.0 + 1.0 / 5.0 + 1.0 / 3.0));
    CHECK(na[3] == doctest::Approx(1.0 / 6.0 + 1.0 / 5.0 + 1.0 / 3.0 + 1.0));
  }

  TEST_CASE("Kaplan-Meier without censoring is the empirical survival function") {
    const SurvivalDataset d({"a"}, {0, 0, 0, 0}, {3, 1, 2, 2}, {1, 1, 1, 1});
    const StepCurve km = kaplan_meier(d);
    CHECK(km.at(1.0) == doctest::Approx(0.75));
    CHECK(km.at(2.0) == doctest::Approx(0.25));
    CHECK(km.at(3.0) == doctest::Approx(0.0));
  }

  TEST_CASE("chf_to_survival is exp(-H)") {
    const StepCurve h(TimeGrid({1, 2}), {0.1, 0.7}, CurveKind::cumulative_hazard);
    const StepCurve s = chf_to_survival(h);
    CHECK(s[0] == doctest::Approx(std::exp(-0.1)));
    CHECK(s[1] == doctest::Approx(std::exp(-0.7)));
  }

  TEST_CASE("dataset validation names the offending row") {
    CHECK_THROWS_AS(SurvivalDataset({"a"}, {1}, {-1}, {1}), ValidationError);
    CHECK_THROWS_AS(SurvivalDataset({"a"}, {NAN}, {1}, {1}), ValidationError);
    CHECK_THROWS_AS(SurvivalDataset({"a"}, {1}, {1}, {2}), ValidationError);
    CHECK_THROWS_AS(SurvivalDataset({"a"}, {1}, {1}, {0}), ValidationError);
    CHECK_THROWS_AS(SurvivalDataset({"a", "b"}, {1}, {1}, {1}), ValidationError);
    try {
      SurvivalDataset({"a"}, {1, 2}, {1, -2}, {1, 1});
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
  }

  TEST_CASE("an event at time zero stays at the origin of the grid") {
    const SurvivalDataset d({"a"}, {0, 1}, {0.0, 2.0}, {1, 1});
    const TimeGrid g = build_event_grid(d);
    CHECK(g[0] > 0.0);
    CHECK(g[0] < 1e-300);
    CHECK(kaplan_meier(d).at(1.0) == doctest::Approx(0.5));
  }

  TEST_CASE("dataset interchange round-trips exactly") {
    const SurvivalDataset d = testing::cox_data(50, {0.3, -0.7}, 4);
    const std::string text = format_dataset_csv(d);
    CHECK(text.rfind(kDatasetSchema, 0) == 0);
    const SurvivalDataset back = parse_dataset_csv(text);
    CHECK(back.feature_names() == d.feature_names());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      CHECK(back.time(i) == d.time(i));
      CHECK(back.event(i) == d.event(i));
      for (std::size_t k = 0; k < d.cols(); ++k) CHECK(back.feature(i, k) == d.feature(i, k));
    }
    CHECK(format_dataset_csv(back) == text);
  }

  TEST_CASE("malformed dataset files are rejected with line numbers") {
    const std::string header = std::string(kDatasetSchema) + "\na,time,event\n";
    CHECK_THROWS_AS(parse_dataset_csv("a,time,event\n1,2,1\n"), ValidationError);
    CHECK_THROWS_AS(parse_dataset_csv(std::string(kDatasetSchema) + "\na,time\n1,2\n"), ValidationError);
    try {
      parse_dataset_csv(header + "1,2,1\n1,oops,1\n");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_dataset_csv(header + "1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_dataset_csv(header + "1,2,0.5\n"), ValidationError);
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-7}) {
      CHECK(std::stod(format_double(v)) == v);
    }
  }

  TEST_CASE("time quantiles interpolate order statistics") {
    const SurvivalDataset d({"a"}, {0, 0, 0, 0, 0}, {5, 1, 4, 2, 3}, {1, 1, 1, 1, 1});
    CHECK(d.time_quantile(0.0) == 1.0);
    CHECK(d.time_quantile(1.0) == 5.0);
    CHECK(d.time_quantile(0.5) == 3.0);
    CHECK(d.time_quantile(0.1) == doctest::Approx(1.4));
  }
}
