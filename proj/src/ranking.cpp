#include <algorithm>
#include <cmath>
#include <numeric>

#include "survshap/error.hpp"
#include "survshap/metrics.hpp"
#include "survshap/models.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

ImportanceRanking ImportanceRanking::from_scores(std::vector<double> scores) {
  ImportanceRanking r;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  // NaN scores sort last.
  auto key = [&](std::size_t d) { return std::isnan(scores[d]) ? -INFINITY : scores[d]; };
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  r.scores = std::move(scores);
  return r;
}

std::vector<std::size_t> ImportanceRanking::ranks() const {
  std::vector<std::size_t> out(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = k;
  return out;
}

IbsWindow default_ibs_window(const SurvivalDataset& data) {
  const TimeGrid grid = build_event_grid(data);
  if (grid.size() < 2) throw ValidationError("an integrated Brier score needs at least two distinct event times");
  return {grid.front(), grid.back()};
}

ImportanceRanking permutation_importance(const SurvivalModel& model, const SurvivalDataset& data, std::size_t repeats,
                                         std::uint64_t seed, const IbsWindow& window, std::size_t threads) {
  if (repeats == 0) throw ValidationError("permutation importance needs at least one repeat");
  const double reference = BrierEvaluator(model, data, threads).integrated(window.start, window.end);
  const std::size_t p = data.cols();
  std::vector<double> scores(p, 0.0);
  for (std::size_t d = 0; d < p; ++d) {
    auto rng = substream(seed, d);
    std::vector<double> column = data.column(d);
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      std::shuffle(column.begin(), column.end(), rng);
      const SurvivalDataset shuffled = data.with_column(d, column);
      total += BrierEvaluator(model, shuffled, threads).integrated(window.start, window.end) - reference;
    }
    scores[d] = total / static_cast<double>(repeats);
  }
  return ImportanceRanking::from_scores(std::move(scores));
}

}  // namespace survshap
