#include <algorithm>
#include <numeric>

#include "survshap/error.hpp"
#include "survshap/explain.hpp"
#include "survshap/kernels.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

ValueFunction::ValueFunction(const SurvivalModel& model, std::span<const double> x, const SurvivalDataset& background,
                             const TimeGrid& grid)
    : model_(model),
      x_(x.begin(), x.end()),
      background_(background),
      grid_(grid),
      projection_(model.event_grid(), grid),
      prediction_(grid.size()),
      composite_(x.size()),
      native_(model.event_grid().size()),
      sum_(model.event_grid().size()) {
  if (x.size() != model.num_features()) {
    throw ValidationError("observation has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.num_features()));
  }
  if (background.cols() != x.size()) throw ValidationError("background width differs from the observation");
  if (x.size() > 64) throw ValidationError("at most 64 features are supported");
  model_.survival_into(x_, native_);
  projection_.gather(native_, prediction_, 1.0);
}

const std::vector<double>& ValueFunction::operator()(std::uint64_t coalition) {
  if (auto it = cache_.find(coalition); it != cache_.end()) return it->second;
  const std::size_t p = x_.size();
  std::fill(sum_.begin(), sum_.end(), 0.0);
  for (std::size_t i = 0; i < background_.rows(); ++i) {
    const auto row = background_.row(i);
    for (std::size_t d = 0; d < p; ++d) composite_[d] = (coalition >> d) & 1U ? x_[d] : row[d];
    model_.survival_into(composite_, native_);
    kernels::add(sum_, native_);
  }
  // Division rather than a reciprocal scale keeps the mean inside [0, 1].
  const auto n = static_cast<double>(background_.rows());
  for (double& v : sum_) v /= n;
  std::vector<double> out(grid_.size());
  projection_.gather(sum_, out, 1.0);
  return cache_.emplace(coalition, std::move(out)).first->second;
}

SurvivalDataset select_background(const SurvivalDataset& data, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  if (cap == 0 || cap >= data.rows()) return data.subset(rows);
  auto rng = substream(seed, 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(cap);
  std::sort(rows.begin(), rows.end());
  return data.subset(rows);
}

}  // namespace survshap
