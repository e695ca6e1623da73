#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "survshap/error.hpp"
#include "survshap/kernels.hpp"
#include "survshap/models.hpp"
#include "survshap/parallel.hpp"

namespace survshap {

double logrank_statistic(const SurvivalDataset& left, const SurvivalDataset& right) {
  if (left.rows() == 0 || right.rows() == 0) throw ValidationError("log-rank: both groups must be non-empty");
  if (left.cols() != right.cols()) throw ValidationError("log-rank: groups have different widths");
  std::vector<double> times;
  for (const auto* g : {&left, &right}) {
    for (std::size_t i = 0; i < g->rows(); ++i) {
      if (g->event(i)) times.push_back(g->time(i));
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  auto count = [](const SurvivalDataset& g, double t, double& at_risk, double& events) {
    at_risk = 0.0;
    events = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      if (g.time(i) >= t) at_risk += 1.0;
      if (g.time(i) == t && g.event(i)) events += 1.0;
    }
  };
  double diff = 0.0;
  double var = 0.0;
  for (double t : times) {
    double yl = 0, dl = 0, yr = 0, dr = 0;
    count(left, t, yl, dl);
    count(right, t, yr, dr);
    const double y = yl + yr;
    const double d = dl + dr;
    diff += dl - yl * d / y;
    if (y > 1.0) var += (yl / y) * (1.0 - yl / y) * (y - d) / (y - 1.0) * d;
  }
  if (!(var > 0.0)) return 0.0;
  return std::abs(diff) / std::sqrt(var);
}

SplitCandidate best_logrank_split(const SurvivalDataset& data, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, std::size_t min_leaf) {
  SplitCandidate best;
  const std::size_t n = rows.size();
  if (n < 2 * std::max<std::size_t>(min_leaf, 1)) return best;

  std::vector<double> event_times;
  for (std::size_t r : rows) {
    if (data.event(r)) event_times.push_back(data.time(r));
  }
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
  const std::size_t m = event_times.size();
  if (m == 0) return best;

  // For each row: number of node event times it is at risk for, and the index
  // of its own event time (or -1).
  std::vector<std::uint32_t> risk_len(n);
  std::vector<std::int32_t> event_at(n);
  std::vector<double> total_risk(m, 0.0), total_events(m, 0.0);
  std::size_t total_event_rows = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = rows[k];
    const double t = data.time(r);
    risk_len[k] = static_cast<std::uint32_t>(std::upper_bound(event_times.begin(), event_times.end(), t) -
                                             event_times.begin());
    event_at[k] = -1;
    if (data.event(r)) {
      event_at[k] = static_cast<std::int32_t>(risk_len[k]) - 1;
      total_events[static_cast<std::size_t>(event_at[k])] += 1.0;
      ++total_event_rows;
    }
    for (std::size_t j = 0; j < risk_len[k]; ++j) total_risk[j] += 1.0;
  }
  // Terms of the variance that do not depend on the split.
  std::vector<double> var_factor(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double y = total_risk[j];
    if (y > 1.0) var_factor[j] = total_events[j] * (y - total_events[j]) / ((y - 1.0) * y * y);
  }

  std::vector<std::size_t> order(n);
  std::vector<double> left_risk(m), left_events(m);
  for (std::size_t f : features) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.feature(rows[a], f) < data.feature(rows[b], f); });
    std::fill(left_risk.begin(), left_risk.end(), 0.0);
    std::fill(left_events.begin(), left_events.end(), 0.0);
    std::size_t left_n = 0;
    std::size_t left_event_rows = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t idx = order[k];
      for (std::size_t j = 0; j < risk_len[idx]; ++j) left_risk[j] += 1.0;
      if (event_at[idx] >= 0) {
        left_events[static_cast<std::size_t>(event_at[idx])] += 1.0;
        ++left_event_rows;
      }
      ++left_n;
      const double xv = data.feature(rows[idx], f);
      const double xn = data.feature(rows[order[k + 1]], f);
      if (!(xn > xv)) continue;
      if (left_n < min_leaf || n - left_n < min_leaf) continue;
      if (left_event_rows == 0 || left_event_rows == total_event_rows) continue;
      double diff = 0.0;
      double var = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double yl = left_risk[j];
        if (yl == 0.0) break;  // risk sets shrink with j
        diff += left_events[j] - yl * total_events[j] / total_risk[j];
        var += yl * (total_risk[j] - yl) * var_factor[j];
      }
      if (!(var > 0.0)) continue;
      const double stat = std::abs(diff) / std::sqrt(var);
      if (stat > best.statistic) {
        best.feature = static_cast<std::int32_t>(f);
        best.threshold = 0.5 * (xv + xn);
        if (!(best.threshold < xn)) best.threshold = xv;
        best.statistic = stat;
      }
    }
  }
  return best;
}

SurvivalTree::SurvivalTree(std::vector<Node> nodes, std::vector<Leaf> leaves)
    : nodes_(std::move(nodes)), leaves_(std::move(leaves)) {
  if (nodes_.empty()) throw ValidationError("survival tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.feature < 0) {
      if (node.leaf < 0 || static_cast<std::size_t>(node.leaf) >= leaves_.size()) {
        throw ValidationError("survival tree leaf index out of range");
      }
      continue;
    }
    // Children follow their parent (preorder), which also rules out cycles.
    const auto in_range = [&](std::int32_t c) {
      return c >= 0 && static_cast<std::size_t>(c) > i && static_cast<std::size_t>(c) < nodes_.size();
    };
    if (!in_range(node.left) || !in_range(node.right)) {
      throw ValidationError("survival tree child index out of range at node " + std::to_string(i));
    }
  }
}

const SurvivalTree::Leaf& SurvivalTree::route(std::span<const double> x) const {
  const Node* node = &nodes_[0];
  while (node->feature >= 0) {
    node = &nodes_[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                          : node->right)];
  }
  return leaves_[static_cast<std::size_t>(node->leaf)];
}

std::size_t SurvivalTree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const SurvivalDataset& data, const TimeGrid& grid, const ForestOptions& options, std::size_t mtry,
              std::mt19937_64& rng)
      : data_(data), grid_(grid), options_(options), mtry_(mtry), rng_(rng) {}

  SurvivalTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return SurvivalTree(std::move(nodes_), std::move(leaves_));
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const bool may_split = rows.size() >= 2 * options_.min_leaf &&
                           (options_.max_depth == 0 || depth < options_.max_depth);
    if (may_split) {
      const std::vector<std::size_t> features = draw_features();
      const SplitCandidate split = best_logrank_split(data_, rows, features, options_.min_leaf);
      if (split.feature >= 0 && split.statistic > 0.0) {
        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
          (data_.feature(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const std::int32_t l = grow(std::move(left), depth + 1);
        const std::int32_t r = grow(std::move(right), depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
      }
    }
    nodes_[static_cast<std::size_t>(id)].leaf = static_cast<std::int32_t>(leaves_.size());
    leaves_.push_back(make_leaf(rows));
    return id;
  }

  std::vector<std::size_t> draw_features() {
    std::vector<std::size_t> all(data_.cols());
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng_)]);
    }
    all.resize(mtry_);
    std::sort(all.begin(), all.end());
    return all;
  }

  SurvivalTree::Leaf make_leaf(const std::vector<std::size_t>& rows) const {
    SurvivalTree::Leaf leaf;
    leaf.samples = static_cast<std::uint32_t>(rows.size());
    std::vector<double> times(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) times[k] = data_.time(rows[k]);
    std::vector<double> event_times;
    for (std::size_t r : rows) {
      if (data_.event(r)) {
        event_times.push_back(data_.time(r));
        ++leaf.events;
      }
    }
    std::sort(times.begin(), times.end());
    std::sort(event_times.begin(), event_times.end());
    std::size_t k = 0;
    while (k < event_times.size()) {
      const double t = event_times[k];
      std::size_t e = k;
      while (e < event_times.size() && event_times[e] == t) ++e;
      const double d = static_cast<double>(e - k);
      const double at_risk =
          static_cast<double>(times.end() - std::lower_bound(times.begin(), times.end(), t));
      const std::size_t step = grid_.steps_through(std::max(t, grid_.front())) - 1;
      leaf.steps.push_back(static_cast<std::uint32_t>(step));
      leaf.increments.push_back(d / at_risk);
      k = e;
    }
    return leaf;
  }

  const SurvivalDataset& data_;
  const TimeGrid& grid_;
  const ForestOptions& options_;
  std::size_t mtry_;
  std::mt19937_64& rng_;
  std::vector<SurvivalTree::Node> nodes_;
  std::vector<SurvivalTree::Leaf> leaves_;
};

}  // namespace

RandomSurvivalForest::RandomSurvivalForest(std::vector<std::string> feature_names, TimeGrid grid,
                                           std::vector<SurvivalTree> trees, ForestOptions options)
    : names_(std::move(feature_names)), grid_(std::move(grid)), trees_(std::move(trees)), options_(options) {
  if (trees_.empty()) throw ValidationError("forest needs at least one tree");
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (node.feature >= 0 && static_cast<std::size_t>(node.feature) >= names_.size()) {
        throw ValidationError("forest splits on a feature index beyond its width");
      }
    }
    for (const auto& leaf : tree.leaves()) {
      if (leaf.steps.size() != leaf.increments.size()) throw ValidationError("malformed forest leaf");
      for (std::size_t k = 0; k < leaf.steps.size(); ++k) {
        if (leaf.steps[k] >= grid_.size() || !(leaf.increments[k] >= 0.0)) {
          throw ValidationError("forest leaf references an invalid grid step");
        }
      }
    }
  }
  flatten();
}

RandomSurvivalForest RandomSurvivalForest::fit(const SurvivalDataset& data, const ForestOptions& options) {
  if (options.n_trees == 0) throw ValidationError("forest needs at least one tree");
  if (options.min_leaf == 0) throw ValidationError("min_leaf must be >= 1");
  if (data.rows() < 2 * options.min_leaf) {
    throw ValidationError("forest: need at least 2 * min_leaf rows (" + std::to_string(2 * options.min_leaf) + ")");
  }
  const std::size_t p = data.cols();
  std::size_t mtry = options.max_features;
  if (mtry == 0) mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  mtry = std::min(mtry, p);

  TimeGrid grid = build_event_grid(data);
  std::vector<SurvivalTree> trees(options.n_trees);
  parallel_for(options.n_trees, options.threads, [&](std::size_t t) {
    std::mt19937_64 rng = substream(options.seed, t);
    std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
    std::vector<std::size_t> rows(data.rows());
    for (auto& r : rows) r = pick(rng);
    TreeBuilder builder(data, grid, options, mtry, rng);
    trees[t] = builder.build(std::move(rows));
  });
  return RandomSurvivalForest(data.feature_names(), std::move(grid), std::move(trees), options);
}

void RandomSurvivalForest::flatten() {
  leaf_begin_.push_back(0);
  for (const auto& tree : trees_) {
    const auto node_base = static_cast<std::int32_t>(flat_nodes_.size());
    const auto leaf_base = static_cast<std::int32_t>(leaf_begin_.size() - 1);
    roots_.push_back(static_cast<std::uint32_t>(node_base));
    depths_.push_back(static_cast<std::uint32_t>(tree.depth()));
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
      const auto& n = tree.nodes()[i];
      const auto self = node_base + static_cast<std::int32_t>(i);
      if (n.feature < 0) {
        // Leaves point at themselves so routing can run a fixed number of
        // levels without branching.
        flat_nodes_.push_back({0.0, 0, self, self});
        node_leaf_.push_back(leaf_base + n.leaf);
      } else {
        flat_nodes_.push_back({n.threshold, n.feature, node_base + n.left, node_base + n.right});
        node_leaf_.push_back(-1);
      }
    }
    for (const auto& leaf : tree.leaves()) {
      leaf_steps_.insert(leaf_steps_.end(), leaf.steps.begin(), leaf.steps.end());
      leaf_increments_.insert(leaf_increments_.end(), leaf.increments.begin(), leaf.increments.end());
      leaf_begin_.push_back(static_cast<std::uint32_t>(leaf_steps_.size()));
    }
  }
}

void RandomSurvivalForest::cumulative_hazard_into(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const FlatNode* nodes = flat_nodes_.data();
  // Trees are walked in interleaved batches so the dependent loads of
  // different trees overlap.
  constexpr std::size_t kLanes = 8;
  const std::size_t n_trees = roots_.size();
  for (std::size_t base = 0; base < n_trees; base += kLanes) {
    const std::size_t lanes = std::min(kLanes, n_trees - base);
    std::array<std::int32_t, kLanes> at{};
    std::uint32_t levels = 0;
    for (std::size_t l = 0; l < lanes; ++l) {
      at[l] = static_cast<std::int32_t>(roots_[base + l]);
      levels = std::max(levels, depths_[base + l]);
    }
    for (std::uint32_t level = 0; level < levels; ++level) {
      for (std::size_t l = 0; l < lanes; ++l) {
        const FlatNode& node = nodes[at[l]];
        // Arithmetic select; a ternary here compiles to a mispredicted branch.
        const auto go_right = static_cast<std::int32_t>(x[static_cast<std::size_t>(node.feature)] > node.threshold);
        at[l] = node.left + go_right * (node.right - node.left);
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      const auto leaf = static_cast<std::size_t>(node_leaf_[static_cast<std::size_t>(at[l])]);
      for (std::uint32_t k = leaf_begin_[leaf]; k < leaf_begin_[leaf + 1]; ++k) {
        out[leaf_steps_[k]] += leaf_increments_[k];
      }
    }
  }
  double acc = 0.0;
  for (double& v : out) {
    acc += v;
    v = acc;
  }
  kernels::scale(out, 1.0 / static_cast<double>(trees_.size()));
}

StepCurve RandomSurvivalForest::tree_chf(std::size_t t, std::span<const double> x) const {
  check_width(x);
  std::vector<double> h(grid_.size(), 0.0);
  const auto& leaf = trees_.at(t).route(x);
  for (std::size_t k = 0; k < leaf.steps.size(); ++k) h[leaf.steps[k]] += leaf.increments[k];
  for (std::size_t j = 1; j < h.size(); ++j) h[j] += h[j - 1];
  return StepCurve(grid_, std::move(h), CurveKind::cumulative_hazard);
}

bool RandomSurvivalForest::uses_feature(std::size_t d) const {
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (node.feature == static_cast<std::int32_t>(d)) return true;
    }
  }
  return false;
}

}  // namespace survshap
