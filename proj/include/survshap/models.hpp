#pragma once

// Survival models behind one predict-a-curve interface: Cox proportional
// hazards (Breslow) and a log-rank random survival forest.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "survshap/survival.hpp"

namespace survshap {

/// Maps a target grid onto a model's native grid: entry i is the index of
/// the native step in effect at target[i], or -1 before the first step.
class GridProjection {
 public:
  GridProjection(const TimeGrid& native, const TimeGrid& target);

  bool identity() const { return identity_; }
  std::size_t size() const { return index_.size(); }
  std::span<const std::int64_t> indices() const { return index_; }

  /// out[i] = native[index[i]], or `before` where the index is -1.
  void gather(std::span<const double> native, std::span<double> out, double before) const;

 private:
  std::vector<std::int64_t> index_;
  bool identity_ = false;
};

class SurvivalModel {
 public:
  virtual ~SurvivalModel() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t num_features() const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;

  /// Grid on which the model natively represents its predictions.
  virtual const TimeGrid& event_grid() const = 0;

  /// Predicted cumulative hazard on event_grid(); `out` has event_grid().size()
  /// entries.
  virtual void cumulative_hazard_into(std::span<const double> x, std::span<double> out) const = 0;

  /// Predicted survival on event_grid(), written into `out`.
  virtual void survival_into(std::span<const double> x, std::span<double> out) const;

  StepCurve predict_survival(std::span<const double> x) const;
  StepCurve predict_survival(std::span<const double> x, const TimeGrid& grid) const;
  StepCurve predict_cumulative_hazard(std::span<const double> x) const;

 protected:
  void check_width(std::span<const double> x) const;
};

/// Feature ordering by descending score; ties keep the lower feature index
/// first.
struct ImportanceRanking {
  std::vector<std::size_t> order;
  std::vector<double> scores;  // indexed by feature

  static ImportanceRanking from_scores(std::vector<double> scores);

  std::size_t size() const { return order.size(); }
  /// 0-based rank of each feature.
  std::vector<std::size_t> ranks() const;
};

struct CoxFitOptions {
  int max_iter = 100;
  double tol = 1e-9;  // on the gradient infinity-norm
};

class CoxModel final : public SurvivalModel {
 public:
  CoxModel(std::vector<std::string> feature_names, std::vector<double> coefficients, std::vector<double> means,
           StepCurve baseline_chf);

  /// Newton-Raphson maximiser of the Breslow partial likelihood on centred
  /// features, with step halving; baseline via the Breslow estimator.
  static CoxModel fit(const SurvivalDataset& data, const CoxFitOptions& options = {});

  std::string kind() const override { return "cph"; }
  std::size_t num_features() const override { return coefficients_.size(); }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const TimeGrid& event_grid() const override { return baseline_.grid(); }
  void cumulative_hazard_into(std::span<const double> x, std::span<double> out) const override;
  void survival_into(std::span<const double> x, std::span<double> out) const override;

  const std::vector<double>& coefficients() const { return coefficients_; }
  const std::vector<double>& means() const { return means_; }
  const StepCurve& baseline_chf() const { return baseline_; }

  /// b'(x - means)
  double linear_predictor(std::span<const double> x) const;

  int iterations() const { return iterations_; }
  double log_partial_likelihood() const { return loglik_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> coefficients_;
  std::vector<double> means_;
  StepCurve baseline_;
  int iterations_ = 0;
  double loglik_ = 0.0;
};

/// Ranks features by |x_d * b_d|.
ImportanceRanking cox_local_ranking(const CoxModel& model, std::span<const double> x);

/// Standardised two-sample log-rank statistic |O - E| / sqrt(V); 0 when the
/// variance vanishes.
double logrank_statistic(const SurvivalDataset& left, const SurvivalDataset& right);

struct ForestOptions {
  std::size_t n_trees = 100;
  std::size_t min_leaf = 10;
  std::size_t max_features = 0;  // 0: floor(sqrt(p)), at least 1
  std::size_t max_depth = 0;     // 0: unlimited
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

class SurvivalTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf = -1;
  };
  /// Nelson-Aalen increments of one leaf, stored sparsely on the forest grid.
  struct Leaf {
    std::vector<std::uint32_t> steps;
    std::vector<double> increments;
    std::uint32_t samples = 0;
    std::uint32_t events = 0;
  };

  SurvivalTree() = default;
  SurvivalTree(std::vector<Node> nodes, std::vector<Leaf> leaves);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }
  std::size_t depth() const;

  const Leaf& route(std::span<const double> x) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
};

class RandomSurvivalForest final : public SurvivalModel {
 public:
  RandomSurvivalForest(std::vector<std::string> feature_names, TimeGrid grid, std::vector<SurvivalTree> trees,
                       ForestOptions options);

  /// Bootstrap trees grown with log-rank splits on random feature subsets;
  /// leaves hold Nelson-Aalen estimates on the training event grid.
  static RandomSurvivalForest fit(const SurvivalDataset& data, const ForestOptions& options = {});

  std::string kind() const override { return "rsf"; }
  std::size_t num_features() const override { return names_.size(); }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const TimeGrid& event_grid() const override { return grid_; }
  void cumulative_hazard_into(std::span<const double> x, std::span<double> out) const override;

  const std::vector<SurvivalTree>& trees() const { return trees_; }
  const ForestOptions& options() const { return options_; }

  /// Leaf cumulative hazard of tree `t` for input x, as a dense curve.
  StepCurve tree_chf(std::size_t t, std::span<const double> x) const;

  /// Whether any tree splits on feature d.
  bool uses_feature(std::size_t d) const;

 private:
  void flatten();

  std::vector<std::string> names_;
  TimeGrid grid_;
  std::vector<SurvivalTree> trees_;
  ForestOptions options_;

  // Contiguous copy of every tree for prediction.
  struct FlatNode {
    double threshold;
    std::int32_t feature;
    std::int32_t left;
    std::int32_t right;
  };
  std::vector<FlatNode> flat_nodes_;
  std::vector<std::int32_t> node_leaf_;  // global leaf index, -1 for split nodes
  std::vector<std::uint32_t> roots_;
  std::vector<std::uint32_t> depths_;
  std::vector<std::uint32_t> leaf_begin_;  // CSR offsets into leaf_steps_/leaf_increments_
  std::vector<std::uint32_t> leaf_steps_;
  std::vector<double> leaf_increments_;
};

/// Best log-rank split of a node, exposed for testing the split search.
struct SplitCandidate {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double statistic = 0.0;
};

/// Exhaustive split search over the given features for the node made of
/// `rows` of `data` (repeats allowed, as in a bootstrap sample). Candidates are
/// midpoints between consecutive distinct values; both children need at least
/// `min_leaf` rows and one event. Ties keep the lowest feature, then the
/// smallest threshold.
SplitCandidate best_logrank_split(const SurvivalDataset& data, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, std::size_t min_leaf);

struct IbsWindow {
  double start = 0.0;
  double end = 0.0;
};

/// Default integration window for integrated Brier scores: first to last
/// event time of the dataset.
IbsWindow default_ibs_window(const SurvivalDataset& data);

/// Mean increase of the integrated Brier score after shuffling each feature
/// column, averaged over `repeats` shuffles; ranked by that increase.
ImportanceRanking permutation_importance(const SurvivalModel& model, const SurvivalDataset& data, std::size_t repeats,
                                         std::uint64_t seed, const IbsWindow& window, std::size_t threads = 1);

// Model files: versioned JSON carrying either the Cox coefficients and
// baseline or the full forest structure. Doubles round-trip exactly.
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const SurvivalModel& model);
std::unique_ptr<SurvivalModel> deserialize_model(const std::string& text);
void save_model(const SurvivalModel& model, const std::string& path);
std::unique_ptr<SurvivalModel> load_model(const std::string& path);

}  // namespace survshap
