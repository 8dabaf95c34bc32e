#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warden/preprocess.hpp"

namespace warden {

/// Binary labels only: index 0 counts class 0, index 1 counts class 1.
using ClassCounts = std::array<std::size_t, 2>;

/// 1 - sum_k p_k^2. Throws ValidationError when all counts are zero.
double gini(std::span<const std::size_t> class_counts);

struct Split {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double weighted_impurity = 0.0;
};

struct SplitOptions {
  /// Candidates leaving fewer rows than this on either side are skipped.
  std::size_t min_samples_leaf = 1;
  /// Features to search, ascending. Empty means all.
  std::vector<std::size_t> features;
};

/// Exhaustive CART split search over midpoints of consecutive distinct values.
/// Minimizes the size-weighted child Gini, compared exactly in integer
/// arithmetic; ties go to the lower feature index, then the lower threshold.
/// Returns nothing for a pure node or when no admissible threshold exists.
std::optional<Split> best_split(const LabeledDataset& ds, std::span<const std::size_t> rows,
                                const SplitOptions& options = {});

struct TreeParams {
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Leaf when feature_index is empty. Children of node i are stored in pre-order:
/// the left child is i + 1, the right child is `right`.
struct TreeNode {
  std::optional<std::size_t> feature_index;
  double threshold = 0.0;
  std::size_t right = 0;
  ClassCounts counts{};
  int predicted_class = 0;

  bool is_leaf() const { return !feature_index.has_value(); }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTreeModel {
 public:
  std::vector<TreeNode> nodes;
  TreeParams params;
  std::vector<std::string> feature_names;

  /// Follows value <= threshold to the left. Throws on a width mismatch.
  int predict(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;
};

DecisionTreeModel build_tree(const LabeledDataset& train, const TreeParams& params = {});
int predict_tree(const DecisionTreeModel& model, std::span<const double> row);

struct TuneGrid {
  std::vector<std::optional<int>> max_depths;
  std::vector<int> min_samples_leaf;
  int min_samples_split = 2;

  /// max_depth 1..10 plus unlimited, min_samples_leaf {1, 2, 5, 10}.
  static TuneGrid defaults();
};

struct GridScore {
  TreeParams params;
  std::size_t correct = 0;
  double cv_accuracy = 0.0;
};

struct TuneResult {
  TreeParams best;
  DecisionTreeModel model;
  double cv_accuracy = 0.0;
  /// False when some class had fewer rows than folds and plain folds were used.
  bool stratified = true;
  std::vector<GridScore> scores;
};

/// Assigns each row a fold in [0, folds). Stratified round-robin over a seeded
/// permutation of each class when every class has at least `folds` rows.
std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed,
                                      bool* stratified = nullptr);

/// Pooled k-fold accuracy (each row predicted once by the model that did not
/// see it) for one parameter set.
std::size_t cross_validate_correct(const LabeledDataset& train, const TreeParams& params,
                                   std::span<const std::size_t> fold_of_row, std::size_t folds);

/// Grid search by k-fold CV. Ties prefer the smaller max_depth (unlimited is
/// largest), then the larger min_samples_leaf. The returned model is refit on
/// all of `train`.
TuneResult tune_tree(const LabeledDataset& train, const TuneGrid& grid = TuneGrid::defaults(),
                     std::size_t folds = 5, std::uint64_t seed = 0);

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::size_t max_features = 1;
  std::uint64_t seed = 0;
  TreeParams tree;
};

struct ForestModel {
  std::vector<DecisionTreeModel> trees;
  ForestParams params;
};

/// Tree t draws its bootstrap sample and per-node feature subsets from
/// SeededRng(derive_seed(seed, t)), so trees are independent of build order.
ForestModel build_forest(const LabeledDataset& train, const ForestParams& params = {});

/// Unweighted majority vote; an even split goes to class 0.
int predict_forest(const ForestModel& model, std::span<const double> row);

/// Indented text, one line per guard or leaf:
///   |--- Age <= 6.0
///   |   |--- class: 0 (counts: [2, 0])
///   |--- Age > 6.0
///   |   |--- class: 1 (counts: [0, 2])
std::string render_tree_text(const DecisionTreeModel& model);

/// Shortest round-trip decimal, with ".0" appended to integral values.
std::string format_threshold(double value);

nlohmann::ordered_json tree_to_json(const DecisionTreeModel& model);
DecisionTreeModel tree_from_json(const nlohmann::json& j);

/// FNV-1a 64 over the compact JSON of feature names and pre-order nodes, as
/// 16 lowercase hex digits.
std::string model_digest(const DecisionTreeModel& model);

std::vector<int> predict_all(const DecisionTreeModel& model, const FeatureMatrix& features);
std::vector<int> predict_all(const ForestModel& model, const FeatureMatrix& features);

}  // namespace warden
