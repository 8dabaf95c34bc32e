#include "warden/mining.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "warden/error.hpp"
#include "warden/rng.hpp"

namespace warden {
namespace {

using Wide = unsigned __int128;

// Split quality as an exact fraction: sum_L c^2 / nL + sum_R c^2 / nR. The
// weighted child Gini is 1 - quality / n, so larger is better.
struct Quality {
  Wide num = 0;
  Wide den = 1;

  bool better_than(const Quality& other) const { return num * other.den > other.num * den; }
};

std::size_t sum_sq(const ClassCounts& c) { return c[0] * c[0] + c[1] * c[1]; }

ClassCounts count_labels(const LabeledDataset& ds, std::span<const std::size_t> rows) {
  ClassCounts counts{};
  for (auto r : rows) counts[static_cast<std::size_t>(ds.labels[r])] += 1;
  return counts;
}

int majority(const ClassCounts& counts) { return counts[1] > counts[0] ? 1 : 0; }

double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: the midpoint can round onto `hi`, which would route it left.
  if (mid >= hi) mid = lo;
  return mid;
}

class TreeBuilder {
 public:
  TreeBuilder(const LabeledDataset& ds, const TreeParams& params, SeededRng* rng, std::size_t max_features)
      : ds_(ds), params_(params), rng_(rng), max_features_(max_features) {}

  DecisionTreeModel build(std::vector<std::size_t> rows) {
    DecisionTreeModel model;
    model.params = params_;
    model.feature_names = ds_.feature_names;
    grow(model.nodes, rows, 0);
    return model;
  }

 private:
  std::vector<std::size_t> candidate_features() {
    const std::size_t n = ds_.n_features();
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    if (rng_ == nullptr || max_features_ >= n) return all;
    // Partial Fisher-Yates: the first max_features slots are the sample.
    for (std::size_t i = 0; i < max_features_; ++i) {
      auto j = i + static_cast<std::size_t>(rng_->bounded(n - i));
      std::swap(all[i], all[j]);
    }
    all.resize(max_features_);
    std::sort(all.begin(), all.end());
    return all;
  }

  void grow(std::vector<TreeNode>& nodes, std::vector<std::size_t>& rows, int depth) {
    const std::size_t index = nodes.size();
    nodes.emplace_back();
    TreeNode node;
    node.counts = count_labels(ds_, rows);
    node.predicted_class = majority(node.counts);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    const bool too_small = rows.size() < static_cast<std::size_t>(params_.min_samples_split);
    std::optional<Split> split;
    if (!pure && !depth_capped && !too_small) {
      SplitOptions options;
      options.min_samples_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
      options.features = candidate_features();
      split = best_split(ds_, rows, options);
    }
    if (!split) {
      nodes[index] = node;
      return;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
      (ds_.features.at(r, split->feature_index) <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    node.feature_index = split->feature_index;
    node.threshold = split->threshold;
    grow(nodes, left, depth + 1);
    node.right = nodes.size();
    grow(nodes, right, depth + 1);
    nodes[index] = node;
  }

  const LabeledDataset& ds_;
  TreeParams params_;
  SeededRng* rng_;
  std::size_t max_features_;
};

void validate_params(const TreeParams& p) {
  if (p.max_depth && *p.max_depth < 0) throw ValidationError("max_depth must be non-negative");
  if (p.min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
  if (p.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be at least 1");
}

void check_labels(const LabeledDataset& ds) {
  if (ds.features.rows() != ds.labels.size()) throw ValidationError("feature rows and labels differ in length");
  for (int y : ds.labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }
}

std::size_t subtree_depth(const std::vector<TreeNode>& nodes, std::size_t i) {
  if (nodes[i].is_leaf()) return 0;
  return 1 + std::max(subtree_depth(nodes, i + 1), subtree_depth(nodes, nodes[i].right));
}

void render(const DecisionTreeModel& m, std::size_t i, int depth, std::string& out) {
  std::string indent;
  for (int d = 0; d < depth; ++d) indent += "|   ";
  const auto& node = m.nodes[i];
  if (node.is_leaf()) {
    out += indent + "|--- class: " + std::to_string(node.predicted_class) + " (counts: [" +
           std::to_string(node.counts[0]) + ", " + std::to_string(node.counts[1]) + "])\n";
    return;
  }
  const auto f = *node.feature_index;
  const std::string name = f < m.feature_names.size() ? m.feature_names[f] : "feature_" + std::to_string(f);
  const std::string t = format_threshold(node.threshold);
  out += indent + "|--- " + name + " <= " + t + "\n";
  render(m, i + 1, depth + 1, out);
  out += indent + "|--- " + name + " > " + t + "\n";
  render(m, node.right, depth + 1, out);
}

std::size_t read_node(const nlohmann::json& arr, std::size_t& pos, std::vector<TreeNode>& nodes) {
  if (pos >= arr.size()) throw DecodeError("model json: truncated node list");
  const auto& j = arr[pos++];
  const std::size_t index = nodes.size();
  nodes.emplace_back();
  TreeNode node;
  auto counts = j.at("counts").get<std::vector<std::size_t>>();
  if (counts.size() != 2) throw DecodeError("model json: counts must have 2 entries");
  node.counts = {counts[0], counts[1]};
  node.predicted_class = majority(node.counts);
  if (j.contains("feature_index")) {
    node.feature_index = j.at("feature_index").get<std::size_t>();
    node.threshold = j.at("threshold").get<double>();
    read_node(arr, pos, nodes);
    node.right = nodes.size();
    read_node(arr, pos, nodes);
  }
  nodes[index] = node;
  return index;
}

}  // namespace

double gini(std::span<const std::size_t> class_counts) {
  const double total = std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
  if (total <= 0.0) throw ValidationError("gini of an empty node");
  double sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sq += p * p;
  }
  return 1.0 - sq;
}

std::optional<Split> best_split(const LabeledDataset& ds, std::span<const std::size_t> rows,
                                const SplitOptions& options) {
  if (rows.size() < 2) return std::nullopt;
  const ClassCounts total = count_labels(ds, rows);
  if (total[0] == 0 || total[1] == 0) return std::nullopt;

  std::vector<std::size_t> features = options.features;
  if (features.empty()) {
    features.resize(ds.n_features());
    std::iota(features.begin(), features.end(), 0);
  }
  const std::size_t n = rows.size();
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_samples_leaf);

  std::optional<Split> best;
  Quality best_quality;
  std::vector<std::pair<double, int>> column(n);
  for (auto f : features) {
    for (std::size_t i = 0; i < n; ++i) column[i] = {ds.features.at(rows[i], f), ds.labels[rows[i]]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left{};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[static_cast<std::size_t>(column[i].second)] += 1;
      if (column[i].first == column[i + 1].first) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const ClassCounts right{total[0] - left[0], total[1] - left[1]};
      Quality q{Wide(sum_sq(left)) * n_right + Wide(sum_sq(right)) * n_left, Wide(n_left) * n_right};
      if (!best || q.better_than(best_quality)) {
        best_quality = q;
        const double weighted = (static_cast<double>(n_left) * gini(left) +
                                 static_cast<double>(n_right) * gini(right)) / static_cast<double>(n);
        best = Split{f, midpoint(column[i].first, column[i + 1].first), weighted};
      }
    }
  }
  return best;
}

int DecisionTreeModel::predict(std::span<const double> row) const {
  if (nodes.empty()) throw ValidationError("model has no nodes");
  if (!feature_names.empty() && row.size() != feature_names.size()) {
    throw ValidationError("expected " + std::to_string(feature_names.size()) + " features, got " +
                          std::to_string(row.size()));
  }
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto f = *nodes[i].feature_index;
    if (f >= row.size()) throw ValidationError("feature index out of range for row");
    i = row[f] <= nodes[i].threshold ? i + 1 : nodes[i].right;
  }
  return nodes[i].predicted_class;
}

std::size_t DecisionTreeModel::depth() const { return nodes.empty() ? 0 : subtree_depth(nodes, 0); }

std::size_t DecisionTreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

DecisionTreeModel build_tree(const LabeledDataset& train, const TreeParams& params) {
  if (train.size() == 0) throw ValidationError("cannot build a tree from an empty training set");
  validate_params(params);
  check_labels(train);
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), 0);
  return TreeBuilder(train, params, nullptr, train.n_features()).build(std::move(rows));
}

int predict_tree(const DecisionTreeModel& model, std::span<const double> row) { return model.predict(row); }

TuneGrid TuneGrid::defaults() {
  TuneGrid grid;
  for (int d = 1; d <= 10; ++d) grid.max_depths.emplace_back(d);
  grid.max_depths.emplace_back(std::nullopt);
  grid.min_samples_leaf = {1, 2, 5, 10};
  return grid;
}

std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed,
                                      bool* stratified) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> fold(n, 0);
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  const bool can_stratify = std::all_of(by_class.begin(), by_class.end(), [&](const auto& members) {
    return members.empty() || members.size() >= folds;
  });
  if (stratified != nullptr) *stratified = can_stratify;

  auto perm = seeded_permutation(n, derive_seed(seed, 0));
  if (!can_stratify) {
    for (std::size_t k = 0; k < n; ++k) fold[perm[k]] = k % folds;
    return fold;
  }
  // Visit rows in permuted order; each class deals its rows round-robin,
  // continuing from where the previous class stopped.
  std::size_t next = 0;
  for (int cls : {0, 1}) {
    for (auto i : perm) {
      if (labels[i] != cls) continue;
      fold[i] = next % folds;
      ++next;
    }
  }
  return fold;
}

std::size_t cross_validate_correct(const LabeledDataset& train, const TreeParams& params,
                                   std::span<const std::size_t> fold_of_row, std::size_t folds) {
  std::size_t correct = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    std::vector<std::size_t> fit_rows;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < train.size(); ++i) (fold_of_row[i] == k ? held_out : fit_rows).push_back(i);
    if (held_out.empty() || fit_rows.empty()) continue;
    auto model = build_tree(train.subset(fit_rows), params);
    for (auto i : held_out) correct += model.predict(train.features.row(i)) == train.labels[i] ? 1 : 0;
  }
  return correct;
}

TuneResult tune_tree(const LabeledDataset& train, const TuneGrid& grid, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("folds must be at least 2");
  if (train.size() < folds)
    throw ValidationError("need at least " + std::to_string(folds) + " rows for " + std::to_string(folds) + "-fold CV");
  if (grid.max_depths.empty() || grid.min_samples_leaf.empty()) throw ValidationError("empty tuning grid");
  check_labels(train);

  TuneResult result;
  auto fold_of_row = assign_folds(train.labels, folds, seed, &result.stratified);

  // Visit candidates from simplest to most complex so that a strict
  // improvement is required to move away from a simpler tree.
  auto depths = grid.max_depths;
  std::stable_sort(depths.begin(), depths.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  auto leaves = grid.min_samples_leaf;
  std::sort(leaves.begin(), leaves.end(), std::greater<>());

  std::optional<std::size_t> best_correct;
  for (const auto& depth : depths) {
    for (int leaf : leaves) {
      TreeParams params{depth, grid.min_samples_split, leaf};
      const auto correct = cross_validate_correct(train, params, fold_of_row, folds);
      result.scores.push_back({params, correct, static_cast<double>(correct) / static_cast<double>(train.size())});
      if (!best_correct || correct > *best_correct) {
        best_correct = correct;
        result.best = params;
      }
    }
  }
  result.cv_accuracy = static_cast<double>(*best_correct) / static_cast<double>(train.size());
  result.model = build_tree(train, result.best);
  return result;
}

ForestModel build_forest(const LabeledDataset& train, const ForestParams& params) {
  if (train.size() == 0) throw ValidationError("cannot build a forest from an empty training set");
  if (params.n_trees < 1) throw ValidationError("n_trees must be at least 1");
  if (params.max_features < 1 || params.max_features > train.n_features())
    throw ValidationError("max_features must lie in [1, " + std::to_string(train.n_features()) + "]");
  validate_params(params.tree);
  check_labels(train);

  ForestModel forest;
  forest.params = params;
  forest.trees.reserve(params.n_trees);
  const std::size_t n = train.size();
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    SeededRng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> sample(n);
    if (params.bootstrap) {
      for (auto& s : sample) s = static_cast<std::size_t>(rng.bounded(n));
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    auto bag = train.subset(sample);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    forest.trees.push_back(TreeBuilder(bag, params.tree, &rng, params.max_features).build(std::move(rows)));
  }
  return forest;
}

int predict_forest(const ForestModel& model, std::span<const double> row) {
  if (model.trees.empty()) throw ValidationError("forest has no trees");
  std::size_t ones = 0;
  for (const auto& tree : model.trees) ones += tree.predict(row) == 1 ? 1 : 0;
  return 2 * ones > model.trees.size() ? 1 : 0;
}

std::string format_threshold(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string render_tree_text(const DecisionTreeModel& model) {
  std::string out;
  if (!model.nodes.empty()) render(model, 0, 0, out);
  return out;
}

nlohmann::ordered_json tree_to_json(const DecisionTreeModel& model) {
  nlohmann::ordered_json j;
  j["feature_names"] = model.feature_names;
  nlohmann::ordered_json params;
  params["max_depth"] = model.params.max_depth ? nlohmann::ordered_json(*model.params.max_depth) : nlohmann::ordered_json(nullptr);
  params["min_samples_split"] = model.params.min_samples_split;
  params["min_samples_leaf"] = model.params.min_samples_leaf;
  j["params"] = params;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& node : model.nodes) {
    nlohmann::ordered_json n;
    if (!node.is_leaf()) {
      n["feature_index"] = *node.feature_index;
      n["threshold"] = node.threshold;
    }
    n["counts"] = {node.counts[0], node.counts[1]};
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j;
}

DecisionTreeModel tree_from_json(const nlohmann::json& j) {
  try {
    DecisionTreeModel model;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("params");
    if (!p.at("max_depth").is_null()) model.params.max_depth = p.at("max_depth").get<int>();
    model.params.min_samples_split = p.at("min_samples_split").get<int>();
    model.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    const auto& arr = j.at("nodes");
    std::size_t pos = 0;
    if (!arr.empty()) read_node(arr, pos, model.nodes);
    if (pos != arr.size()) throw DecodeError("model json: trailing nodes");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("model json: ") + e.what());
  }
}

std::string model_digest(const DecisionTreeModel& model) {
  auto j = tree_to_json(model);
  nlohmann::ordered_json structure;
  structure["feature_names"] = j["feature_names"];
  structure["nodes"] = j["nodes"];
  const std::string bytes = structure.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<int> predict_all(const DecisionTreeModel& model, const FeatureMatrix& features) {
  std::vector<int> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out.push_back(model.predict(features.row(i)));
  return out;
}

std::vector<int> predict_all(const ForestModel& model, const FeatureMatrix& features) {
  std::vector<int> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out.push_back(predict_forest(model, features.row(i)));
  return out;
}

}  // namespace warden
