#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <thread>

#include "warden/dataset_sink.hpp"
#include "warden/evaluation.hpp"
#include "warden/mining.hpp"
#include "warden/preprocess.hpp"

namespace warden {

struct PatternDelta {
  double accuracy_change = 0.0;
  bool structure_changed = true;
};

/// One published retrain. Everything except trained_at is a deterministic
/// function of the snapshot and the pipeline configuration.
struct PatternReport {
  std::uint64_t id = 0;
  std::chrono::system_clock::time_point trained_at;
  std::uint64_t data_revision = 0;
  std::size_t n_rows = 0;
  std::size_t dropped_rows = 0;
  std::string tree_text;
  std::string model_digest;
  TreeParams best_params;
  double cv_accuracy = 0.0;
  EvaluationReport report;
  double forest_accuracy = 0.0;
  EvaluationReport forest_report;
  bool changed_from_previous = true;
  PatternDelta delta;

  double accuracy() const { return report.accuracy; }
};

nlohmann::ordered_json pattern_report_to_json(const PatternReport& report);
PatternReport pattern_report_from_json(const nlohmann::json& j);

struct PipelineConfig {
  SplitSpec split;
  /// Equal-width binning before the split; off unless set.
  std::optional<int> discretize_bins;
  TuneGrid grid = TuneGrid::defaults();
  std::size_t folds = 5;
  std::uint64_t cv_seed = 0;
  ForestParams forest;
  double epsilon = 0.005;
};

/// True iff there is no model yet or at least `threshold` rows arrived since
/// the last one.
bool should_retrain(std::size_t new_rows_since_last_train, std::size_t threshold, bool model_exists);

/// prev absent counts as a structural change with accuracy measured from 0.
PatternDelta diff_patterns(const PatternReport* prev, const PatternReport& next);

/// Everything a retrain produces; `report` is what gets served.
struct RetrainOutput {
  PatternReport report;
  DecisionTreeModel model;
  Standardizer standardizer;
  LabeledDataset scaled_rows;
  std::vector<int> predicted;
};

/// drop_incomplete -> select_features -> [discretize] -> split -> standardize ->
/// tune_tree -> evaluate -> build_forest -> evaluate. Throws UntrainableData
/// unless every class has at least two rows.
RetrainOutput retrain_pipeline(const DatasetSnapshot& snapshot, const PipelineConfig& config,
                               const PatternReport* previous);

/// Decision regions of the tree on a grid over the scaled feature plane, with
/// every row drawn as a point colored by its predicted class.
std::string render_decision_regions_svg(const DecisionTreeModel& model, const LabeledDataset& scaled_rows,
                                        std::span<const int> predicted);

/// Published reports under `<dir>/<id>/`. A report directory is assembled under
/// a temporary name and renamed into place, so it appears complete or not at all.
class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path dir);

  /// Writes report.txt, tree.txt, model.json, decision_regions.svg and
  /// meta.json. Requires output.report.id == next_id().
  void publish(const RetrainOutput& output);

  std::optional<PatternReport> latest() const;
  std::optional<PatternReport> get(std::uint64_t id) const;
  std::uint64_t latest_id() const;
  std::uint64_t next_id() const { return latest_id() + 1; }
  std::filesystem::path report_dir(std::uint64_t id) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, PatternReport> reports_;
};

struct WatcherConfig {
  std::size_t retrain_threshold = 25;
  PipelineConfig pipeline;
  /// Upper bound on how long the loop sleeps between checks.
  std::chrono::milliseconds poll_interval{500};
};

/// Counts rows applied by the sync pipeline and retrains once enough arrive.
/// Retrains are single-entry; rows signalled during a retrain stay pending.
class Watcher {
 public:
  Watcher(const DatasetSink& sink, ReportStore& store, WatcherConfig config);
  ~Watcher();

  Watcher(const Watcher&) = delete;
  Watcher& operator=(const Watcher&) = delete;

  /// Non-blocking; safe from any thread.
  void on_data_changed(std::size_t applied);

  void start();
  void stop();

  /// Synchronous retrain. Throws RetrainInProgress if one is running and
  /// UntrainableData if the snapshot cannot be trained on; the previous
  /// report stays published either way.
  PatternReport retrain_now();

  std::optional<PatternReport> latest() const { return store_.latest(); }
  std::size_t pending_rows() const { return pending_.load(); }
  std::uint64_t cumulative_rows() const { return cumulative_.load(); }
  const WatcherConfig& config() const { return config_; }

 private:
  void loop();

  const DatasetSink& sink_;
  ReportStore& store_;
  WatcherConfig config_;
  std::mutex retrain_mu_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<std::uint64_t> cumulative_{0};
  std::uint64_t failed_at_cumulative_ = UINT64_MAX;

  std::mutex wake_mu_;
  std::condition_variable wake_;
  bool running_ = false;
  bool signalled_ = false;
  std::thread thread_;
};

}  // namespace warden
