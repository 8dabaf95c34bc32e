#include "warden/watcher.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "warden/error.hpp"
#include "warden/fsutil.hpp"

namespace warden {
namespace {

nlohmann::ordered_json params_json(const TreeParams& p) {
  nlohmann::ordered_json j;
  j["max_depth"] = p.max_depth ? nlohmann::ordered_json(*p.max_depth) : nlohmann::ordered_json(nullptr);
  j["min_samples_split"] = p.min_samples_split;
  j["min_samples_leaf"] = p.min_samples_leaf;
  return j;
}

TreeParams params_from_json(const nlohmann::json& j) {
  TreeParams p;
  if (!j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  return p;
}

double accuracy_of(std::span<const int> truth, std::span<const int> predicted) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i] ? 1 : 0;
  return truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace

nlohmann::ordered_json pattern_report_to_json(const PatternReport& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["trained_at"] = iso8601(r.trained_at);
  j["data_revision"] = r.data_revision;
  j["n_rows"] = r.n_rows;
  j["dropped_rows"] = r.dropped_rows;
  j["model_digest"] = r.model_digest;
  j["accuracy"] = r.accuracy();
  j["forest_accuracy"] = r.forest_accuracy;
  j["cv_accuracy"] = r.cv_accuracy;
  j["best_params"] = params_json(r.best_params);
  j["changed_from_previous"] = r.changed_from_previous;
  j["delta"] = {{"accuracy_change", r.delta.accuracy_change}, {"structure_changed", r.delta.structure_changed}};
  j["tree_text"] = r.tree_text;
  j["report"] = report_to_json(r.report);
  j["forest_report"] = report_to_json(r.forest_report);
  return j;
}

PatternReport pattern_report_from_json(const nlohmann::json& j) {
  try {
    PatternReport r;
    r.id = j.at("id").get<std::uint64_t>();
    r.trained_at = parse_iso8601(j.at("trained_at").get<std::string>());
    r.data_revision = j.at("data_revision").get<std::uint64_t>();
    r.n_rows = j.at("n_rows").get<std::size_t>();
    r.dropped_rows = j.at("dropped_rows").get<std::size_t>();
    r.model_digest = j.at("model_digest").get<std::string>();
    r.forest_accuracy = j.at("forest_accuracy").get<double>();
    r.cv_accuracy = j.at("cv_accuracy").get<double>();
    r.best_params = params_from_json(j.at("best_params"));
    r.changed_from_previous = j.at("changed_from_previous").get<bool>();
    r.delta.accuracy_change = j.at("delta").at("accuracy_change").get<double>();
    r.delta.structure_changed = j.at("delta").at("structure_changed").get<bool>();
    r.tree_text = j.at("tree_text").get<std::string>();
    r.report = report_from_json(j.at("report"));
    r.forest_report = report_from_json(j.at("forest_report"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("pattern report json: ") + e.what());
  }
}

bool should_retrain(std::size_t new_rows_since_last_train, std::size_t threshold, bool model_exists) {
  return !model_exists || new_rows_since_last_train >= threshold;
}

PatternDelta diff_patterns(const PatternReport* prev, const PatternReport& next) {
  if (prev == nullptr) return {next.accuracy(), true};
  return {next.accuracy() - prev->accuracy(), prev->model_digest != next.model_digest};
}

RetrainOutput retrain_pipeline(const DatasetSnapshot& snapshot, const PipelineConfig& config,
                               const PatternReport* previous) {
  std::vector<RawRecord> raw;
  raw.reserve(snapshot.rows.size());
  for (const auto& r : snapshot.rows) raw.push_back(to_raw(r));
  auto clean = drop_incomplete(raw);

  std::array<std::size_t, 2> per_class{};
  for (const auto& r : clean.rows) per_class[static_cast<std::size_t>(r.purchased)] += 1;
  if (per_class[0] < 2 || per_class[1] < 2) {
    throw UntrainableData("need at least 2 rows of each class, have " + std::to_string(per_class[0]) + " and " +
                          std::to_string(per_class[1]));
  }

  DatasetSnapshot cleaned{clean.rows, snapshot.revision};
  auto ds = select_features(cleaned);
  if (config.discretize_bins) ds = discretize(ds, *config.discretize_bins);
  auto split = train_test_split(ds, config.split);
  auto scaler = fit_standardizer(split.train);
  auto train = transform(split.train, scaler);
  auto test = transform(split.test, scaler);

  auto tuned = tune_tree(train, config.grid, config.folds, config.cv_seed);
  auto tree_pred = predict_all(tuned.model, test.features);
  auto forest = build_forest(train, config.forest);
  auto forest_pred = predict_all(forest, test.features);

  RetrainOutput out;
  auto& r = out.report;
  r.id = previous ? previous->id + 1 : 1;
  r.trained_at = std::chrono::system_clock::now();
  r.data_revision = snapshot.revision;
  r.n_rows = clean.rows.size();
  r.dropped_rows = clean.dropped;
  r.tree_text = render_tree_text(tuned.model);
  r.model_digest = model_digest(tuned.model);
  r.best_params = tuned.best;
  r.cv_accuracy = tuned.cv_accuracy;
  r.report = report(confusion(test.labels, tree_pred));
  r.forest_report = report(confusion(test.labels, forest_pred));
  r.forest_accuracy = accuracy_of(test.labels, forest_pred);
  r.delta = diff_patterns(previous, r);
  r.changed_from_previous = r.delta.structure_changed || std::abs(r.delta.accuracy_change) > config.epsilon;

  out.model = std::move(tuned.model);
  out.standardizer = scaler;
  out.scaled_rows = transform(ds, scaler);
  out.predicted = predict_all(out.model, out.scaled_rows.features);
  return out;
}

std::string render_decision_regions_svg(const DecisionTreeModel& model, const LabeledDataset& rows,
                                        std::span<const int> predicted) {
  constexpr int kGrid = 80;
  constexpr double kPlot = 480.0;
  constexpr double kMargin = 50.0;
  double lo[2] = {-3.0, -3.0};
  double hi[2] = {3.0, 3.0};
  for (std::size_t c = 0; c < 2 && c < rows.n_features(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      lo[c] = std::min(lo[c], rows.features.at(r, c) - 0.25);
      hi[c] = std::max(hi[c], rows.features.at(r, c) + 0.25);
    }
  }
  auto px = [&](double x) { return kMargin + (x - lo[0]) / (hi[0] - lo[0]) * kPlot; };
  auto py = [&](double y) { return kMargin + kPlot - (y - lo[1]) / (hi[1] - lo[1]) * kPlot; };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                static_cast<int>(kPlot + 2 * kMargin), static_cast<int>(kPlot + 2 * kMargin),
                static_cast<int>(kPlot + 2 * kMargin), static_cast<int>(kPlot + 2 * kMargin));
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g shape-rendering=\"crispEdges\">\n";
  const double cell = kPlot / kGrid;
  for (int gx = 0; gx < kGrid; ++gx) {
    for (int gy = 0; gy < kGrid; ++gy) {
      const double x = lo[0] + (gx + 0.5) / kGrid * (hi[0] - lo[0]);
      const double y = lo[1] + (gy + 0.5) / kGrid * (hi[1] - lo[1]);
      const double point[2] = {x, y};
      const int cls = model.predict(std::span<const double>(point, 2));
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                    kMargin + gx * cell, kMargin + kPlot - (gy + 1) * cell, cell, cell,
                    cls == 1 ? "#c6dbef" : "#fcbba1");
      svg += buf;
    }
  }
  svg += "</g>\n<g stroke=\"black\" stroke-width=\"0.5\">\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                  px(rows.features.at(r, 0)), py(rows.features.at(r, 1)),
                  predicted[r] == 1 ? "#2171b5" : "#cb181d");
    svg += buf;
  }
  svg += "</g>\n";
  const std::string xname = rows.feature_names.size() > 0 ? rows.feature_names[0] : "x0";
  const std::string yname = rows.feature_names.size() > 1 ? rows.feature_names[1] : "x1";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"14\">%s (scaled)</text>\n",
                kMargin + kPlot / 2, kPlot + 2 * kMargin - 15, xname.c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"15\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 %.1f)\">%s (scaled)</text>\n",
                kMargin + kPlot / 2, kMargin + kPlot / 2, yname.c_str());
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

ReportStore::ReportStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    const auto meta = entry.path() / "meta.json";
    if (!std::filesystem::exists(meta)) continue;
    auto j = nlohmann::json::parse(read_file(meta), nullptr, false);
    if (j.is_discarded()) continue;
    auto report = pattern_report_from_json(j);
    reports_[report.id] = std::move(report);
  }
}

std::filesystem::path ReportStore::report_dir(std::uint64_t id) const { return dir_ / std::to_string(id); }

void ReportStore::publish(const RetrainOutput& output) {
  std::lock_guard lock(mu_);
  const auto& r = output.report;
  const std::uint64_t expected = reports_.empty() ? 1 : reports_.rbegin()->first + 1;
  if (r.id != expected)
    throw ValidationError("report id " + std::to_string(r.id) + " out of sequence, expected " + std::to_string(expected));

  const auto final_dir = report_dir(r.id);
  auto staging = dir_ / (".staging-" + std::to_string(r.id));
  std::filesystem::remove_all(staging);
  std::filesystem::create_directories(staging);

  auto model_json = tree_to_json(output.model);
  model_json["standardizer"] = {{"means", output.standardizer.means}, {"std_devs", output.standardizer.std_devs}};

  write_file_atomic(staging / "report.txt", render_report_text(r.report));
  write_file_atomic(staging / "tree.txt", r.tree_text);
  write_file_atomic(staging / "model.json", model_json.dump(2) + "\n");
  write_file_atomic(staging / "decision_regions.svg",
                    render_decision_regions_svg(output.model, output.scaled_rows, output.predicted));
  write_file_atomic(staging / "meta.json", pattern_report_to_json(r).dump(2) + "\n");
  std::filesystem::remove_all(final_dir);
  std::filesystem::rename(staging, final_dir);
  reports_[r.id] = r;
}

std::optional<PatternReport> ReportStore::latest() const {
  std::lock_guard lock(mu_);
  if (reports_.empty()) return std::nullopt;
  return reports_.rbegin()->second;
}

std::optional<PatternReport> ReportStore::get(std::uint64_t id) const {
  std::lock_guard lock(mu_);
  auto it = reports_.find(id);
  if (it == reports_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t ReportStore::latest_id() const {
  std::lock_guard lock(mu_);
  return reports_.empty() ? 0 : reports_.rbegin()->first;
}

Watcher::Watcher(const DatasetSink& sink, ReportStore& store, WatcherConfig config)
    : sink_(sink), store_(store), config_(std::move(config)) {}

Watcher::~Watcher() { stop(); }

void Watcher::on_data_changed(std::size_t applied) {
  if (applied == 0) return;
  pending_ += applied;
  cumulative_ += applied;
  {
    std::lock_guard lock(wake_mu_);
    signalled_ = true;
  }
  wake_.notify_one();
}

void Watcher::start() {
  std::lock_guard lock(wake_mu_);
  if (running_) return;
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void Watcher::stop() {
  {
    std::lock_guard lock(wake_mu_);
    if (!running_) return;
    running_ = false;
  }
  wake_.notify_one();
  if (thread_.joinable()) thread_.join();
}

PatternReport Watcher::retrain_now() {
  std::unique_lock lock(retrain_mu_, std::try_to_lock);
  if (!lock.owns_lock()) throw RetrainInProgress();
  const std::size_t consumed = pending_.load();
  const auto snapshot = sink_.snapshot();
  const auto previous = store_.latest();
  auto output = retrain_pipeline(snapshot, config_.pipeline, previous ? &*previous : nullptr);
  store_.publish(output);
  pending_ -= std::min(consumed, pending_.load());
  spdlog::info("published pattern report {} (revision {}, accuracy {:.4f}, forest {:.4f}, changed {})",
               output.report.id, output.report.data_revision, output.report.accuracy(),
               output.report.forest_accuracy, output.report.changed_from_previous);
  return output.report;
}

void Watcher::loop() {
  while (true) {
    {
      std::unique_lock lock(wake_mu_);
      wake_.wait_for(lock, config_.poll_interval, [this] { return !running_ || signalled_; });
      if (!running_) return;
      signalled_ = false;
    }
    const bool has_model = store_.latest_id() > 0;
    if (sink_.row_count() == 0) continue;
    if (!should_retrain(pending_.load(), config_.retrain_threshold, has_model)) continue;
    // After an untrainable snapshot, wait for new rows before trying again.
    if (failed_at_cumulative_ == cumulative_.load()) continue;
    try {
      retrain_now();
    } catch (const RetrainInProgress&) {
      // The running retrain may not cover every pending row; the next poll rechecks.
    } catch (const std::exception& e) {
      failed_at_cumulative_ = cumulative_.load();
      spdlog::warn("retrain skipped: {}", e.what());
    }
  }
}

}  // namespace warden
