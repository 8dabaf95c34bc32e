#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "warden/dataset_sink.hpp"
#include "warden/record.hpp"

namespace warden {

/// Dense row-major matrix of doubles.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LabeledDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  std::size_t n_features() const { return features.cols(); }

  /// Rows picked by index, in the given order.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// A row as it arrives from an untrusted source: any field may be missing.
struct RawRecord {
  std::optional<UserId> user_id;
  std::optional<Gender> gender;
  std::optional<int> age;
  std::optional<std::int64_t> estimated_salary;
  std::optional<int> purchased;
};

RawRecord to_raw(const CustomerRecord& record);

/// Lenient CSV reader: unparseable fields become empty instead of failing.
std::vector<RawRecord> parse_raw_csv(std::string_view text);

struct CleanRows {
  std::vector<CustomerRecord> rows;
  std::size_t dropped = 0;
};

/// Removes rows with any missing or invalid field. Survivors keep their order
/// and values.
CleanRows drop_incomplete(const std::vector<RawRecord>& raw_rows);

/// Features [Age, EstimatedSalary], label Purchased. Throws ValidationError on
/// an empty snapshot.
LabeledDataset select_features(const DatasetSnapshot& snapshot);

struct SplitSpec {
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

/// Number of test rows for `n` rows: ceil(n * test_fraction), with a 1e-9
/// slack so 400 * 0.3 is 120 and not 121.
std::size_t test_row_count(std::size_t n, double test_fraction);

/// Portable Fisher-Yates: for i = n-1 down to 1, j = bounded(i + 1) where
/// bounded(m) draws from std::mt19937_64(seed) and rejects values at or above
/// the largest multiple of m to remove modulo bias.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// The first test_row_count() entries of seeded_permutation() go to test, the
/// rest to train.
TrainTestSplit train_test_split(const LabeledDataset& ds, const SplitSpec& spec);

struct Standardizer {
  std::vector<double> means;
  std::vector<double> std_devs;
};

/// Column means and population standard deviations.
Standardizer fit_standardizer(const LabeledDataset& train);

/// (x - mean) / std per column; zero-variance columns become 0.
LabeledDataset transform(const LabeledDataset& ds, const Standardizer& s);

/// Equal-width binning per column over [min, max]: bin = floor((x - min) / w)
/// with w = (max - min) / bins, clamped to bins - 1. Constant columns map to 0.
LabeledDataset discretize(const LabeledDataset& ds, int bins);

}  // namespace warden
