#include "warden/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "warden/codec.hpp"
#include "warden/error.hpp"
#include "warden/rng.hpp"

namespace warden {

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ValidationError("row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.features = FeatureMatrix(indices.size(), n_features());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

RawRecord to_raw(const CustomerRecord& r) {
  return RawRecord{r.user_id, r.gender, r.age, r.estimated_salary, r.purchased};
}

namespace {

template <typename T>
std::optional<T> lenient_int(std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

std::vector<RawRecord> parse_raw_csv(std::string_view text) {
  auto lines = split_lines(text);
  std::vector<RawRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = lines[i].find(',', start);
      fields.push_back(lines[i].substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    fields.resize(5);
    RawRecord raw;
    raw.user_id = lenient_int<UserId>(fields[0]);
    raw.gender = parse_gender(fields[1]);
    raw.age = lenient_int<int>(fields[2]);
    raw.estimated_salary = lenient_int<std::int64_t>(fields[3]);
    raw.purchased = lenient_int<int>(fields[4]);
    out.push_back(raw);
  }
  return out;
}

CleanRows drop_incomplete(const std::vector<RawRecord>& raw_rows) {
  CleanRows out;
  for (const auto& raw : raw_rows) {
    if (!raw.user_id || !raw.gender || !raw.age || !raw.estimated_salary || !raw.purchased) {
      ++out.dropped;
      continue;
    }
    CustomerRecord r{*raw.user_id, *raw.gender, *raw.age, *raw.estimated_salary, *raw.purchased};
    if (validation_problem(r)) {
      ++out.dropped;
      continue;
    }
    out.rows.push_back(r);
  }
  return out;
}

LabeledDataset select_features(const DatasetSnapshot& snapshot) {
  if (snapshot.rows.empty()) throw ValidationError("cannot select features from an empty snapshot");
  LabeledDataset ds;
  ds.feature_names = {"Age", "EstimatedSalary"};
  ds.features = FeatureMatrix(snapshot.rows.size(), 2);
  ds.labels.reserve(snapshot.rows.size());
  for (std::size_t i = 0; i < snapshot.rows.size(); ++i) {
    const auto& r = snapshot.rows[i];
    ds.features.at(i, 0) = r.age;
    ds.features.at(i, 1) = static_cast<double>(r.estimated_salary);
    ds.labels.push_back(r.purchased);
  }
  return ds;
}

std::size_t test_row_count(std::size_t n, double test_fraction) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction - 1e-9));
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  SeededRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

TrainTestSplit train_test_split(const LabeledDataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw ValidationError("test_fraction must lie in (0, 1)");
  const std::size_t n = ds.size();
  const std::size_t n_test = test_row_count(n, spec.test_fraction);
  if (n < 2 || n_test == 0 || n_test >= n)
    throw ValidationError("degenerate split: " + std::to_string(n) + " rows, " + std::to_string(n_test) + " for test");

  auto perm = seeded_permutation(n, spec.seed);
  TrainTestSplit split;
  split.test_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  split.test = ds.subset(split.test_indices);
  split.train = ds.subset(split.train_indices);
  return split;
}

Standardizer fit_standardizer(const LabeledDataset& train) {
  if (train.size() == 0) throw ValidationError("cannot fit a standardizer on an empty dataset");
  const std::size_t cols = train.n_features();
  const double n = static_cast<double>(train.size());
  Standardizer s;
  s.means.assign(cols, 0.0);
  s.std_devs.assign(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < train.size(); ++r) sum += train.features.at(r, c);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t r = 0; r < train.size(); ++r) {
      const double d = train.features.at(r, c) - mean;
      sq += d * d;
    }
    s.means[c] = mean;
    s.std_devs[c] = std::sqrt(sq / n);
  }
  return s;
}

LabeledDataset transform(const LabeledDataset& ds, const Standardizer& s) {
  if (s.means.size() != ds.n_features() || s.std_devs.size() != ds.n_features())
    throw ValidationError("standardizer has " + std::to_string(s.means.size()) + " columns, dataset has " +
                          std::to_string(ds.n_features()));
  LabeledDataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t c = 0; c < out.n_features(); ++c) {
      double& x = out.features.at(r, c);
      x = s.std_devs[c] > 0.0 ? (x - s.means[c]) / s.std_devs[c] : 0.0;
    }
  }
  return out;
}

LabeledDataset discretize(const LabeledDataset& ds, int bins) {
  if (bins < 2) throw ValidationError("bins must be at least 2");
  if (ds.size() == 0) throw ValidationError("cannot discretize an empty dataset");
  LabeledDataset out = ds;
  for (std::size_t c = 0; c < ds.n_features(); ++c) {
    double lo = ds.features.at(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < ds.size(); ++r) {
      lo = std::min(lo, ds.features.at(r, c));
      hi = std::max(hi, ds.features.at(r, c));
    }
    const double width = (hi - lo) / bins;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      double& x = out.features.at(r, c);
      if (width <= 0.0) {
        x = 0.0;
        continue;
      }
      auto bin = static_cast<int>(std::floor((x - lo) / width));
      x = static_cast<double>(std::clamp(bin, 0, bins - 1));
    }
  }
  return out;
}

}  // namespace warden
