#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "warden/fsutil.hpp"
#include "warden/record.hpp"

namespace warden {

/// Rows are unique by user_id and sorted ascending, which makes both encodings
/// byte-stable for equal content.
struct DatasetSnapshot {
  std::vector<CustomerRecord> rows;
  std::uint64_t revision = 0;

  friend bool operator==(const DatasetSnapshot&, const DatasetSnapshot&) = default;
};

std::string encode_csv(const DatasetSnapshot& snapshot);
/// Validates every row, rejects duplicate user_ids, and returns rows in
/// canonical order. The decoded revision is always 0.
DatasetSnapshot decode_csv(std::string_view bytes);
std::string encode_json(const DatasetSnapshot& snapshot);

/// Merges `records` into `rows` by user_id (later records win) and restores
/// canonical order. Validates first; throws ValidationError without touching
/// `rows` if any record is invalid.
void merge_rows(std::vector<CustomerRecord>& rows, const std::vector<CustomerRecord>& records);

/// The published dataset: `dataset.csv` plus its `dataset.json` mirror and a
/// small `sink_meta.json` carrying the revision. Single writer, many readers;
/// every file is replaced atomically.
class DatasetSink {
 public:
  static constexpr const char* kCsvFile = "dataset.csv";
  static constexpr const char* kJsonFile = "dataset.json";
  static constexpr const char* kMetaFile = "sink_meta.json";

  /// Loads existing files from `dir` if present.
  explicit DatasetSink(std::filesystem::path dir);

  /// Applies a batch. The revision moves only if the encoded content changed.
  /// On any write failure the in-memory snapshot is left as it was.
  std::uint64_t upsert_rows(const std::vector<CustomerRecord>& records);

  /// Publishes an empty dataset if nothing has been published yet.
  void ensure_published();
  bool published() const;

  DatasetSnapshot snapshot() const;
  std::uint64_t revision() const;
  std::size_t row_count() const;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path csv_path() const { return dir_ / kCsvFile; }
  std::filesystem::path json_path() const { return dir_ / kJsonFile; }

  /// Test seam: runs before each file replace.
  void set_replace_hook(ReplaceHook hook);

 private:
  void publish_locked(const DatasetSnapshot& next);

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  DatasetSnapshot current_;
  ReplaceHook hook_;
};

}  // namespace warden
