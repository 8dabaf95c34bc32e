#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "warden/record.hpp"

namespace warden {

enum class ChangeKind { Insert, Update };

std::string_view to_string(ChangeKind kind);

struct ChangeEntry {
  Version version = 0;
  CustomerRecord record;
  ChangeKind kind = ChangeKind::Insert;

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

/// Read side of the warehouse, the only surface the sync pipeline consumes.
class ChangeSource {
 public:
  virtual ~ChangeSource() = default;

  /// Up to `limit` entries with version > `cursor`, ascending.
  virtual std::vector<ChangeEntry> changes_since(Version cursor, std::size_t limit) const = 0;
  virtual Version latest_version() const = 0;
};

/// Authoritative record store with a gap-free, monotonically versioned change
/// log. When backed by a file, every instance opened on the same path (in this
/// or another process) observes one shared history: writers take an exclusive
/// flock, assign the next version and append; readers pick up appended lines
/// on their next call.
class Warehouse : public ChangeSource {
 public:
  /// In-memory store, nothing persisted.
  Warehouse();
  explicit Warehouse(std::filesystem::path log_path);
  ~Warehouse() override;

  Warehouse(const Warehouse&) = delete;
  Warehouse& operator=(const Warehouse&) = delete;

  /// Throws ValidationError without consuming a version.
  ChangeEntry upsert_record(const CustomerRecord& record);

  /// Loads a fixture CSV and upserts every row. The whole file is parsed
  /// before anything is written, so a malformed row leaves the store untouched.
  std::size_t seed_from_fixture(const std::filesystem::path& path);

  std::vector<ChangeEntry> changes_since(Version cursor, std::size_t limit) const override;
  Version latest_version() const override;

  /// Current record set ordered by user_id.
  std::vector<CustomerRecord> records() const;

 private:
  std::vector<ChangeEntry> append_locked(const std::vector<CustomerRecord>& records);
  void catch_up_locked() const;
  void apply_locked(const ChangeEntry& entry) const;

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  int fd_ = -1;
  mutable std::uint64_t consumed_bytes_ = 0;
  mutable std::vector<ChangeEntry> log_;
  mutable std::map<UserId, CustomerRecord> current_;
};

/// Replays entries in version order onto an empty map.
std::map<UserId, CustomerRecord> replay(const std::vector<ChangeEntry>& entries);

}  // namespace warden
