#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "warden/dataset_sink.hpp"
#include "warden/warehouse.hpp"

namespace warden {

using Clock = std::chrono::system_clock;

struct SyncCursor {
  Version last_applied_version = 0;
  std::optional<Clock::time_point> last_run_at;
  std::uint64_t runs_completed = 0;
};

std::string encode_cursor(const SyncCursor& cursor);
SyncCursor decode_cursor(std::string_view text);

enum class SyncSource { ApiTriggered, BackgroundWorker };

std::string_view to_string(SyncSource source);

struct SyncResult {
  std::size_t applied = 0;
  SyncCursor new_cursor;
  SyncSource source = SyncSource::ApiTriggered;
  /// Set when the warehouse was unreachable or the sink write failed. The
  /// cursor is not advanced in either case.
  std::optional<std::string> error;
  bool warehouse_unavailable = false;
  /// True when a sweep stood down because a sync ran within its grace period.
  bool skipped = false;

  bool ok() const { return !error.has_value(); }
};

/// Receives the count of applied entries after a successful non-empty sync.
using DataChangedListener = std::function<void(std::size_t applied)>;

/// Change-capture pipeline from a ChangeSource into a DatasetSink. Both the
/// API-triggered path and the background sweep share one cursor, and the
/// fetch/apply/advance step runs under a single mutex.
class SyncEngine {
 public:
  static constexpr std::size_t kDefaultBatchLimit = 500;
  static constexpr const char* kCursorFile = "cursor.json";

  /// `cursor_path` empty means the cursor lives only in memory.
  SyncEngine(const ChangeSource& source, DatasetSink& sink, std::filesystem::path cursor_path);

  SyncResult run_sync(std::size_t batch_limit = kDefaultBatchLimit,
                      SyncSource source = SyncSource::ApiTriggered);

  /// Background path. Drains whatever sits above the cursor, unless another
  /// sync completed less than `grace` ago, in which case it stands down.
  SyncResult reconcile_sweep(std::chrono::milliseconds grace = std::chrono::milliseconds{0},
                             std::size_t batch_limit = kDefaultBatchLimit);

  void set_listener(DataChangedListener listener);
  SyncCursor cursor() const;

 private:
  SyncResult apply_batch_locked(std::size_t batch_limit, SyncSource source);
  void notify_applied(const SyncResult& result) const;
  void persist_cursor_locked(const SyncCursor& cursor);

  const ChangeSource& source_;
  DatasetSink& sink_;
  std::filesystem::path cursor_path_;
  mutable std::mutex mu_;
  SyncCursor cursor_;
  DataChangedListener listener_;
};

}  // namespace warden
