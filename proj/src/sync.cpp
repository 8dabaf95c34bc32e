#include "warden/sync.hpp"

#include <nlohmann/json.hpp>

#include "warden/error.hpp"
#include "warden/fsutil.hpp"

namespace warden {

std::string_view to_string(SyncSource source) {
  return source == SyncSource::ApiTriggered ? "ApiTriggered" : "BackgroundWorker";
}

std::string encode_cursor(const SyncCursor& cursor) {
  nlohmann::ordered_json j;
  j["last_applied_version"] = cursor.last_applied_version;
  j["last_run_at"] = cursor.last_run_at ? nlohmann::ordered_json(iso8601(*cursor.last_run_at)) : nlohmann::ordered_json(nullptr);
  j["runs_completed"] = cursor.runs_completed;
  return j.dump(2) + "\n";
}

SyncCursor decode_cursor(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DecodeError("cursor file is not a JSON object");
  SyncCursor c;
  c.last_applied_version = j.value("last_applied_version", Version{0});
  c.runs_completed = j.value("runs_completed", std::uint64_t{0});
  if (j.contains("last_run_at") && j["last_run_at"].is_string()) {
    c.last_run_at = parse_iso8601(j["last_run_at"].get<std::string>());
  }
  return c;
}

SyncEngine::SyncEngine(const ChangeSource& source, DatasetSink& sink, std::filesystem::path cursor_path)
    : source_(source), sink_(sink), cursor_path_(std::move(cursor_path)) {
  if (!cursor_path_.empty() && std::filesystem::exists(cursor_path_)) {
    cursor_ = decode_cursor(read_file(cursor_path_));
  }
}

void SyncEngine::set_listener(DataChangedListener listener) {
  std::lock_guard lock(mu_);
  listener_ = std::move(listener);
}

SyncCursor SyncEngine::cursor() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

void SyncEngine::persist_cursor_locked(const SyncCursor& cursor) {
  if (cursor_path_.empty()) return;
  write_file_atomic(cursor_path_, encode_cursor(cursor));
}

SyncResult SyncEngine::apply_batch_locked(std::size_t batch_limit, SyncSource source) {
  SyncResult result;
  result.source = source;
  result.new_cursor = cursor_;

  std::vector<ChangeEntry> batch;
  try {
    batch = source_.changes_since(cursor_.last_applied_version, batch_limit);
  } catch (const WarehouseUnavailable& e) {
    result.error = e.what();
    result.warehouse_unavailable = true;
    return result;
  }

  SyncCursor next = cursor_;
  next.last_run_at = Clock::now();
  next.runs_completed += 1;
  try {
    sink_.ensure_published();
    if (!batch.empty()) {
      std::vector<CustomerRecord> records;
      records.reserve(batch.size());
      for (const auto& e : batch) records.push_back(e.record);
      sink_.upsert_rows(records);
      next.last_applied_version = batch.back().version;
    }
    persist_cursor_locked(next);
  } catch (const Error& e) {
    result.error = e.what();
    return result;
  } catch (const std::filesystem::filesystem_error& e) {
    result.error = e.what();
    return result;
  }
  cursor_ = next;
  result.applied = batch.size();
  result.new_cursor = next;
  return result;
}

void SyncEngine::notify_applied(const SyncResult& result) const {
  if (result.applied == 0) return;
  DataChangedListener listener;
  {
    std::lock_guard lock(mu_);
    listener = listener_;
  }
  if (listener) listener(result.applied);
}

SyncResult SyncEngine::run_sync(std::size_t batch_limit, SyncSource source) {
  if (batch_limit == 0) throw ValidationError("batch_limit must be positive");
  SyncResult result;
  {
    std::lock_guard lock(mu_);
    result = apply_batch_locked(batch_limit, source);
  }
  notify_applied(result);
  return result;
}

SyncResult SyncEngine::reconcile_sweep(std::chrono::milliseconds grace, std::size_t batch_limit) {
  if (batch_limit == 0) throw ValidationError("batch_limit must be positive");
  SyncResult result;
  {
    std::lock_guard lock(mu_);
    if (grace.count() > 0 && cursor_.last_run_at && Clock::now() - *cursor_.last_run_at < grace) {
      result.source = SyncSource::BackgroundWorker;
      result.new_cursor = cursor_;
      result.skipped = true;
      return result;
    }
    result = apply_batch_locked(batch_limit, SyncSource::BackgroundWorker);
  }
  notify_applied(result);
  return result;
}

}  // namespace warden
