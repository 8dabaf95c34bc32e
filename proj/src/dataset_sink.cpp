#include "warden/dataset_sink.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

#include "warden/codec.hpp"
#include "warden/error.hpp"

namespace warden {

std::string encode_csv(const DatasetSnapshot& snapshot) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : snapshot.rows) {
    out += format_csv_row(r);
    out += '\n';
  }
  return out;
}

DatasetSnapshot decode_csv(std::string_view bytes) {
  DatasetSnapshot snap;
  snap.rows = parse_csv_records(bytes);
  std::sort(snap.rows.begin(), snap.rows.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  auto dup = std::adjacent_find(snap.rows.begin(), snap.rows.end(),
                                [](const auto& a, const auto& b) { return a.user_id == b.user_id; });
  if (dup != snap.rows.end()) throw DecodeError("duplicate user_id " + std::to_string(dup->user_id));
  return snap;
}

std::string encode_json(const DatasetSnapshot& snapshot) {
  std::string out = "[";
  for (std::size_t i = 0; i < snapshot.rows.size(); ++i) {
    if (i > 0) out += ',';
    out += to_json(snapshot.rows[i]).dump();
  }
  out += ']';
  return out;
}

void merge_rows(std::vector<CustomerRecord>& rows, const std::vector<CustomerRecord>& records) {
  for (const auto& r : records) validate(r);
  std::map<UserId, CustomerRecord> merged;
  for (const auto& r : rows) merged[r.user_id] = r;
  for (const auto& r : records) merged[r.user_id] = r;
  rows.clear();
  rows.reserve(merged.size());
  for (auto& [id, r] : merged) rows.push_back(r);
}

DatasetSink::DatasetSink(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  if (std::filesystem::exists(csv_path())) {
    current_ = decode_csv(read_file(csv_path()));
    if (std::filesystem::exists(dir_ / kMetaFile)) {
      auto meta = nlohmann::json::parse(read_file(dir_ / kMetaFile), nullptr, false);
      if (!meta.is_discarded()) current_.revision = meta.value("revision", std::uint64_t{0});
    }
  }
}

void DatasetSink::set_replace_hook(ReplaceHook hook) {
  std::lock_guard lock(mu_);
  hook_ = std::move(hook);
}

void DatasetSink::publish_locked(const DatasetSnapshot& next) {
  write_file_atomic(csv_path(), encode_csv(next), hook_);
  write_file_atomic(json_path(), encode_json(next), hook_);
  nlohmann::ordered_json meta;
  meta["revision"] = next.revision;
  meta["rows"] = next.rows.size();
  write_file_atomic(dir_ / kMetaFile, meta.dump() + "\n", hook_);
}

std::uint64_t DatasetSink::upsert_rows(const std::vector<CustomerRecord>& records) {
  std::lock_guard lock(mu_);
  DatasetSnapshot next = current_;
  merge_rows(next.rows, records);
  const bool first_publish = !std::filesystem::exists(csv_path());
  if (next.rows == current_.rows && !first_publish) return current_.revision;
  if (next.rows != current_.rows) ++next.revision;
  publish_locked(next);
  current_ = std::move(next);
  return current_.revision;
}

void DatasetSink::ensure_published() {
  std::lock_guard lock(mu_);
  if (std::filesystem::exists(csv_path())) return;
  publish_locked(current_);
}

bool DatasetSink::published() const { return std::filesystem::exists(csv_path()); }

DatasetSnapshot DatasetSink::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::uint64_t DatasetSink::revision() const {
  std::lock_guard lock(mu_);
  return current_.revision;
}

std::size_t DatasetSink::row_count() const {
  std::lock_guard lock(mu_);
  return current_.rows.size();
}

}  // namespace warden
