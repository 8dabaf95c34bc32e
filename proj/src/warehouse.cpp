#include "warden/warehouse.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <nlohmann/json.hpp>

#include "warden/codec.hpp"
#include "warden/error.hpp"
#include "warden/fsutil.hpp"

namespace warden {
namespace {

class FileLock {
 public:
  FileLock(int fd, int op) : fd_(fd) {
    if (fd_ < 0) return;
    while (::flock(fd_, op) != 0) {
      if (errno != EINTR) throw IoError(std::string("flock failed: ") + std::strerror(errno));
    }
  }
  ~FileLock() {
    if (fd_ >= 0) ::flock(fd_, LOCK_UN);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

std::string encode_entry(const ChangeEntry& e) {
  nlohmann::ordered_json j;
  j["version"] = e.version;
  j["kind"] = to_string(e.kind);
  j["record"] = to_json(e.record);
  return j.dump() + "\n";
}

ChangeEntry decode_entry(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw IoError("corrupt change log line: " + std::string(line));
  ChangeEntry e;
  e.version = j.value("version", Version{0});
  auto kind = j.value("kind", std::string{});
  if (kind == "insert") {
    e.kind = ChangeKind::Insert;
  } else if (kind == "update") {
    e.kind = ChangeKind::Update;
  } else {
    throw IoError("corrupt change log kind: " + std::string(line));
  }
  e.record = record_from_json(j.at("record"));
  return e;
}

}  // namespace

std::string_view to_string(ChangeKind kind) { return kind == ChangeKind::Insert ? "insert" : "update"; }

Warehouse::Warehouse() = default;

Warehouse::Warehouse(std::filesystem::path log_path) : path_(std::move(log_path)) {
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  fd_ = ::open(path_->c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open change log " + path_->string() + ": " + std::strerror(errno));
  std::lock_guard lock(mu_);
  FileLock flock(fd_, LOCK_SH);
  catch_up_locked();
}

Warehouse::~Warehouse() {
  if (fd_ >= 0) ::close(fd_);
}

void Warehouse::apply_locked(const ChangeEntry& entry) const {
  const Version expected = log_.empty() ? 1 : log_.back().version + 1;
  if (entry.version != expected) {
    throw IoError("change log gap: expected version " + std::to_string(expected) + ", found " +
                  std::to_string(entry.version));
  }
  log_.push_back(entry);
  current_[entry.record.user_id] = entry.record;
}

// Consumes complete lines appended since the last call. A trailing line
// without '\n' is an in-flight or torn write and is left for later.
void Warehouse::catch_up_locked() const {
  if (fd_ < 0) return;
  struct stat st {};
  if (::fstat(fd_, &st) != 0) throw IoError("fstat on change log failed");
  const auto size = static_cast<std::uint64_t>(st.st_size);
  if (size <= consumed_bytes_) return;

  std::string chunk(size - consumed_bytes_, '\0');
  std::size_t got = 0;
  while (got < chunk.size()) {
    ssize_t n = ::pread(fd_, chunk.data() + got, chunk.size() - got, static_cast<off_t>(consumed_bytes_ + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("read on change log failed");
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  chunk.resize(got);

  std::size_t start = 0;
  while (true) {
    auto nl = chunk.find('\n', start);
    if (nl == std::string::npos) break;
    std::string_view line(chunk.data() + start, nl - start);
    if (!line.empty()) apply_locked(decode_entry(line));
    start = nl + 1;
  }
  consumed_bytes_ += start;
}

std::vector<ChangeEntry> Warehouse::append_locked(const std::vector<CustomerRecord>& records) {
  std::vector<ChangeEntry> entries;
  entries.reserve(records.size());
  std::map<UserId, bool> seen;
  Version next = log_.empty() ? 1 : log_.back().version + 1;
  std::string bytes;
  for (const auto& r : records) {
    ChangeEntry e;
    e.version = next++;
    e.record = r;
    const bool exists = current_.count(r.user_id) > 0 || seen.count(r.user_id) > 0;
    e.kind = exists ? ChangeKind::Update : ChangeKind::Insert;
    seen[r.user_id] = true;
    bytes += encode_entry(e);
    entries.push_back(e);
  }

  if (fd_ >= 0 && !bytes.empty()) {
    struct stat st {};
    ::fstat(fd_, &st);
    if (static_cast<std::uint64_t>(st.st_size) > consumed_bytes_) {
      // Torn tail from a crashed writer; we hold the exclusive lock.
      if (::ftruncate(fd_, static_cast<off_t>(consumed_bytes_)) != 0) throw IoError("cannot truncate torn log tail");
    }
    const char* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
      ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError(std::string("append to change log failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    ::fdatasync(fd_);
    consumed_bytes_ += bytes.size();
  }
  for (const auto& e : entries) apply_locked(e);
  return entries;
}

ChangeEntry Warehouse::upsert_record(const CustomerRecord& record) {
  validate(record);
  std::lock_guard lock(mu_);
  FileLock flock(fd_, LOCK_EX);
  catch_up_locked();
  return append_locked({record}).front();
}

std::size_t Warehouse::seed_from_fixture(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("fixture not found: " + path.string());
  auto records = parse_csv_records(read_file(path));
  std::lock_guard lock(mu_);
  FileLock flock(fd_, LOCK_EX);
  catch_up_locked();
  append_locked(records);
  return records.size();
}

std::vector<ChangeEntry> Warehouse::changes_since(Version cursor, std::size_t limit) const {
  std::lock_guard lock(mu_);
  {
    FileLock flock(fd_, LOCK_SH);
    catch_up_locked();
  }
  std::vector<ChangeEntry> out;
  // Versions are gap-free from 1, so entry v lives at index v - 1.
  for (std::size_t i = static_cast<std::size_t>(cursor); i < log_.size() && out.size() < limit; ++i) {
    out.push_back(log_[i]);
  }
  return out;
}

Version Warehouse::latest_version() const {
  std::lock_guard lock(mu_);
  {
    FileLock flock(fd_, LOCK_SH);
    catch_up_locked();
  }
  return log_.empty() ? 0 : log_.back().version;
}

std::vector<CustomerRecord> Warehouse::records() const {
  std::lock_guard lock(mu_);
  {
    FileLock flock(fd_, LOCK_SH);
    catch_up_locked();
  }
  std::vector<CustomerRecord> out;
  out.reserve(current_.size());
  for (const auto& [id, r] : current_) out.push_back(r);
  return out;
}

std::map<UserId, CustomerRecord> replay(const std::vector<ChangeEntry>& entries) {
  std::map<UserId, CustomerRecord> state;
  for (const auto& e : entries) state[e.record.user_id] = e.record;
  return state;
}

}  // namespace warden
