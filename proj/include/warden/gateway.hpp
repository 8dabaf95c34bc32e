#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "warden/config.hpp"
#include "warden/dataset_sink.hpp"
#include "warden/sync.hpp"
#include "warden/warehouse.hpp"
#include "warden/watcher.hpp"

namespace httplib {
class Server;
}

namespace warden {

inline constexpr const char* kApiKeyHeader = "X-API-Key";

/// Compares in time dependent only on the lengths, never on where the first
/// difference is.
bool constant_time_equals(std::string_view a, std::string_view b);

/// True iff `presented` matches one of `keys`. Every key is compared.
bool authenticate(std::string_view presented, const std::vector<std::string>& keys);

/// Runs `task` every `interval` on its own thread. A tick that overruns the
/// interval causes the missed ticks to be skipped, never queued.
class PeriodicTask {
 public:
  PeriodicTask(std::string name, std::chrono::milliseconds interval, std::function<void()> task);
  ~PeriodicTask();

  PeriodicTask(const PeriodicTask&) = delete;
  PeriodicTask& operator=(const PeriodicTask&) = delete;

  void start();
  void stop();
  std::uint64_t ticks() const { return ticks_.load(); }

 private:
  void run();

  std::string name_;
  std::chrono::milliseconds interval_;
  std::function<void()> task_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool running_ = false;
  std::atomic<std::uint64_t> ticks_{0};
  std::thread thread_;
};

/// The REST surface plus the loops behind it. Request handlers read only the
/// dataset sink and the report store; the warehouse is reached solely through
/// the sync engine, which POST /sync and the background sweep drive.
///
/// Routes: GET /health (open), GET /customers/social, POST /sync,
/// POST /model/train, GET /model/report. All but /health require X-API-Key.
class Gateway {
 public:
  Gateway(GatewayConfig config, const ChangeSource& warehouse, WatcherConfig watcher_config = {});
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds (port 0 picks a free port) and starts the server thread plus the
  /// enabled loops. Throws IoError if the address cannot be bound.
  void start();
  void stop();
  bool running() const { return running_.load(); }

  /// The bound port once started.
  int port() const { return port_; }
  const GatewayConfig& config() const { return config_; }

  DatasetSink& sink() { return sink_; }
  SyncEngine& sync() { return sync_; }
  ReportStore& reports() { return reports_; }
  Watcher& watcher() { return watcher_; }

  /// Starts or stops the interval scheduler independently of the server.
  void set_scheduler_enabled(bool enabled);

 private:
  void install_routes();
  void scheduler_tick();

  GatewayConfig config_;
  DatasetSink sink_;
  SyncEngine sync_;
  ReportStore reports_;
  Watcher watcher_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::unique_ptr<PeriodicTask> scheduler_;
  std::unique_ptr<PeriodicTask> worker_;
  std::atomic<bool> running_{false};
  int port_ = 0;
  std::chrono::steady_clock::time_point started_at_;
};

}  // namespace warden
