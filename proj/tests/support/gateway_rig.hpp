#pragma once

#include <httplib.h>

#include <thread>

#include "doubles.hpp"
#include "temp_dir.hpp"
#include "warden/gateway.hpp"

namespace testing_support {

inline constexpr const char* kTestKey = "test-key-0123456789";

/// A gateway on a free loopback port over an in-memory warehouse seen through
/// a call counter. Scheduler and worker are off unless the test enables them.
struct GatewayRig {
  TempDir dir;
  warden::Warehouse warehouse;
  CountingSource source{warehouse};
  std::unique_ptr<warden::Gateway> gateway;

  explicit GatewayRig(std::function<void(warden::GatewayConfig&)> tweak = {}) {
    warden::GatewayConfig cfg;
    cfg.port = 0;
    cfg.api_keys = {kTestKey};
    cfg.data_dir = dir.path();
    cfg.scheduler_enabled = false;
    cfg.worker_enabled = false;
    cfg.watcher_enabled = false;
    if (tweak) tweak(cfg);
    warden::WatcherConfig wcfg;
    wcfg.poll_interval = std::chrono::milliseconds(20);
    gateway = std::make_unique<warden::Gateway>(cfg, source, wcfg);
    gateway->start();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", gateway->port());
    c.set_read_timeout(std::chrono::seconds(30));
    return c;
  }

  static httplib::Headers auth() { return {{warden::kApiKeyHeader, kTestKey}}; }

  httplib::Result get(const std::string& path, httplib::Headers headers = auth()) const {
    return client().Get(path, headers);
  }
  httplib::Result post(const std::string& path, httplib::Headers headers = auth()) const {
    return client().Post(path, headers, "", "application/json");
  }
};

template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return pred();
}

}  // namespace testing_support
