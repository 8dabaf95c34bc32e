#include "warden/gateway.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <nlohmann/json.hpp>

#include "warden/error.hpp"
#include "warden/fsutil.hpp"

namespace warden {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

bool wants_csv(const httplib::Request& req) {
  if (req.has_param("format")) return req.get_param_value("format") == "csv";
  return req.get_header_value("Accept").find("text/csv") != std::string::npos;
}

nlohmann::ordered_json sync_result_json(const SyncResult& r) {
  nlohmann::ordered_json j;
  j["applied"] = r.applied;
  j["last_applied_version"] = r.new_cursor.last_applied_version;
  j["runs_completed"] = r.new_cursor.runs_completed;
  j["source"] = to_string(r.source);
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace

bool constant_time_equals(std::string_view a, std::string_view b) {
  const std::size_t n = std::max(a.size(), b.size());
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned char>(x ^ y);
  }
  return diff == 0;
}

bool authenticate(std::string_view presented, const std::vector<std::string>& keys) {
  bool ok = false;
  for (const auto& k : keys) ok |= constant_time_equals(presented, k);
  return ok && !presented.empty();
}

PeriodicTask::PeriodicTask(std::string name, std::chrono::milliseconds interval, std::function<void()> task)
    : name_(std::move(name)), interval_(interval), task_(std::move(task)) {}

PeriodicTask::~PeriodicTask() { stop(); }

void PeriodicTask::start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  thread_ = std::thread([this] { run(); });
}

void PeriodicTask::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void PeriodicTask::run() {
  using Steady = std::chrono::steady_clock;
  auto next = Steady::now() + interval_;
  while (true) {
    {
      std::unique_lock lock(mu_);
      if (cv_.wait_until(lock, next, [this] { return !running_; })) return;
    }
    try {
      task_();
    } catch (const std::exception& e) {
      spdlog::warn("{} tick failed: {}", name_, e.what());
    }
    ticks_ += 1;
    next += interval_;
    const auto now = Steady::now();
    if (next <= now) next = now + interval_;
  }
}

namespace {

GatewayConfig validated(GatewayConfig config) {
  config.validate();
  return config;
}

}  // namespace

Gateway::Gateway(GatewayConfig config, const ChangeSource& warehouse, WatcherConfig watcher_config)
    : config_(validated(std::move(config))),
      sink_(config_.data_dir / "sink"),
      sync_(warehouse, sink_, config_.data_dir / "sink" / SyncEngine::kCursorFile),
      reports_(config_.data_dir / "reports"),
      watcher_(sink_, reports_, [&] {
        watcher_config.retrain_threshold = config_.retrain_threshold;
        return watcher_config;
      }()) {
  sync_.set_listener([this](std::size_t applied) { watcher_.on_data_changed(applied); });
  install_routes();
}

Gateway::~Gateway() { stop(); }

void Gateway::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto& srv = *server_;
  // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  srv.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (req.path == "/health" || !config_.auth_enabled) return httplib::Server::HandlerResponse::Unhandled;
    if (authenticate(req.get_header_value(kApiKeyHeader), config_.api_keys))
      return httplib::Server::HandlerResponse::Unhandled;
    res.status = 401;
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::ordered_json j;
    j["status"] = "ok";
    j["sink_revision"] = sink_.revision();
    j["cursor_version"] = sync_.cursor().last_applied_version;
    j["model_version"] = reports_.latest_id();
    j["uptime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_at_).count();
    send_json(res, 200, j);
  });

  srv.Get("/customers/social", [this](const httplib::Request& req, httplib::Response& res) {
    const bool csv = wants_csv(req);
    const auto path = csv ? sink_.csv_path() : sink_.json_path();
    std::string body;
    try {
      body = read_file(path);
    } catch (const IoError&) {
      send_error(res, 503, "dataset not published yet");
      return;
    }
    res.status = 200;
    res.set_content(std::move(body), csv ? "text/csv" : "application/json");
  });

  srv.Post("/sync", [this](const httplib::Request&, httplib::Response& res) {
    auto result = sync_.run_sync(config_.batch_limit, SyncSource::ApiTriggered);
    int status = 200;
    if (result.warehouse_unavailable) {
      status = 502;
    } else if (result.error) {
      status = 500;
    }
    send_json(res, status, sync_result_json(result));
  });

  srv.Post("/model/train", [this](const httplib::Request&, httplib::Response& res) {
    try {
      auto report = watcher_.retrain_now();
      nlohmann::ordered_json j;
      j["id"] = report.id;
      j["data_revision"] = report.data_revision;
      j["accuracy"] = report.accuracy();
      j["forest_accuracy"] = report.forest_accuracy;
      j["model_digest"] = report.model_digest;
      j["changed_from_previous"] = report.changed_from_previous;
      send_json(res, 200, j);
    } catch (const RetrainInProgress& e) {
      send_error(res, 409, e.what());
    } catch (const UntrainableData& e) {
      send_error(res, 422, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 422, e.what());
    }
  });

  srv.Get("/model/report", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<PatternReport> report;
    if (req.has_param("id")) {
      std::uint64_t id = 0;
      try {
        id = std::stoull(req.get_param_value("id"));
      } catch (const std::exception&) {
        send_error(res, 400, "bad id");
        return;
      }
      report = reports_.get(id);
    } else {
      report = reports_.latest();
    }
    if (!report) {
      send_error(res, 404, "no model trained yet");
      return;
    }
    if (req.has_param("format") && req.get_param_value("format") == "text") {
      res.status = 200;
      res.set_content(render_report_text(report->report), "text/plain");
      return;
    }
    send_json(res, 200, pattern_report_to_json(*report));
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_error(res, 500, what);
  });
}

void Gateway::scheduler_tick() {
  const std::string host = config_.host == "0.0.0.0" ? "127.0.0.1" : config_.host;
  httplib::Client client(host, port_);
  client.set_connection_timeout(std::chrono::seconds(2));
  client.set_read_timeout(std::chrono::seconds(30));
  httplib::Headers headers;
  if (!config_.api_keys.empty()) headers.emplace(kApiKeyHeader, config_.api_keys.front());
  auto res = client.Post("/sync", headers, "", "application/json");
  if (!res) throw IoError("scheduler POST /sync failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw IoError("scheduler POST /sync returned " + std::to_string(res->status));
}

void Gateway::set_scheduler_enabled(bool enabled) {
  if (!enabled) {
    if (scheduler_) scheduler_->stop();
    scheduler_.reset();
    return;
  }
  if (scheduler_ || !running_) return;
  scheduler_ = std::make_unique<PeriodicTask>("scheduler", config_.scheduler_interval, [this] { scheduler_tick(); });
  scheduler_->start();
}

void Gateway::start() {
  if (running_) return;
  started_at_ = std::chrono::steady_clock::now();
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
    if (port_ <= 0) throw IoError("cannot bind " + config_.host + ":0");
  } else {
    if (!server_->bind_to_port(config_.host, config_.port))
      throw IoError("cannot bind " + config_.bind_address() + " (port in use?)");
    port_ = config_.port;
  }
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  running_ = true;
  spdlog::info("gateway listening on {}:{}", config_.host, port_);

  if (config_.watcher_enabled) watcher_.start();
  if (config_.worker_enabled) {
    worker_ = std::make_unique<PeriodicTask>("worker", config_.worker_interval, [this] {
      auto r = sync_.reconcile_sweep(config_.sweep_grace, config_.batch_limit);
      if (r.error) spdlog::warn("background sweep failed: {}", *r.error);
    });
    worker_->start();
  }
  if (config_.scheduler_enabled) set_scheduler_enabled(true);
}

void Gateway::stop() {
  if (!running_.exchange(false)) return;
  if (scheduler_) scheduler_->stop();
  if (worker_) worker_->stop();
  server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  watcher_.stop();
  scheduler_.reset();
  worker_.reset();
}

}  // namespace warden
