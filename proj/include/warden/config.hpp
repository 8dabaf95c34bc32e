#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "warden/error.hpp"

namespace warden {

/// A configuration value is missing or invalid; `field()` names it.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ValidationError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// "250ms", "15s", "2m", "1h". Throws ConfigError for other forms.
std::chrono::milliseconds parse_duration(std::string_view text, const std::string& field = "duration");
std::string format_duration(std::chrono::milliseconds d);

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> api_keys;
  bool auth_enabled = true;
  std::chrono::milliseconds scheduler_interval{30000};
  std::chrono::milliseconds worker_interval{15000};
  bool scheduler_enabled = true;
  bool worker_enabled = true;
  std::chrono::milliseconds sweep_grace{0};
  std::size_t batch_limit = 500;
  std::filesystem::path data_dir = "warden-data";
  std::size_t retrain_threshold = 25;
  bool watcher_enabled = true;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  std::string bind_address() const { return host + ":" + std::to_string(port); }
};

/// Splits "host:port"; throws ConfigError("bind", ...) when malformed.
void apply_bind(GatewayConfig& config, std::string_view bind);

/// Reads a flat `key = value` file (a TOML subset: strings, integers,
/// booleans, string arrays, # comments). Unknown keys are rejected.
GatewayConfig load_config(const std::filesystem::path& path);
GatewayConfig parse_config(std::string_view text);

using EnvLookup = std::function<const char*(const char*)>;

/// WARDEN_BIND, WARDEN_API_KEY (comma-separated), WARDEN_DATA_DIR and
/// WARDEN_SCHED_INTERVAL replace the corresponding fields when set.
void apply_env_overrides(GatewayConfig& config, const EnvLookup& getenv_fn);

}  // namespace warden
