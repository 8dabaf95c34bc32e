#include "warden/config.hpp"

#include <charconv>
#include <cstdlib>

#include "warden/codec.hpp"
#include "warden/fsutil.hpp"

namespace warden {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view v, const std::string& field) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw ConfigError(field, "expected a quoted string");
  return std::string(v.substr(1, v.size() - 2));
}

bool parse_bool(std::string_view v, const std::string& field) {
  v = trim(v);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(field, "expected true or false");
}

std::size_t parse_count(std::string_view v, const std::string& field) {
  v = trim(v);
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(field, "expected an integer");
  return out;
}

std::vector<std::string> parse_string_array(std::string_view v, const std::string& field) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw ConfigError(field, "expected an array of strings");
  v = trim(v.substr(1, v.size() - 2));
  std::vector<std::string> out;
  while (!v.empty()) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.push_back(unquote(item, field));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  return out;
}

// Durations may be written quoted ("15s") or bare (15s).
std::chrono::milliseconds duration_value(std::string_view v, const std::string& field) {
  v = trim(v);
  if (!v.empty() && v.front() == '"') return parse_duration(unquote(v, field), field);
  return parse_duration(v, field);
}

}  // namespace

std::chrono::milliseconds parse_duration(std::string_view text, const std::string& field) {
  text = trim(text);
  std::size_t digits = 0;
  while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') ++digits;
  if (digits == 0) throw ConfigError(field, "bad duration '" + std::string(text) + "'");
  long long value = 0;
  std::from_chars(text.data(), text.data() + digits, value);
  const auto unit = text.substr(digits);
  if (unit == "ms") return std::chrono::milliseconds(value);
  if (unit == "s") return std::chrono::seconds(value);
  if (unit == "m") return std::chrono::minutes(value);
  if (unit == "h") return std::chrono::hours(value);
  throw ConfigError(field, "bad duration unit in '" + std::string(text) + "' (use ms, s, m or h)");
}

std::string format_duration(std::chrono::milliseconds d) {
  if (d.count() % 1000 == 0) return std::to_string(d.count() / 1000) + "s";
  return std::to_string(d.count()) + "ms";
}

void GatewayConfig::validate() const {
  if (host.empty()) throw ConfigError("bind", "host is empty");
  if (port < 0 || port > 65535) throw ConfigError("bind", "port out of range");
  if (auth_enabled && api_keys.empty()) throw ConfigError("api_keys", "at least one key is required when auth is enabled");
  for (const auto& k : api_keys) {
    if (k.empty()) throw ConfigError("api_keys", "keys must be non-empty");
  }
  if (scheduler_interval.count() <= 0) throw ConfigError("scheduler_interval", "must be greater than 0");
  if (worker_interval.count() <= 0) throw ConfigError("worker_interval", "must be greater than 0");
  if (sweep_grace.count() < 0) throw ConfigError("sweep_grace", "must not be negative");
  if (batch_limit == 0) throw ConfigError("batch_limit", "must be positive");
  if (retrain_threshold == 0) throw ConfigError("retrain_threshold", "must be positive");
  if (data_dir.empty()) throw ConfigError("data_dir", "is empty");
}

void apply_bind(GatewayConfig& config, std::string_view bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw ConfigError("bind", "expected host:port");
  int port = 0;
  auto ps = bind.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), port);
  if (ps.empty() || ec != std::errc() || ptr != ps.data() + ps.size()) throw ConfigError("bind", "bad port");
  config.host = std::string(bind.substr(0, colon));
  config.port = port;
}

GatewayConfig parse_config(std::string_view text) {
  GatewayConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    // Strip a trailing comment outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (value[i] == '"') quoted = !quoted;
      if (value[i] == '#' && !quoted) {
        value = trim(value.substr(0, i));
        break;
      }
    }

    if (key == "bind") {
      apply_bind(cfg, unquote(value, key));
    } else if (key == "api_keys") {
      cfg.api_keys = parse_string_array(value, key);
    } else if (key == "auth_enabled") {
      cfg.auth_enabled = parse_bool(value, key);
    } else if (key == "scheduler_interval") {
      cfg.scheduler_interval = duration_value(value, key);
    } else if (key == "worker_interval") {
      cfg.worker_interval = duration_value(value, key);
    } else if (key == "scheduler_enabled") {
      cfg.scheduler_enabled = parse_bool(value, key);
    } else if (key == "worker_enabled") {
      cfg.worker_enabled = parse_bool(value, key);
    } else if (key == "sweep_grace") {
      cfg.sweep_grace = duration_value(value, key);
    } else if (key == "batch_limit") {
      cfg.batch_limit = parse_count(value, key);
    } else if (key == "data_dir") {
      cfg.data_dir = unquote(value, key);
    } else if (key == "retrain_threshold") {
      cfg.retrain_threshold = parse_count(value, key);
    } else if (key == "watcher_enabled") {
      cfg.watcher_enabled = parse_bool(value, key);
    } else {
      throw ConfigError(key, "unknown configuration key");
    }
  }
  return cfg;
}

GatewayConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config", "file not found: " + path.string());
  return parse_config(read_file(path));
}

void apply_env_overrides(GatewayConfig& config, const EnvLookup& getenv_fn) {
  if (const char* v = getenv_fn("WARDEN_BIND"); v && *v) apply_bind(config, v);
  if (const char* v = getenv_fn("WARDEN_API_KEY"); v && *v) {
    config.api_keys.clear();
    std::string_view keys(v);
    while (!keys.empty()) {
      auto comma = keys.find(',');
      auto k = trim(keys.substr(0, comma));
      if (!k.empty()) config.api_keys.emplace_back(k);
      if (comma == std::string_view::npos) break;
      keys = keys.substr(comma + 1);
    }
  }
  if (const char* v = getenv_fn("WARDEN_DATA_DIR"); v && *v) config.data_dir = v;
  if (const char* v = getenv_fn("WARDEN_SCHED_INTERVAL"); v && *v)
    config.scheduler_interval = parse_duration(v, "scheduler_interval");
}

}  // namespace warden
