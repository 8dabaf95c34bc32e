// warden: operator entry point for the data-mining gateway.
//
//   warden serve     --config warden.toml
//   warden seed      --fixture data/social_network_ads.csv
//   warden sync-once
//   warden train
//   warden report    [--id N] [--json]
//   warden simulate  --inserts 50 --interval 100ms
//
// Everything except serve and simulate runs in-process against --data-dir.

#include <CLI11.hpp>
#include <signal.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

#include "warden/config.hpp"
#include "warden/dataset_sink.hpp"
#include "warden/error.hpp"
#include "warden/evaluation.hpp"
#include "warden/gateway.hpp"
#include "warden/simulate.hpp"
#include "warden/sync.hpp"
#include "warden/warehouse.hpp"
#include "warden/watcher.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct UserError : warden::Error {
  using Error::Error;
};

struct CommonOptions {
  std::string config_path;
  std::string data_dir;
  bool json = false;
};

warden::GatewayConfig resolve_config(const CommonOptions& opts) {
  warden::GatewayConfig cfg;
  if (!opts.config_path.empty()) cfg = warden::load_config(opts.config_path);
  warden::apply_env_overrides(cfg, [](const char* name) { return std::getenv(name); });
  if (!opts.data_dir.empty()) cfg.data_dir = opts.data_dir;
  return cfg;
}

std::filesystem::path warehouse_path(const warden::GatewayConfig& cfg) { return cfg.data_dir / "warehouse.log"; }
std::filesystem::path sink_dir(const warden::GatewayConfig& cfg) { return cfg.data_dir / "sink"; }
std::filesystem::path reports_dir(const warden::GatewayConfig& cfg) { return cfg.data_dir / "reports"; }

int cmd_serve(const CommonOptions& opts) {
  auto cfg = resolve_config(opts);
  cfg.validate();

  // Block termination signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  warden::Warehouse warehouse(warehouse_path(cfg));
  warden::Gateway gateway(cfg, warehouse);
  gateway.start();
  std::cout << "listening on " << cfg.host << ":" << gateway.port() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("received signal {}, shutting down", sig);
  gateway.stop();
  return kOk;
}

int cmd_seed(const CommonOptions& opts, const std::string& fixture) {
  auto cfg = resolve_config(opts);
  if (!std::filesystem::exists(fixture)) throw UserError("fixture not found: " + fixture);
  warden::Warehouse warehouse(warehouse_path(cfg));
  const auto n = warehouse.seed_from_fixture(fixture);
  std::cout << "seeded " << n << " records" << std::endl;
  return kOk;
}

int cmd_sync_once(const CommonOptions& opts) {
  auto cfg = resolve_config(opts);
  warden::Warehouse warehouse(warehouse_path(cfg));
  warden::DatasetSink sink(sink_dir(cfg));
  warden::SyncEngine engine(warehouse, sink, sink_dir(cfg) / warden::SyncEngine::kCursorFile);
  std::size_t total = 0;
  warden::SyncResult result;
  do {
    result = engine.run_sync(cfg.batch_limit, warden::SyncSource::ApiTriggered);
    if (result.error) throw warden::IoError("sync failed: " + *result.error);
    total += result.applied;
  } while (result.applied == cfg.batch_limit);
  std::cout << "applied " << total << " changes, cursor at version " << result.new_cursor.last_applied_version
            << ", sink revision " << sink.revision() << std::endl;
  return kOk;
}

int cmd_train(const CommonOptions& opts) {
  auto cfg = resolve_config(opts);
  warden::DatasetSink sink(sink_dir(cfg));
  if (!sink.published() || sink.row_count() == 0) throw UserError("dataset is empty; run seed and sync-once first");
  warden::ReportStore store(reports_dir(cfg));
  warden::WatcherConfig wcfg;
  wcfg.retrain_threshold = cfg.retrain_threshold;
  warden::Watcher watcher(sink, store, wcfg);
  auto report = watcher.retrain_now();
  if (opts.json) {
    std::cout << warden::pattern_report_to_json(report).dump(2) << std::endl;
  } else {
    std::cout << "report " << report.id << ": accuracy " << report.accuracy() << ", forest accuracy "
              << report.forest_accuracy << ", digest " << report.model_digest << std::endl;
  }
  return kOk;
}

int cmd_report(const CommonOptions& opts, std::optional<std::uint64_t> id) {
  auto cfg = resolve_config(opts);
  warden::ReportStore store(reports_dir(cfg));
  auto report = id ? store.get(*id) : store.latest();
  if (!report) throw UserError(id ? "no report with id " + std::to_string(*id) : std::string("no reports"));
  if (opts.json) {
    std::cout << warden::pattern_report_to_json(*report).dump(2) << std::endl;
  } else {
    std::cout << warden::render_report_text(report->report);
    std::cout << "\n" << report->tree_text;
  }
  return kOk;
}

int cmd_simulate(const CommonOptions& opts, std::size_t inserts, const std::string& interval, std::uint64_t seed,
                 const std::string& wait) {
  auto cfg = resolve_config(opts);
  warden::SimulateOptions sim;
  sim.inserts = inserts;
  sim.interval = warden::parse_duration(interval, "interval");
  sim.wait = warden::parse_duration(wait, "wait");
  sim.seed = seed;
  sim.host = cfg.host == "0.0.0.0" ? "127.0.0.1" : cfg.host;
  sim.port = cfg.port;
  if (!cfg.api_keys.empty()) sim.api_key = cfg.api_keys.front();

  warden::Warehouse warehouse(warehouse_path(cfg));
  auto outcome = warden::simulate(warehouse, sim);

  nlohmann::ordered_json j;
  j["inserted"] = outcome.inserted;
  j["before_id"] = outcome.before ? outcome.before->id : 0;
  j["before_accuracy"] = outcome.before ? nlohmann::ordered_json(outcome.before->accuracy()) : nlohmann::ordered_json();
  j["new_report_id"] = outcome.first_new ? nlohmann::ordered_json(outcome.first_new->id) : nlohmann::ordered_json();
  j["after_id"] = outcome.after ? outcome.after->id : 0;
  j["after_accuracy"] = outcome.after ? nlohmann::ordered_json(outcome.after->accuracy()) : nlohmann::ordered_json();
  j["final_digest"] = outcome.after ? outcome.after->model_digest : std::string();
  if (opts.json) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::cout << "inserted " << outcome.inserted << " records\n";
    std::cout << "before: " << (outcome.before ? "report " + std::to_string(outcome.before->id) + ", accuracy " +
                                                     warden::repr(outcome.before->accuracy())
                                               : std::string("no report"))
              << "\n";
    if (outcome.first_new) {
      std::cout << "new report " << outcome.first_new->id << " at data revision " << outcome.first_new->data_revision
                << "\n";
    }
    if (outcome.after) {
      std::cout << "after: report " << outcome.after->id << ", accuracy " << warden::repr(outcome.after->accuracy())
                << ", digest " << outcome.after->model_digest << "\n";
    }
  }
  if (inserts > 0 && !outcome.new_report_seen()) throw UserError("no new pattern report appeared within the wait");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  // stdout carries command output (and JSON with --json); logs go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("warden"));
  CLI::App app{"Secure data-mining gateway"};
  app.require_subcommand(1);
  CommonOptions opts;
  app.add_option("--config", opts.config_path, "Configuration file (key = value)");
  app.add_option("--data-dir", opts.data_dir, "Data directory (overrides config and WARDEN_DATA_DIR)");
  app.add_flag("--json", opts.json, "Machine-readable output");

  auto* serve = app.add_subcommand("serve", "Run the gateway, scheduler, worker and watcher");
  std::string fixture;
  auto* seed = app.add_subcommand("seed", "Load a fixture CSV into the warehouse");
  seed->add_option("--fixture", fixture, "Fixture CSV path")->required();
  auto* sync_once = app.add_subcommand("sync-once", "Drain pending warehouse changes into the sink");
  auto* train = app.add_subcommand("train", "Retrain on the current sink and publish a report");
  std::optional<std::uint64_t> report_id;
  auto* report = app.add_subcommand("report", "Print a pattern report (latest by default)");
  report->add_option("--id", report_id, "Report id");
  std::size_t inserts = 50;
  std::string interval = "100ms";
  std::string wait = "20s";
  std::uint64_t sim_seed = 7;
  auto* sim = app.add_subcommand("simulate", "Insert synthetic rows and watch the service adapt");
  sim->add_option("--inserts", inserts, "Rows to insert");
  sim->add_option("--interval", interval, "Delay between inserts, e.g. 100ms");
  sim->add_option("--seed", sim_seed, "Generator seed");
  sim->add_option("--wait", wait, "How long to wait for a new report");

  for (auto* sub : {serve, seed, sync_once, train, report, sim}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUserError;
  }

  try {
    if (*serve) return cmd_serve(opts);
    if (*seed) return cmd_seed(opts, fixture);
    if (*sync_once) return cmd_sync_once(opts);
    if (*train) return cmd_train(opts);
    if (*report) return cmd_report(opts, report_id);
    if (*sim) return cmd_simulate(opts, inserts, interval, sim_seed, wait);
  } catch (const warden::ConfigError& e) {
    std::cerr << "error: invalid configuration: " << e.what() << std::endl;
    return kUserError;
  } catch (const warden::UntrainableData& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUserError;
  } catch (const warden::ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUserError;
  } catch (const warden::DecodeError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUserError;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUserError;
  } catch (const warden::IoError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return kInternalError;
  }
  return kUserError;
}
