#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "warden/warehouse.hpp"
#include "warden/watcher.hpp"

namespace warden {

/// Records drawn around the age/salary distribution of `existing`, labelled by
/// the fixed rule: purchased iff age >= 46, or age >= 36 and salary >= 88000.
/// User ids continue from the largest existing id.
std::vector<CustomerRecord> synthetic_records(const std::vector<CustomerRecord>& existing, std::size_t count,
                                              std::uint64_t seed);

struct SimulateOptions {
  std::size_t inserts = 50;
  std::chrono::milliseconds interval{100};
  std::uint64_t seed = 7;
  /// How long to wait for the service to publish a new report.
  std::chrono::milliseconds wait{20000};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string api_key;
  /// After the wait, drain the sync and retrain once so the final model
  /// covers every inserted row.
  bool settle = true;
};

struct SimulateOutcome {
  std::optional<PatternReport> before;
  /// First report published by the running service after the inserts began.
  std::optional<PatternReport> first_new;
  std::optional<PatternReport> after;
  std::size_t inserted = 0;

  bool new_report_seen() const { return first_new.has_value(); }
};

/// Inserts synthetic rows into `warehouse` at `interval`, then watches the
/// running service over HTTP for a new pattern report. Throws IoError when the
/// service cannot be reached.
SimulateOutcome simulate(Warehouse& warehouse, const SimulateOptions& options);

}  // namespace warden
