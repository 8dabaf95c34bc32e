#include "warden/simulate.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "warden/error.hpp"
#include "warden/gateway.hpp"
#include "warden/rng.hpp"

namespace warden {
namespace {

double gaussian(SeededRng& rng) {
  // Box-Muller; 1 - unit() keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

class ServiceClient {
 public:
  explicit ServiceClient(const SimulateOptions& o) : client_(o.host, o.port) {
    client_.set_connection_timeout(std::chrono::seconds(2));
    client_.set_read_timeout(std::chrono::seconds(60));
    if (!o.api_key.empty()) headers_.emplace(kApiKeyHeader, o.api_key);
  }

  std::optional<PatternReport> latest_report() {
    auto res = client_.Get("/model/report", headers_);
    if (!res) throw IoError("GET /model/report failed: " + httplib::to_string(res.error()));
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) throw IoError("GET /model/report returned " + std::to_string(res->status));
    return pattern_report_from_json(nlohmann::json::parse(res->body));
  }

  nlohmann::json post(const std::string& path, int* status) {
    auto res = client_.Post(path, headers_, "", "application/json");
    if (!res) throw IoError("POST " + path + " failed: " + httplib::to_string(res.error()));
    *status = res->status;
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    return j.is_discarded() ? nlohmann::json::object() : j;
  }

 private:
  httplib::Client client_;
  httplib::Headers headers_;
};

}  // namespace

std::vector<CustomerRecord> synthetic_records(const std::vector<CustomerRecord>& existing, std::size_t count,
                                              std::uint64_t seed) {
  double age_mean = 37.5, age_sd = 10.5, sal_mean = 70000.0, sal_sd = 34000.0;
  UserId next_id = 15500000;
  if (!existing.empty()) {
    double sa = 0, ss = 0;
    for (const auto& r : existing) {
      sa += r.age;
      ss += static_cast<double>(r.estimated_salary);
      next_id = std::max(next_id, r.user_id);
    }
    const double n = static_cast<double>(existing.size());
    age_mean = sa / n;
    sal_mean = ss / n;
    double va = 0, vs = 0;
    for (const auto& r : existing) {
      va += (r.age - age_mean) * (r.age - age_mean);
      vs += (static_cast<double>(r.estimated_salary) - sal_mean) * (static_cast<double>(r.estimated_salary) - sal_mean);
    }
    age_sd = std::max(1.0, std::sqrt(va / n));
    sal_sd = std::max(1000.0, std::sqrt(vs / n));
  }

  SeededRng rng(seed);
  std::vector<CustomerRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CustomerRecord r;
    r.user_id = next_id + 1 + i;
    r.gender = rng.bounded(2) == 0 ? Gender::Male : Gender::Female;
    r.age = std::clamp(static_cast<int>(std::lround(age_mean + age_sd * gaussian(rng))), 18, 60);
    const double salary = std::clamp(sal_mean + sal_sd * gaussian(rng), 15000.0, 150000.0);
    r.estimated_salary = static_cast<std::int64_t>(std::lround(salary / 1000.0)) * 1000;
    r.purchased = (r.age >= 46 || (r.age >= 36 && r.estimated_salary >= 88000)) ? 1 : 0;
    out.push_back(r);
  }
  return out;
}

SimulateOutcome simulate(Warehouse& warehouse, const SimulateOptions& options) {
  ServiceClient client(options);
  SimulateOutcome outcome;
  outcome.before = client.latest_report();

  auto records = synthetic_records(warehouse.records(), options.inserts, options.seed);
  for (std::size_t i = 0; i < records.size(); ++i) {
    warehouse.upsert_record(records[i]);
    ++outcome.inserted;
    if (i + 1 < records.size()) std::this_thread::sleep_for(options.interval);
  }

  const std::uint64_t before_id = outcome.before ? outcome.before->id : 0;
  const std::uint64_t before_rev = outcome.before ? outcome.before->data_revision : 0;
  if (options.inserts > 0) {
    const auto deadline = std::chrono::steady_clock::now() + options.wait;
    while (std::chrono::steady_clock::now() < deadline) {
      auto latest = client.latest_report();
      if (latest && latest->id > before_id && latest->data_revision > before_rev) {
        outcome.first_new = latest;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }

  if (options.settle && options.inserts > 0) {
    int status = 0;
    do {
      auto j = client.post("/sync", &status);
      if (status != 200) throw IoError("POST /sync returned " + std::to_string(status));
      if (j.value("applied", 0) == 0) break;
    } while (true);
    for (int attempt = 0; attempt < 200; ++attempt) {
      client.post("/model/train", &status);
      if (status != 409) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    if (status != 200) throw IoError("POST /model/train returned " + std::to_string(status));
  }
  outcome.after = client.latest_report();
  return outcome;
}

}  // namespace warden
