#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "warden/record.hpp"

namespace warden {

inline constexpr std::string_view kCsvHeader = "User ID,Gender,Age,EstimatedSalary,Purchased";

/// `15624510,Male,19,19000,0` (no trailing newline).
std::string format_csv_row(const CustomerRecord& record);

/// Parses and validates one data row. `row_number` is 1-based over data rows
/// and only used in error messages.
CustomerRecord parse_csv_row(std::string_view line, std::size_t row_number);

/// Splits text into lines, accepting LF or CRLF and an optional final newline.
std::vector<std::string_view> split_lines(std::string_view text);

/// Header check plus row parsing in file order; no duplicate or ordering checks.
std::vector<CustomerRecord> parse_csv_records(std::string_view text);

nlohmann::ordered_json to_json(const CustomerRecord& record);
CustomerRecord record_from_json(const nlohmann::json& j);

}  // namespace warden
