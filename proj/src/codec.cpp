#include "warden/codec.hpp"

#include <charconv>

#include "warden/error.hpp"

namespace warden {
namespace {

template <typename T>
bool parse_int(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw DecodeError("row " + std::to_string(row) + ": " + what);
}

}  // namespace

std::string format_csv_row(const CustomerRecord& r) {
  std::string line = std::to_string(r.user_id);
  line += ',';
  line += to_string(r.gender);
  line += ',';
  line += std::to_string(r.age);
  line += ',';
  line += std::to_string(r.estimated_salary);
  line += ',';
  line += std::to_string(r.purchased);
  return line;
}

CustomerRecord parse_csv_row(std::string_view line, std::size_t row_number) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 5) row_error(row_number, "expected 5 fields, got " + std::to_string(fields.size()));

  CustomerRecord r;
  if (!parse_int(fields[0], r.user_id)) row_error(row_number, "bad User ID '" + std::string(fields[0]) + "'");
  auto gender = parse_gender(fields[1]);
  if (!gender) row_error(row_number, "bad Gender '" + std::string(fields[1]) + "'");
  r.gender = *gender;
  if (!parse_int(fields[2], r.age)) row_error(row_number, "bad Age '" + std::string(fields[2]) + "'");
  if (!parse_int(fields[3], r.estimated_salary))
    row_error(row_number, "bad EstimatedSalary '" + std::string(fields[3]) + "'");
  if (!parse_int(fields[4], r.purchased)) row_error(row_number, "bad Purchased '" + std::string(fields[4]) + "'");
  if (auto problem = validation_problem(r)) row_error(row_number, *problem);
  return r;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::vector<CustomerRecord> parse_csv_records(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kCsvHeader) {
    throw DecodeError("header mismatch: expected '" + std::string(kCsvHeader) + "', got '" +
                      std::string(lines.empty() ? std::string_view{} : lines.front()) + "'");
  }
  std::vector<CustomerRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    records.push_back(parse_csv_row(lines[i], i));
  }
  return records;
}

nlohmann::ordered_json to_json(const CustomerRecord& r) {
  nlohmann::ordered_json j;
  j["user_id"] = r.user_id;
  j["gender"] = to_string(r.gender);
  j["age"] = r.age;
  j["estimated_salary"] = r.estimated_salary;
  j["purchased"] = r.purchased;
  return j;
}

CustomerRecord record_from_json(const nlohmann::json& j) {
  try {
    CustomerRecord r;
    r.user_id = j.at("user_id").get<UserId>();
    auto gender = parse_gender(j.at("gender").get<std::string>());
    if (!gender) throw DecodeError("bad gender in " + j.dump());
    r.gender = *gender;
    r.age = j.at("age").get<int>();
    r.estimated_salary = j.at("estimated_salary").get<std::int64_t>();
    r.purchased = j.at("purchased").get<int>();
    if (auto problem = validation_problem(r)) throw DecodeError("bad record json: " + *problem);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("bad record json: ") + e.what());
  }
}

}  // namespace warden
