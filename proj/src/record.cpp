#include "warden/record.hpp"

#include "warden/error.hpp"

namespace warden {

std::string_view to_string(Gender g) { return g == Gender::Male ? "Male" : "Female"; }

std::optional<Gender> parse_gender(std::string_view text) {
  if (text == "Male") return Gender::Male;
  if (text == "Female") return Gender::Female;
  return std::nullopt;
}

std::optional<std::string> validation_problem(const CustomerRecord& record) {
  if (record.user_id == 0) return "user_id must be positive";
  if (record.age <= 0 || record.age >= 150)
    return "age " + std::to_string(record.age) + " outside (0, 150)";
  if (record.estimated_salary < 0)
    return "estimated_salary " + std::to_string(record.estimated_salary) + " is negative";
  if (record.purchased != 0 && record.purchased != 1)
    return "purchased " + std::to_string(record.purchased) + " not in {0,1}";
  return std::nullopt;
}

void validate(const CustomerRecord& record) {
  if (auto problem = validation_problem(record)) {
    throw ValidationError("user " + std::to_string(record.user_id) + ": " + *problem);
  }
}

}  // namespace warden
