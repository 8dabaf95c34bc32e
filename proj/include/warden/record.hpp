#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace warden {

using UserId = std::uint64_t;
using Version = std::uint64_t;

enum class Gender { Male, Female };

std::string_view to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view text);

/// One warehouse row, columns as in the social-network-ads dataset.
struct CustomerRecord {
  UserId user_id = 0;
  Gender gender = Gender::Male;
  int age = 0;
  std::int64_t estimated_salary = 0;
  int purchased = 0;

  friend bool operator==(const CustomerRecord&, const CustomerRecord&) = default;
};

/// Empty when the record satisfies every invariant, otherwise a message naming
/// the first offending field.
std::optional<std::string> validation_problem(const CustomerRecord& record);

/// Throws ValidationError when validation_problem() reports anything.
void validate(const CustomerRecord& record);

}  // namespace warden
