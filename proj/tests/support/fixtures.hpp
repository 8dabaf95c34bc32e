#pragma once

#include <filesystem>
#include <vector>

#include "warden/record.hpp"

namespace testing_support {

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(WARDEN_SOURCE_DIR) / relative;
}

/// The five dataset preview rows, in their original order.
inline std::vector<warden::CustomerRecord> fig1_rows() {
  using warden::Gender;
  return {
      {15624510, Gender::Male, 19, 19000, 0},
      {15810944, Gender::Male, 35, 20000, 0},
      {15686575, Gender::Female, 26, 43000, 0},
      {15603246, Gender::Female, 27, 57000, 0},
      {15804002, Gender::Male, 19, 76000, 0},
  };
}

}  // namespace testing_support
