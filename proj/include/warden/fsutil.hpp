#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace warden {

/// Called after a temp file is fully written and before it is renamed over the
/// target. Throwing aborts the replace; sleeping widens the publish window.
using ReplaceHook = std::function<void(const std::filesystem::path& target)>;

/// Writes `bytes` to a sibling temp file, fsyncs it, then renames it over
/// `target` so readers see either the old or the new content.
void write_file_atomic(const std::filesystem::path& target, std::string_view bytes,
                       const ReplaceHook& hook = {});

/// Whole-file read. Throws IoError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// UTC timestamp formatted as 2024-01-31T12:34:56.789Z.
std::string iso8601(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_iso8601(std::string_view text);

}  // namespace warden
