#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usagebib {

/// Transparent hash so unordered containers keyed by std::string accept
/// string_view lookups without allocating.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

/// Input-file content errors (aux series, entity maps, ...). Distinct from
/// ConfigError so the CLI can map them to different exit codes.
class DataError : public std::runtime_error {
 public:
  explicit DataError(std::string message) : std::runtime_error(std::move(message)) {}
};

std::string to_lower(std::string_view s);

/// Case-insensitive substring search; `needle_lower` must already be
/// lowercase. Empty needle matches everything.
bool ci_contains(std::string_view haystack, std::string_view needle_lower);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// Renders a double with 9 significant digits ("%.9g"), the fixed float
/// format used in every CSV report.
std::string format_g9(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

}  // namespace usagebib
