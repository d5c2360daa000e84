#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usagebib {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::string message) : std::runtime_error(std::move(message)) {}
};

/// Flat `key = value` config text: one entry per line, `#` comments, keys may
/// repeat. Values keep inner whitespace; surrounding whitespace and one pair
/// of double quotes are stripped.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueFile load(const std::string& path);

  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string_view fallback) const;
  std::vector<std::string> get_all(std::string_view key) const;
  bool has(std::string_view key) const;

  long long get_int(std::string_view key, long long fallback) const;
  double get_double(std::string_view key, double fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
};

}  // namespace usagebib
