#include "usagebib/config.hpp"

#include <charconv>

#include "usagebib/util.hpp"

namespace usagebib {

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view origin) {
  KeyValueFile kv;
  kv.origin_ = std::string(origin);
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(kv.origin_ + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got: " + std::string(line));
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(kv.origin_ + ":" + std::to_string(line_no) + ": empty key");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    kv.entries_.emplace_back(std::string(key), std::string(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  if (!file_exists(path)) throw ConfigError("config file not found: " + path);
  return parse(read_file(path), path);
}

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out = v;  // last occurrence wins
  }
  return out;
}

std::string KeyValueFile::get_or(std::string_view key, std::string_view fallback) const {
  auto v = get(key);
  return v ? *v : std::string(fallback);
}

std::vector<std::string> KeyValueFile::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

bool KeyValueFile::has(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError(origin_ + ": key '" + std::string(key) + "' is not an integer: " + *v);
  }
  return out;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing junk");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + std::string(key) + "' is not a number: " + *v);
  }
}

}  // namespace usagebib
