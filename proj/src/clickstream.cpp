#include "usagebib/clickstream.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>

#include "usagebib/config.hpp"
#include "usagebib/util.hpp"

namespace usagebib {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
// The log convention records times in EST; years are attributed under a
// fixed UTC-05:00 with no daylight saving so boundaries are deterministic.
constexpr std::int64_t kAttributionOffsetSeconds = -5 * 3600;

bool parse_fixed_digits(std::string_view s, std::size_t pos, int n, int& out) {
  int value = 0;
  for (int i = 0; i < n; ++i) {
    if (pos + i >= s.size()) return false;
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

int days_in_month(int year, unsigned month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string_view action_token(Action a) {
  switch (a) {
    case Action::kDownload: return "DOWNLOAD";
    case Action::kAbstractView: return "ABSTRACT_VIEW";
    case Action::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string_view channel_token(Channel c) {
  switch (c) {
    case Channel::kDirect: return "DIRECT";
    case Channel::kSearchEngine: return "SEARCH_ENGINE";
    case Channel::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view parse_error_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::kWrongFieldCount: return "WRONG_FIELD_COUNT";
    case ParseErrorKind::kBadTimestamp: return "BAD_TIMESTAMP";
    case ParseErrorKind::kBadIp: return "BAD_IP";
    case ParseErrorKind::kBadActionToken: return "BAD_ACTION_TOKEN";
    case ParseErrorKind::kEmptyPubId: return "EMPTY_PUB_ID";
    case ParseErrorKind::kUnexpectedPubId: return "UNEXPECTED_PUB_ID";
    case ParseErrorKind::kBadChannelToken: return "BAD_CHANNEL_TOKEN";
  }
  return "UNKNOWN_ERROR";
}

LogParseError::LogParseError(ParseErrorKind kind, int column, std::size_t line_no,
                             std::string detail)
    : std::runtime_error(std::string(parse_error_name(kind)) + " at line " +
                         std::to_string(line_no) + ", column " + std::to_string(column) +
                         (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      column_(column),
      line_no_(line_no),
      detail_(std::move(detail)) {}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp < 10 ? mp + 3 : mp - 9;
  year = static_cast<int>(y + (month <= 2));
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.frac](+|-)HH:MM
  int year, month, day, hour, minute, second;
  if (!parse_fixed_digits(s, 0, 4, year)) return std::nullopt;
  if (s.size() < 20 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_fixed_digits(s, 5, 2, month) || !parse_fixed_digits(s, 8, 2, day)) {
    return std::nullopt;
  }
  if (s[10] != 'T' && s[10] != 't') return std::nullopt;
  if (!parse_fixed_digits(s, 11, 2, hour)) return std::nullopt;
  if (s[13] != ':' || !parse_fixed_digits(s, 14, 2, minute)) return std::nullopt;
  if (s[16] != ':' || !parse_fixed_digits(s, 17, 2, second)) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;  // "12:00:00." with no digits
  }
  if (pos >= s.size() || (s[pos] != '+' && s[pos] != '-')) return std::nullopt;
  const bool negative = s[pos] == '-';
  ++pos;
  int off_h, off_m;
  if (!parse_fixed_digits(s, pos, 2, off_h)) return std::nullopt;
  if (pos + 2 >= s.size() || s[pos + 2] != ':') return std::nullopt;
  if (!parse_fixed_digits(s, pos + 3, 2, off_m)) return std::nullopt;
  if (pos + 5 != s.size()) return std::nullopt;

  if (month < 1 || month > 12) return std::nullopt;
  if (day < 1 || day > days_in_month(year, static_cast<unsigned>(month))) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  if (off_h > 23 || off_m > 59) return std::nullopt;

  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                            static_cast<unsigned>(day));
  const std::int64_t local = days * kSecondsPerDay + hour * 3600 + minute * 60 + second;
  std::int16_t offset = static_cast<std::int16_t>(off_h * 60 + off_m);
  if (negative) offset = static_cast<std::int16_t>(-offset);
  return Timestamp{local - offset * 60, offset};
}

std::string format_timestamp(const Timestamp& ts) {
  const std::int64_t local = ts.epoch_seconds + static_cast<std::int64_t>(ts.offset_minutes) * 60;
  const std::int64_t days = floor_div(local, kSecondsPerDay);
  std::int64_t rem = local - days * kSecondsPerDay;
  int year;
  unsigned month, day;
  civil_from_days(days, year, month, day);
  const int hour = static_cast<int>(rem / 3600);
  const int minute = static_cast<int>((rem % 3600) / 60);
  const int second = static_cast<int>(rem % 60);
  const int off = ts.offset_minutes;
  const char sign = off < 0 ? '-' : '+';
  const int aoff = off < 0 ? -off : off;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d%c%02d:%02d", year, month, day,
                hour, minute, second, sign, aoff / 60, aoff % 60);
  return buf;
}

int attribution_year(const Timestamp& ts) {
  const std::int64_t shifted = ts.epoch_seconds + kAttributionOffsetSeconds;
  int year;
  unsigned month, day;
  civil_from_days(floor_div(shifted, kSecondsPerDay), year, month, day);
  return year;
}

bool is_download(const LogRecord& record) { return record.action == Action::kDownload; }

LogRecord parse_log_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::array<std::string_view, 8> cols;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    const std::string_view field =
        pos == std::string_view::npos ? line.substr(start) : line.substr(start, pos - start);
    if (n < cols.size()) cols[n] = field;
    ++n;
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (n != 8) {
    throw LogParseError(ParseErrorKind::kWrongFieldCount, 0, line_no,
                        "expected 8 tab-separated columns, found " + std::to_string(n));
  }

  LogRecord rec;
  const auto ts = parse_timestamp(cols[0]);
  if (!ts) {
    throw LogParseError(ParseErrorKind::kBadTimestamp, 1, line_no, std::string(cols[0]));
  }
  rec.timestamp = *ts;

  rec.user_id = cols[1].empty() ? std::string(kUnidentifiedUser) : std::string(cols[1]);

  if (!IpAddress::parse(cols[2])) {
    throw LogParseError(ParseErrorKind::kBadIp, 3, line_no, std::string(cols[2]));
  }
  rec.ip = std::string(cols[2]);
  rec.hostname = std::string(cols[3]);
  rec.user_agent = std::string(cols[4]);

  if (cols[5] == "DOWNLOAD") {
    rec.action = Action::kDownload;
  } else if (cols[5] == "ABSTRACT_VIEW") {
    rec.action = Action::kAbstractView;
  } else if (cols[5] == "OTHER") {
    rec.action = Action::kOther;
  } else {
    throw LogParseError(ParseErrorKind::kBadActionToken, 6, line_no, std::string(cols[5]));
  }

  if (rec.action == Action::kOther) {
    if (!cols[6].empty()) {
      throw LogParseError(ParseErrorKind::kUnexpectedPubId, 7, line_no, std::string(cols[6]));
    }
  } else if (cols[6].empty()) {
    throw LogParseError(ParseErrorKind::kEmptyPubId, 7, line_no,
                        std::string(action_token(rec.action)));
  }
  rec.pub_id = std::string(cols[6]);

  if (cols[7] == "DIRECT") {
    rec.channel = Channel::kDirect;
  } else if (cols[7] == "SEARCH_ENGINE") {
    rec.channel = Channel::kSearchEngine;
  } else if (cols[7] == "UNKNOWN" || cols[7].empty()) {
    rec.channel = Channel::kUnknown;
  } else {
    throw LogParseError(ParseErrorKind::kBadChannelToken, 8, line_no, std::string(cols[7]));
  }
  return rec;
}

std::string serialize_log_line(const LogRecord& r) {
  std::string out = format_timestamp(r.timestamp);
  out += '\t';
  out += r.user_id;
  out += '\t';
  out += r.ip;
  out += '\t';
  out += r.hostname;
  out += '\t';
  out += r.user_agent;
  out += '\t';
  out += action_token(r.action);
  out += '\t';
  out += r.pub_id;
  out += '\t';
  out += channel_token(r.channel);
  return out;
}

CountryCode attribute_country(std::string_view hostname, std::string_view /*ip*/) {
  if (hostname.empty()) return CountryCode::unknown();
  const std::size_t dot = hostname.rfind('.');
  const std::string_view label =
      dot == std::string_view::npos ? hostname : hostname.substr(dot + 1);
  if (label.empty()) return CountryCode::unknown();
  const std::string tld = to_lower(label);
  if (tld == "edu" || tld == "gov" || tld == "mil" || tld == "net") return CountryCode{"US"};
  std::string iso;
  if (cctld_to_iso(tld, iso)) return CountryCode{iso};
  return CountryCode::unknown();
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  if (text.empty() || text.size() >= INET6_ADDRSTRLEN) return std::nullopt;
  char buf[INET6_ADDRSTRLEN];
  std::memcpy(buf, text.data(), text.size());
  buf[text.size()] = '\0';
  IpAddress out;
  in_addr v4{};
  if (inet_pton(AF_INET, buf, &v4) == 1) {
    out.v6 = false;
    std::memcpy(out.bytes.data(), &v4, 4);
    return out;
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, buf, &v6) == 1) {
    out.v6 = true;
    std::memcpy(out.bytes.data(), &v6, 16);
    return out;
  }
  return std::nullopt;
}

CidrBlock CidrBlock::parse(std::string_view text) {
  const std::size_t slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw ConfigError("CIDR missing prefix length: " + std::string(text));
  }
  const auto addr = IpAddress::parse(text.substr(0, slash));
  if (!addr) throw ConfigError("CIDR has invalid address: " + std::string(text));
  const std::string_view len_text = text.substr(slash + 1);
  int len = -1;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size()) {
    throw ConfigError("CIDR has invalid prefix length: " + std::string(text));
  }
  const int max_len = addr->v6 ? 128 : 32;
  if (len < 0 || len > max_len) {
    throw ConfigError("CIDR prefix length out of range: " + std::string(text));
  }
  CidrBlock block;
  block.v6 = addr->v6;
  block.addr = addr->bytes;
  block.prefix_len = len;
  return block;
}

bool CidrBlock::contains(const IpAddress& ip) const {
  if (ip.v6 != v6) return false;
  int remaining = prefix_len;
  for (std::size_t i = 0; i < 16 && remaining > 0; ++i) {
    const int bits = remaining >= 8 ? 8 : remaining;
    const std::uint8_t mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
    if ((ip.bytes[i] & mask) != (addr[i] & mask)) return false;
    remaining -= bits;
  }
  return true;
}

void RobotPolicy::add_agent_pattern(std::string_view pattern) {
  if (trim(pattern).empty()) throw ConfigError("empty agent_pattern matches everything");
  agent_patterns_raw.emplace_back(trim(pattern));
  agent_patterns.push_back(to_lower(trim(pattern)));
}

void RobotPolicy::add_ip_block(std::string_view cidr) {
  ip_blocks.push_back(CidrBlock::parse(trim(cidr)));
  ip_blocks_raw.emplace_back(trim(cidr));
}

RobotPolicy RobotPolicy::parse(std::string_view text, std::string_view origin) {
  RobotPolicy policy;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'agent_pattern = ...' or 'ip_block = ...'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "agent_pattern") {
        policy.add_agent_pattern(value);
      } else if (key == "ip_block") {
        policy.add_ip_block(value);
      } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return policy;
}

RobotPolicy RobotPolicy::load(const std::string& path) {
  if (!file_exists(path)) throw ConfigError("robot policy file not found: " + path);
  return parse(read_file(path), path);
}

std::string RobotPolicy::serialize() const {
  std::string out;
  for (const auto& p : agent_patterns_raw) {
    out += "agent_pattern = ";
    out += p;
    out += '\n';
  }
  for (const auto& b : ip_blocks_raw) {
    out += "ip_block = ";
    out += b;
    out += '\n';
  }
  return out;
}

bool is_robot(const LogRecord& record, const RobotPolicy& policy) {
  for (const auto& pattern : policy.agent_patterns) {
    if (ci_contains(record.user_agent, pattern)) return true;
  }
  if (!policy.ip_blocks.empty()) {
    const auto ip = IpAddress::parse(record.ip);
    if (ip) {
      for (const auto& block : policy.ip_blocks) {
        if (block.contains(*ip)) return true;
      }
    }
  }
  return false;
}

}  // namespace usagebib
