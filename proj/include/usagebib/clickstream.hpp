#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usagebib {

enum class Action { kDownload, kAbstractView, kOther };
enum class Channel { kDirect, kSearchEngine, kUnknown };

std::string_view action_token(Action a);
std::string_view channel_token(Channel c);

/// Sentinel user token for log lines whose user column is empty.
inline constexpr std::string_view kUnidentifiedUser = "UNIDENTIFIED";

/// An instant plus the explicit numeric UTC offset it was recorded with.
struct Timestamp {
  std::int64_t epoch_seconds = 0;
  std::int16_t offset_minutes = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// One user interaction from the access log.
struct LogRecord {
  Timestamp timestamp;
  std::string user_id;  // never empty; kUnidentifiedUser when unknown
  std::string ip;
  std::string hostname;    // may be empty
  std::string user_agent;  // may be empty
  Action action = Action::kOther;
  std::string pub_id;  // empty iff action == kOther
  Channel channel = Channel::kUnknown;

  bool identified() const { return user_id != kUnidentifiedUser; }

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

enum class ParseErrorKind {
  kWrongFieldCount,
  kBadTimestamp,
  kBadIp,
  kBadActionToken,
  kEmptyPubId,
  kUnexpectedPubId,
  kBadChannelToken,
};

std::string_view parse_error_name(ParseErrorKind k);

class LogParseError : public std::runtime_error {
 public:
  LogParseError(ParseErrorKind kind, int column, std::size_t line_no, std::string detail);

  ParseErrorKind kind() const { return kind_; }
  int column() const { return column_; }          // 1-based TSV column, 0 = whole line
  std::size_t line_no() const { return line_no_; }  // 0 when unknown
  const std::string& detail() const { return detail_; }

 private:
  ParseErrorKind kind_;
  int column_;
  std::size_t line_no_;
  std::string detail_;
};

/// Parses one 8-column TSV log line. A single trailing LF (optionally
/// preceded by CR) is tolerated. `line_no` is only used for error reporting.
LogRecord parse_log_line(std::string_view line, std::size_t line_no = 0);

/// Canonical TSV form of a record, without trailing newline. Reparsing the
/// result yields a field-equal record.
std::string serialize_log_line(const LogRecord& record);

/// Calendar year the record is attributed to. Year boundaries follow the
/// log convention of fixed UTC-05:00 with no daylight saving.
int attribution_year(const Timestamp& ts);

bool is_download(const LogRecord& record);

// --- timestamp helpers (exposed for the synthesizer and tests) ---

/// Strict RFC 3339 `YYYY-MM-DDTHH:MM:SS[.frac]{+|-}HH:MM`; 'Z' is rejected
/// because records must carry an explicit numeric offset.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

// --- country attribution ---

struct CountryCode {
  std::string code;  // two uppercase letters, or "UNKNOWN"

  static CountryCode unknown() { return {"UNKNOWN"}; }
  bool is_unknown() const { return code == "UNKNOWN"; }

  friend bool operator==(const CountryCode&, const CountryCode&) = default;
  friend auto operator<=>(const CountryCode&, const CountryCode&) = default;
};

/// Maps the hostname's top-level label to a country. "edu", "gov", "mil" and
/// "net" resolve to the USA; ISO ccTLDs resolve to their country (uk -> GB);
/// everything else, including an empty hostname, resolves to UNKNOWN. Total:
/// never fails. The ip argument is accepted for interface completeness but
/// attribution is hostname-based.
CountryCode attribute_country(std::string_view hostname, std::string_view ip);

/// True iff `tld` (lowercase) is a recognized ccTLD; fills `iso` with the
/// ISO 3166-1 alpha-2 code.
bool cctld_to_iso(std::string_view tld, std::string& iso);

// --- robot filtering ---

struct IpAddress {
  bool v6 = false;
  std::array<std::uint8_t, 16> bytes{};  // v4 uses bytes[0..3]

  static std::optional<IpAddress> parse(std::string_view text);
};

struct CidrBlock {
  bool v6 = false;
  std::array<std::uint8_t, 16> addr{};
  int prefix_len = 0;

  /// Throws ConfigError on malformed input.
  static CidrBlock parse(std::string_view text);
  bool contains(const IpAddress& ip) const;
};

struct RobotPolicy {
  std::vector<std::string> agent_patterns;  // lowercase substrings
  std::vector<std::string> agent_patterns_raw;
  std::vector<CidrBlock> ip_blocks;
  std::vector<std::string> ip_blocks_raw;

  void add_agent_pattern(std::string_view pattern);
  void add_ip_block(std::string_view cidr);

  /// `agent_pattern = <text>` / `ip_block = <cidr>` entries, one per line.
  static RobotPolicy parse(std::string_view text, std::string_view origin = "<string>");
  static RobotPolicy load(const std::string& path);
  std::string serialize() const;
};

/// True iff the user agent matches any pattern (case-insensitive substring)
/// or the source ip lies in any block. Pure function of its inputs.
bool is_robot(const LogRecord& record, const RobotPolicy& policy);

}  // namespace usagebib
