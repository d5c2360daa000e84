#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "usagebib/clickstream.hpp"
#include "usagebib/config.hpp"
#include "usagebib/rng.hpp"

using namespace usagebib;

namespace {

const char* kGoodLine =
    "2008-01-15T09:30:00-05:00\tu123\t131.142.1.1\tcfa.harvard.edu\tMozilla/5.0\tDOWNLOAD\t"
    "2007ApJ...999..123H\tDIRECT";

std::string with_field(int column, const std::string& value) {
  std::string out;
  const char* fields[8] = {"2008-01-15T09:30:00-05:00", "u123",     "131.142.1.1",
                           "cfa.harvard.edu",           "Mozilla/5.0", "DOWNLOAD",
                           "2007ApJ...999..123H",       "DIRECT"};
  for (int i = 0; i < 8; ++i) {
    if (i) out += '\t';
    out += (i == column - 1) ? value : fields[i];
  }
  return out;
}

// independent IPv4 CIDR containment: dotted-quad -> uint32 prefix compare
std::uint32_t ipv4_bits(const std::string& s) {
  unsigned a = 0, b = 0, c = 0, d = 0;
  REQUIRE(std::sscanf(s.c_str(), "%u.%u.%u.%u", &a, &b, &c, &d) == 4);
  return (a << 24) | (b << 16) | (c << 8) | d;
}

bool cidr_oracle(const std::string& ip, const std::string& block, int prefix) {
  const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
  return (ipv4_bits(ip) & mask) == (ipv4_bits(block) & mask);
}

}  // namespace

TEST_CASE("parse_log_line accepts the canonical record") {
  const LogRecord rec = parse_log_line(kGoodLine);
  CHECK(rec.user_id == "u123");
  CHECK(rec.ip == "131.142.1.1");
  CHECK(rec.hostname == "cfa.harvard.edu");
  CHECK(rec.user_agent == "Mozilla/5.0");
  CHECK(rec.action == Action::kDownload);
  CHECK(rec.pub_id == "2007ApJ...999..123H");
  CHECK(rec.channel == Channel::kDirect);
  CHECK(attribution_year(rec.timestamp) == 2008);
  CHECK(is_download(rec));

  // trailing newline tolerated
  CHECK(parse_log_line(std::string(kGoodLine) + "\n") == rec);
}

TEST_CASE("parse_log_line rejects malformed lines with column info") {
  auto expect_error = [](const std::string& line, ParseErrorKind kind, int column) {
    try {
      parse_log_line(line, 7);
      FAIL_CHECK("expected parse error for: " << line);
    } catch (const LogParseError& e) {
      CHECK(e.kind() == kind);
      CHECK(e.column() == column);
      CHECK(e.line_no() == 7);
    }
  };
  expect_error(with_field(6, "FULLTEXT"), ParseErrorKind::kBadActionToken, 6);
  expect_error(with_field(7, ""), ParseErrorKind::kEmptyPubId, 7);
  expect_error("only\tthree\tcolumns", ParseErrorKind::kWrongFieldCount, 0);
  expect_error(std::string(kGoodLine) + "\textra", ParseErrorKind::kWrongFieldCount, 0);
  expect_error(with_field(1, "2008-13-15T09:30:00-05:00"), ParseErrorKind::kBadTimestamp, 1);
  expect_error(with_field(1, "2008-01-15T09:30:00Z"), ParseErrorKind::kBadTimestamp, 1);
  expect_error(with_field(1, "2008-01-15 09:30:00-05:00"), ParseErrorKind::kBadTimestamp, 1);
  expect_error(with_field(3, "not-an-ip"), ParseErrorKind::kBadIp, 3);
  expect_error(with_field(3, "999.1.1.1"), ParseErrorKind::kBadIp, 3);
  expect_error(with_field(8, "GOOGLE"), ParseErrorKind::kBadChannelToken, 8);

  // OTHER must carry no pub id; a pub id on OTHER is as invalid as a
  // missing one on DOWNLOAD
  std::string other = with_field(6, "OTHER");
  expect_error(other, ParseErrorKind::kUnexpectedPubId, 7);
}

TEST_CASE("abstract views need a pub id, OTHER must not have one") {
  std::string abstract_line = with_field(6, "ABSTRACT_VIEW");
  CHECK(parse_log_line(abstract_line).action == Action::kAbstractView);
  CHECK_FALSE(is_download(parse_log_line(abstract_line)));

  std::string other = with_field(6, "OTHER");
  other = other.substr(0, other.rfind("2007ApJ")) + "\tDIRECT";  // empty pub column
  const LogRecord rec = parse_log_line(other);
  CHECK(rec.action == Action::kOther);
  CHECK(rec.pub_id.empty());
  CHECK_FALSE(is_download(rec));
}

TEST_CASE("empty user and channel columns map to their sentinels") {
  const LogRecord rec = parse_log_line(with_field(2, "") + "");
  CHECK(rec.user_id == kUnidentifiedUser);
  CHECK_FALSE(rec.identified());

  const LogRecord rec2 = parse_log_line(with_field(8, ""));
  CHECK(rec2.channel == Channel::kUnknown);
}

TEST_CASE("timestamps keep their explicit offset and attribute by UTC-05:00") {
  // 01:00+01:00 is midnight UTC, 19:00 the previous day at UTC-05:00
  const auto early = parse_timestamp("2008-01-01T01:00:00+01:00");
  REQUIRE(early.has_value());
  CHECK(attribution_year(*early) == 2007);

  const auto late = parse_timestamp("2008-01-01T06:00:00+01:00");
  REQUIRE(late.has_value());
  CHECK(attribution_year(*late) == 2008);

  // fractional seconds tolerated, truncated
  const auto frac = parse_timestamp("2008-06-01T12:00:00.25-05:00");
  REQUIRE(frac.has_value());
  CHECK(frac->epoch_seconds == parse_timestamp("2008-06-01T12:00:00-05:00")->epoch_seconds);

  // half-hour offsets round-trip
  const auto ist = parse_timestamp("2010-03-04T10:15:00+05:30");
  REQUIRE(ist.has_value());
  CHECK(format_timestamp(*ist) == "2010-03-04T10:15:00+05:30");
}

TEST_CASE("serialize/parse round trip is field-equal") {
  Rng rng(20240817);
  const char* hosts[] = {"cfa.harvard.edu", "astro.ru.nl", "", "x.uni-bonn.de", "weird..host."};
  const char* agents[] = {"Mozilla/5.0", "", "tab-free agent (x11)", "curl/7.1"};
  const char* pubs[] = {"2007ApJ...999..123H", "B1999.0001", "p#1"};
  for (int i = 0; i < 300; ++i) {
    LogRecord rec;
    rec.timestamp.epoch_seconds = 1100000000 + static_cast<std::int64_t>(rng.below(500000000));
    rec.timestamp.offset_minutes = static_cast<std::int16_t>((rng.below(57) - 28) * 30);
    rec.user_id = rng.bernoulli(0.1) ? std::string(kUnidentifiedUser)
                                     : "user" + std::to_string(rng.below(1000));
    rec.ip = rng.bernoulli(0.2) ? "2001:db8::" + std::to_string(1 + rng.below(999))
                                : std::to_string(1 + rng.below(223)) + ".2.3.4";
    rec.hostname = hosts[rng.below(5)];
    rec.user_agent = agents[rng.below(4)];
    const auto action = static_cast<Action>(rng.below(3));
    rec.action = action;
    rec.pub_id = action == Action::kOther ? "" : pubs[rng.below(3)];
    rec.channel = static_cast<Channel>(rng.below(3));

    const std::string line = serialize_log_line(rec);
    const LogRecord reparsed = parse_log_line(line);
    CHECK(reparsed == rec);
  }
}

TEST_CASE("is_robot matches agent substrings case-insensitively") {
  RobotPolicy policy;
  policy.add_agent_pattern("googlebot");
  LogRecord rec = parse_log_line(kGoodLine);
  rec.user_agent = "Googlebot/2.1 (+http://www.google.com/bot.html)";
  CHECK(is_robot(rec, policy));
  rec.user_agent = "Mozilla/5.0";
  CHECK_FALSE(is_robot(rec, policy));

  // empty policy filters nothing
  CHECK_FALSE(is_robot(rec, RobotPolicy{}));
}

TEST_CASE("is_robot matches CIDR blocks, verified against an oracle") {
  RobotPolicy policy;
  policy.add_ip_block("66.249.64.0/24");
  LogRecord rec = parse_log_line(kGoodLine);

  rec.ip = "66.249.64.7";
  CHECK(is_robot(rec, policy));  // oracle-confirmed below
  CHECK(cidr_oracle("66.249.64.7", "66.249.64.0", 24));

  rec.ip = "66.249.65.7";
  CHECK_FALSE(is_robot(rec, policy));
  CHECK_FALSE(cidr_oracle("66.249.65.7", "66.249.64.0", 24));

  Rng rng(99);
  const int prefixes[] = {8, 12, 16, 20, 24, 28, 32};
  for (int i = 0; i < 500; ++i) {
    const std::string block = std::to_string(rng.below(256)) + "." + std::to_string(rng.below(256)) +
                              "." + std::to_string(rng.below(256)) + "." +
                              std::to_string(rng.below(256));
    const int prefix = prefixes[rng.below(7)];
    const std::string ip = std::to_string(rng.below(256)) + "." + std::to_string(rng.below(256)) +
                           "." + std::to_string(rng.below(256)) + "." +
                           std::to_string(rng.below(256));
    RobotPolicy p;
    p.add_ip_block(block + "/" + std::to_string(prefix));
    rec.ip = ip;
    CHECK(is_robot(rec, p) == cidr_oracle(ip, block, prefix));
  }

  // v6 blocks only match v6 addresses
  RobotPolicy p6;
  p6.add_ip_block("2001:db8:bad::/48");
  rec.ip = "2001:db8:bad:1::5";
  CHECK(is_robot(rec, p6));
  rec.ip = "2001:db8:aa::5";
  CHECK_FALSE(is_robot(rec, p6));
  rec.ip = "66.249.64.7";
  CHECK_FALSE(is_robot(rec, p6));
}

TEST_CASE("robot policy files parse and reject bad entries") {
  const RobotPolicy policy = RobotPolicy::parse(
      "# comment\n"
      "agent_pattern = GoogleBot\n"
      "agent_pattern = crawler\n"
      "ip_block = 10.0.0.0/8\n"
      "\n"
      "ip_block = 2001:db8::/32\n");
  CHECK(policy.agent_patterns.size() == 2);
  CHECK(policy.agent_patterns[0] == "googlebot");  // stored lowercase
  CHECK(policy.ip_blocks.size() == 2);

  CHECK_THROWS_AS(RobotPolicy::parse("ip_block = 10.0.0.0/40\n"), ConfigError);
  CHECK_THROWS_AS(RobotPolicy::parse("ip_block = banana/8\n"), ConfigError);
  CHECK_THROWS_AS(RobotPolicy::parse("frobnicate = yes\n"), ConfigError);
  CHECK_THROWS_AS(RobotPolicy::parse("agent_pattern =\n"), ConfigError);
  CHECK_THROWS_AS(RobotPolicy::parse("just some text\n"), ConfigError);
}

TEST_CASE("attribute_country maps gTLDs, ccTLDs and garbage") {
  auto code = [](const char* host) { return attribute_country(host, "").code; };
  CHECK(code("cfa.harvard.edu") == "US");
  CHECK(code("nray.gov") == "US");
  CHECK(code("navo.mil") == "US");
  CHECK(code("dialup-7.provider.net") == "US");
  CHECK(code("astro.ru.nl") == "NL");
  CHECK(code("mirror.ac.uk") == "GB");
  CHECK(code("WWW.UNI-BONN.DE") == "DE");
  CHECK(code("example.com") == "UNKNOWN");
  CHECK(code("example.org") == "UNKNOWN");
  CHECK(code("esa.int") == "UNKNOWN");
  CHECK(code("") == "UNKNOWN");
  CHECK(code("localhost") == "UNKNOWN");
  CHECK(code("131.142.1.1") == "UNKNOWN");
  CHECK(code("host.xx") == "UNKNOWN");  // two letters but not ISO-assigned
  CHECK(code("trailing.dot.") == "UNKNOWN");
}

TEST_CASE("attribute_country is total over arbitrary bytes") {
  Rng rng(7);
  const std::string alphabet = "abcXYZ019.-_~\xc3\xa9 ";
  for (int i = 0; i < 2000; ++i) {
    std::string host;
    const auto len = rng.below(12);
    for (std::uint64_t j = 0; j < len; ++j) host += alphabet[rng.below(alphabet.size())];
    const CountryCode cc = attribute_country(host, "");
    const bool two_upper = cc.code.size() == 2 && cc.code[0] >= 'A' && cc.code[0] <= 'Z' &&
                           cc.code[1] >= 'A' && cc.code[1] <= 'Z';
    CHECK((two_upper || cc.is_unknown()));
  }
}
