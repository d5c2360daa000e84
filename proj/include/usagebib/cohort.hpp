#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usagebib/clickstream.hpp"
#include "usagebib/corpus.hpp"

namespace usagebib {

/// Download tallies for one user in one calendar year. `downloaded_pubs`
/// keeps per-publication event counts so the unique set and the raw event
/// multiset are both recoverable downstream.
struct UserYearStats {
  std::string user_id;
  int year = 0;
  std::uint64_t interactions = 0;
  std::uint64_t downloads_total = 0;
  std::map<std::string, std::uint64_t, std::less<>> downloads_in_set;
  std::map<std::string, std::uint32_t, std::less<>> downloaded_pubs;
  CountryCode country = CountryCode::unknown();  // majority over the year's records
  std::string entity;                            // suffix-map attribution, "" if none

  std::uint64_t unique_downloads() const { return downloaded_pubs.size(); }

  friend bool operator==(const UserYearStats&, const UserYearStats&) = default;
};

struct CohortConfig {
  std::uint64_t lower = 100;
  std::uint64_t upper = 1000;
};

enum class CohortCategory { kAbstractOnly, kInfrequent, kFrequent, kRemainder };

std::string_view cohort_category_name(CohortCategory c);

/// Piecewise classification of a download count: 0 -> ABSTRACT_ONLY,
/// [1, lower) -> INFREQUENT, [lower, upper] -> FREQUENT, else REMAINDER.
/// Both bounds are inclusive.
CohortCategory classify_count(std::uint64_t downloads, const CohortConfig& config);

/// Classification of one user-year, counting either total downloads or only
/// those in the named journal set.
CohortCategory classify(const UserYearStats& stats, const CohortConfig& config,
                        std::optional<std::string_view> journal_restriction = std::nullopt);

struct CohortCounts {
  std::uint64_t abstract_only = 0;
  std::uint64_t infrequent = 0;
  std::uint64_t frequent = 0;
  std::uint64_t remainder = 0;

  std::uint64_t total() const { return abstract_only + infrequent + frequent + remainder; }
  std::uint64_t of(CohortCategory c) const;
};

CohortCounts cohort_counts(std::span<const UserYearStats> stats, int year,
                           const CohortConfig& config,
                           std::optional<std::string_view> journal_restriction = std::nullopt);

/// An entity is either a country (id is its ISO code, matched against the
/// record-derived country attribution) or an institute (matched against the
/// hostname-suffix entity map attribution). `affiliation` is the substring
/// used to build the entity's bibliography.
struct Entity {
  enum class Kind { kCountry, kInstitute };

  std::string id;
  Kind kind = Kind::kCountry;
  std::string affiliation;
};

bool entity_matches(const UserYearStats& stats, const Entity& entity);

std::set<std::string> frequent_users(std::span<const UserYearStats> stats, int year,
                                     const Entity& entity, const CohortConfig& config,
                                     std::optional<std::string_view> journal_restriction =
                                         std::nullopt);

/// Hostname-suffix -> entity-id mapping for institute-level attribution.
/// Longest matching suffix wins; matches are anchored at label boundaries.
class EntityMap {
 public:
  static EntityMap parse(std::string_view text, std::string_view origin = "<string>");
  static EntityMap load(const std::string& path);

  void add(std::string_view hostname_suffix, std::string_view entity_id);
  std::string_view lookup(std::string_view hostname) const;  // "" when unmapped
  bool maps_to(std::string_view entity_id) const;
  bool empty() const { return suffixes_.empty(); }
  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> suffixes_;  // lowercase, longest first
};

/// Mergeable aggregate over robot-filtered records. Partial accumulators
/// built from disjoint log shards merge by pointwise addition and set union,
/// so the result is independent of shard order and grouping.
class Accumulator {
 public:
  Accumulator(std::vector<JournalSet> journals, const Corpus* corpus, const EntityMap* entities);

  void add(const LogRecord& record);
  void merge(Accumulator&& other);

  /// Resolves majority attributions and returns stats sorted by
  /// (user_id, year). Ties in the country/entity vote break toward the
  /// lexicographically smallest value.
  std::vector<UserYearStats> finish() const;

  std::uint64_t unidentified_records() const { return unidentified_; }
  const std::vector<JournalSet>& journals() const { return journals_; }

 private:
  struct Partial {
    std::uint64_t interactions = 0;
    std::uint64_t downloads_total = 0;
    std::vector<std::uint64_t> downloads_in_set;
    std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> downloaded_pubs;
    std::map<std::string, std::uint64_t> country_votes;
    std::map<std::string, std::uint64_t> entity_votes;
  };

  struct KeyHash {
    std::size_t operator()(const std::pair<std::string, int>& k) const noexcept {
      return std::hash<std::string>{}(k.first) * 1315423911u ^ std::hash<int>{}(k.second);
    }
  };

  std::vector<JournalSet> journals_;
  const Corpus* corpus_;
  const EntityMap* entities_;
  std::unordered_map<std::pair<std::string, int>, Partial, KeyHash> by_user_year_;
  std::uint64_t unidentified_ = 0;
};

/// Convenience single-shot accumulation for pre-parsed records.
std::vector<UserYearStats> accumulate(std::span<const LogRecord> records,
                                      std::vector<JournalSet> journals, const Corpus* corpus,
                                      const EntityMap* entities = nullptr);

}  // namespace usagebib
