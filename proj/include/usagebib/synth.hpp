#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "usagebib/cohort.hpp"
#include "usagebib/config.hpp"
#include "usagebib/corpus.hpp"

namespace usagebib::synth {

/// One synthetic entity: a country (id = ISO code, host_suffix = its ccTLD
/// or a US gTLD) or an institute (host_suffix = a full hostname suffix that
/// the entity map resolves).
struct SynthEntity {
  std::string id;
  Entity::Kind kind = Entity::Kind::kCountry;
  std::string host_suffix;
  std::string affiliation;  // substring planted in author affiliation texts
  int researchers = 0;
  double population = 0;  // millions
  int utc_offset_minutes = -300;
};

/// Population and behavior model for the synthetic community. Amateur and
/// lay population sizes default to the 100x / 10,000x researcher ratios;
/// `ratio_scale` divides both so desk-scale runs stay tractable.
struct CommunityModel {
  std::vector<SynthEntity> entities;
  int year_from = 2005;
  int year_to = 2015;

  double amateur_ratio = 100.0;
  double lay_ratio = 10000.0;
  double practitioner_ratio = 0.0;  // no applied astronomy; configurable for other fields
  double ratio_scale = 1.0;
  int robots = 40;

  // Researcher yearly download rates: log-normal with the median implied by
  // the monthly read target and read:download ratio, truncated to
  // [rate_lower, rate_upper]; `rate_tail_mass` of researcher-years land
  // outside the bounds instead.
  double monthly_read_median = 21.0;
  double read_download_ratio = 2.0;  // reads (all accesses) per download, in [2,3]
  double rate_sigma = 0.3;
  double rate_tail_mass = 0.0;
  std::uint64_t rate_lower = 100;
  std::uint64_t rate_upper = 1000;

  double citation_follows_download = 0.4;
  double cross_entity_coauthor = 0.2;
  double pubs_per_researcher = 0.6;
  double refs_mean = 18.0;
  double ref_noise_prob = 0.02;  // refs to non-main or dangling targets

  int background_start = 1980;
  int background_per_year = 400;
  int other_per_year = 40;
  double download_half_life = 6.0;  // years; recency bias of download targets
  double start_fraction = 0.75;     // active researcher fraction in year_from

  double amateur_activity = 14.0;  // mean events per year
  double amateur_download_prob = 0.3;
  double lay_activity = 2.0;  // mean events in the single active year
  double lay_download_prob = 0.15;
  double lay_search_engine_prob = 0.7;
  double unidentified_prob = 0.02;  // lay lines with no user token

  double gdp_scale_k = 5e-4;  // researchers ~= k * GDP^2 / population

  std::uint64_t seed = 20150101;

  int total_researchers() const;
  int active_researchers(const SynthEntity& entity, int year) const;
  void validate() const;  // throws ConfigError

  static CommunityModel default_model();
  static CommunityModel from_config(const KeyValueFile& kv);
  static CommunityModel load(const std::string& path);
  std::string serialize() const;
};

/// Planted expectations for one entity-year. The per-researcher download
/// lists feed citation planting and are not part of the JSON dump.
struct EntityYearTruth {
  std::string entity;
  int year = 0;
  std::set<std::string> researchers;
  std::set<std::string> frequent;
  std::uint64_t first_author_count = 0;
  std::uint64_t download_events = 0;
  PubIdSet R;
  PubIdSet P_first;
  PubIdSet P_any;
  PubIdSet C;
  std::map<std::string, std::vector<std::string>> researcher_downloads;  // unique, sorted
};

struct GroundTruth {
  // keyed by (entity, year); map nodes keep references stable while the
  // generator fills entries in
  std::map<std::pair<std::string, int>, EntityYearTruth> entity_years;
  double planted_overlap_probability = 0.0;
  double planted_pearson = 0.0;  // frequent users vs first authors, pooled
  double gdp_scale_k = 0.0;

  const EntityYearTruth* find(std::string_view entity, int year) const;
  EntityYearTruth& at(const std::string& entity, int year);  // builds missing entries
  std::string to_jsonl() const;
};

struct LogsAndTruth {
  std::string log_tsv;
  GroundTruth truth;
};

/// Emits the synthetic access log. Researcher download lists, expected
/// frequent cohorts and R sets are recorded in the returned truth; the
/// publication-side truth (P/C/first authors) is filled by generate_corpus.
LogsAndTruth generate_logs(const CommunityModel& model);

/// Emits the synthetic corpus: the background journal universe plus
/// researcher publications whose references follow the planted downloads
/// with probability `citation_follows_download`. Completes `truth`.
std::string generate_corpus(const CommunityModel& model, GroundTruth& truth);

RobotPolicy default_robot_policy();
std::string entity_map_text(const CommunityModel& model);
std::string aux_series_csv(const CommunityModel& model);
std::vector<Entity> pipeline_entities(const CommunityModel& model);

struct SynthBundle {
  std::string log_tsv;
  std::string corpus_jsonl;
  std::string robots_policy;
  std::string entity_map;
  std::string aux_csv;
  GroundTruth truth;
};

SynthBundle generate_all(const CommunityModel& model);

}  // namespace usagebib::synth
