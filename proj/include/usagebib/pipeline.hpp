#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usagebib/cohort.hpp"
#include "usagebib/config.hpp"
#include "usagebib/corpus.hpp"
#include "usagebib/indicators.hpp"
#include "usagebib/synth.hpp"

namespace usagebib {

/// Everything a run needs: input paths, cohort bounds, journal sets, the
/// analysis year range, baseline sampling parameters and the entity roster.
struct RunConfig {
  std::string log_path;
  std::string corpus_path;
  std::string robot_policy_path;
  std::string entity_map_path;
  std::string aux_path;
  std::string out_dir = ".";
  std::string model_path;  // synth / verify

  CohortConfig cohort;
  std::vector<JournalSet> journals;  // defaults to the main astronomy set
  std::string primary_set = "main";
  // journal set restricting the frequent-user classification; empty = total
  std::optional<std::string> cohort_restriction;

  YearRange years{2005, 2015};
  int window_from = 1980;  // obsolescence window start
  int base_year = 2005;
  OverlapDenominator denominator = OverlapDenominator::kCited;
  std::size_t baseline_samples = 10;
  std::uint64_t seed = 42;
  CorrelationKind correlation = CorrelationKind::kPearson;
  int threads = 0;  // 0 = all available

  std::vector<Entity> entities;
  std::string obsolescence_entity;  // empty = first entity (by id)
  int obsolescence_year = 0;        // 0 = last analysis year

  const JournalSet& primary_journals() const;
  std::optional<std::string_view> restriction() const;

  static RunConfig from_config(const KeyValueFile& kv);
  static RunConfig load(const std::string& path);
};

OverlapDenominator denominator_from_name(std::string_view name);
std::string_view denominator_name(OverlapDenominator d);

struct IngestSummary {
  std::uint64_t lines = 0;
  std::uint64_t comments = 0;
  std::uint64_t blanks = 0;
  std::uint64_t records = 0;
  std::uint64_t robot_records = 0;
  std::uint64_t unidentified_records = 0;

  friend bool operator==(const IngestSummary&, const IngestSummary&) = default;
};

struct IngestResult {
  std::vector<UserYearStats> stats;
  IngestSummary summary;
};

/// Single-pass reference ingest: parse, robot-filter, accumulate.
IngestResult ingest_serial(std::istream& in, const RobotPolicy& policy,
                           const std::vector<JournalSet>& journals, const Corpus* corpus,
                           const EntityMap* entities);

/// Shard-parallel ingest over line blocks; produces results identical to
/// ingest_serial for any thread count.
IngestResult ingest_parallel(std::istream& in, const RobotPolicy& policy,
                             const std::vector<JournalSet>& journals, const Corpus* corpus,
                             const EntityMap* entities, int threads,
                             std::size_t block_bytes = 4u << 20);

IngestResult ingest_file(const std::string& path, const RobotPolicy& policy,
                         const std::vector<JournalSet>& journals, const Corpus* corpus,
                         const EntityMap* entities, int threads);
IngestResult ingest_text(std::string_view text, const RobotPolicy& policy,
                         const std::vector<JournalSet>& journals, const Corpus* corpus,
                         const EntityMap* entities, int threads);

/// Per-entity-year indicator block. `overlap` and `baseline` are NaN when
/// undefined (empty denominator set); the reports leave those cells empty.
struct EntityYearOutputs {
  EntityYearData data;
  double overlap = 0;
  double baseline = 0;
  int h_index_next = 0;
};

std::vector<EntityYearOutputs> compute_entity_years(const Corpus& corpus,
                                                    std::span<const UserYearStats> stats,
                                                    const RunConfig& config);

/// Rejects entities that cannot be resolved at all: a country id no request
/// could ever attribute to, or an institute absent from the suffix map, with
/// an affiliation matching nothing in the corpus either. Throws
/// IndicatorError{kUnknownEntity}. Resolvable entities without activity are
/// fine; they simply produce empty sets.
void validate_entities(std::span<const Entity> entities, const Corpus& corpus,
                       const EntityMap* entity_map);

/// Citation event multiset of the first-author bibliography: one (target,
/// target-year) event per distinct citing publication, journal-filtered.
std::vector<std::pair<std::string, int>> citation_events(const Corpus& corpus,
                                                         const PubIdSet& p_first,
                                                         const JournalSet& journals);

// --- deterministic report builders (LF endings, %.9g floats) ---

std::string stats_csv(std::span<const UserYearStats> stats,
                      const std::vector<JournalSet>& journals);
std::string cohorts_csv(std::span<const UserYearStats> stats, const RunConfig& config);
std::string sets_jsonl(std::span<const EntityYearOutputs> outputs);

struct ReportBundle {
  std::map<std::string, std::string> files;  // name -> content
  std::vector<std::string> notes;            // deterministic skip/warning notes
};

ReportBundle indicator_reports(const Corpus& corpus, std::span<const EntityYearOutputs> outputs,
                               const AuxTable* aux, const RunConfig& config);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> mismatches;  // "(entity, year, quantity): detail"
  std::string summary;                  // deterministic human-readable recap
};

/// Pipes an already-generated bundle through the pipeline and diffs the
/// recovered quantities against its ground truth.
VerifyReport verify_bundle(const synth::SynthBundle& bundle,
                           const synth::CommunityModel& model, const RunConfig& config);

VerifyReport run_verify(const synth::CommunityModel& model, const RunConfig& config);

int run_cli(int argc, char** argv);

}  // namespace usagebib
