#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "usagebib/cohort.hpp"
#include "usagebib/corpus.hpp"

namespace usagebib {

enum class IndicatorErrorKind {
  kEmptyReferenceSet,
  kSampleTooLarge,
  kDegenerateInput,
  kMissingBaseYear,
  kZeroBaseValue,
  kUnknownEntity,
};

std::string_view indicator_error_name(IndicatorErrorKind k);

class IndicatorError : public std::runtime_error {
 public:
  IndicatorError(IndicatorErrorKind kind, std::string detail);
  IndicatorErrorKind kind() const { return kind_; }

 private:
  IndicatorErrorKind kind_;
};

/// The per-entity-year sets the download/citation comparison is built on:
/// R) unique journal-set publications downloaded by the entity's frequent
/// users, P) the entity's journal-set publications (first-author and
/// any-author variants), C) the journal-set publications cited by the
/// first-author set.
struct EntityYearSets {
  std::string entity;
  int year = 0;
  PubIdSet R;
  PubIdSet P_first;
  PubIdSet P_any;
  PubIdSet C;
};

/// EntityYearSets plus the raw download event multiset (needed for the
/// obsolescence event distribution) and headline counts.
struct EntityYearData {
  EntityYearSets sets;
  std::vector<std::pair<std::string, int>> download_events;  // (pub_id, pub year), with repeats
  std::uint64_t frequent_user_count = 0;
  std::uint64_t first_author_count = 0;
};

EntityYearData build_entity_year_sets(const Corpus& corpus,
                                      std::span<const UserYearStats> stats, const Entity& entity,
                                      int year, const JournalSet& journals,
                                      const CohortConfig& config,
                                      std::optional<std::string_view> journal_restriction =
                                          std::nullopt);

/// Journal-filtered download event multiset straight from records,
/// optionally restricted to one channel. Pairs with obsolescence_curve for
/// channel-split readership comparisons (engine-referred vs direct use).
std::vector<std::pair<std::string, int>> download_events_from_records(
    std::span<const LogRecord> records, const Corpus& corpus, const JournalSet& journals,
    std::optional<Channel> channel = std::nullopt);

/// Distinct first-author names over the entity's first-author bibliography.
std::uint64_t first_author_count(const Corpus& corpus, const Entity& entity, int year,
                                 const JournalSet& journals);

enum class OverlapDenominator { kCited, kDownloaded, kUnion };

/// |R intersect C| over the chosen denominator (default |C|). Throws
/// IndicatorError{kEmptyReferenceSet} when the denominator set is empty.
double overlap_fraction(const PubIdSet& R, const PubIdSet& C,
                        OverlapDenominator denominator = OverlapDenominator::kCited);

/// Mean overlap of `n_samples` uniform without-replacement samples of
/// `sample_size` ids from `slice` against C. Sample i always draws from the
/// substream derive_seed(seed, i), so results are reproducible and identical
/// for any thread count.
double random_overlap_baseline(std::span<const std::string> slice, std::size_t sample_size,
                               const PubIdSet& C, std::size_t n_samples, std::uint64_t seed,
                               OverlapDenominator denominator = OverlapDenominator::kCited,
                               int threads = 1);

/// Straightforward single-threaded reference for the baseline sampler; kept
/// for equivalence tests and benchmarks.
double random_overlap_baseline_serial(std::span<const std::string> slice,
                                      std::size_t sample_size, const PubIdSet& C,
                                      std::size_t n_samples, std::uint64_t seed,
                                      OverlapDenominator denominator =
                                          OverlapDenominator::kCited);

/// Distribution of an event list over publication years.
///   normalized_count: events of that year / all events in the window
///   unique_fraction:  unique publications of that year in the list /
///                     journal-set output of that year
struct ObsolescenceCurve {
  int window_from = 0;
  int window_to = 0;
  std::uint64_t total_events = 0;  // 0 flags an empty curve
  std::map<int, double> normalized_count;
  std::map<int, double> unique_fraction;
};

ObsolescenceCurve obsolescence_curve(std::span<const std::pair<std::string, int>> events,
                                     const std::map<int, std::uint64_t>& year_totals,
                                     YearRange window);

/// Largest h such that at least h counts are >= h.
int h_index(std::span<const std::uint64_t> citation_counts);

/// h-index of the P set measured one year after publication: citation counts
/// include citing papers published through year + 1.
int h_index_next_year(const Corpus& corpus, const PubIdSet& p_first, int year);

double pearson_r(std::span<const double> xs, std::span<const double> ys);
double spearman_r(std::span<const double> xs, std::span<const double> ys);

enum class CorrelationKind { kPearson, kSpearman };
double correlation(std::span<const double> xs, std::span<const double> ys, CorrelationKind kind);

/// Divides every value by the base-year value; the base year maps to 1.0.
std::map<int, double> normalize_to_base_year(const std::map<int, double>& series,
                                             int base_year = 2005);

// --- auxiliary (external) series ---

enum class AuxKind { kIauMembers, kGdpPerCapita, kPopulation, kGdpTotal };

std::string_view aux_kind_name(AuxKind k);
std::optional<AuxKind> aux_kind_from_name(std::string_view name);

/// `entity,kind,year,value` CSV with header; values must be non-negative.
class AuxTable {
 public:
  static AuxTable parse(std::string_view csv, std::string_view origin = "<string>");
  static AuxTable load(const std::string& path);

  void set(const std::string& entity, AuxKind kind, int year, double value);
  const std::map<int, double>* series(std::string_view entity, AuxKind kind) const;
  bool empty() const { return table_.empty(); }
  std::string to_csv() const;

 private:
  std::map<std::pair<std::string, AuxKind>, std::map<int, double>> table_;
};

/// One entity observation for the download/GDP/population power-law fit.
struct GdpObservation {
  double downloads = 0;
  double gdp_total = 0;
  double population = 0;
};

struct PowerLawFit {
  double intercept = 0;
  double gdp_exponent = 0;         // b in log d = a + b log GDP + c log pop
  double population_exponent = 0;  // c
  double rms_residual = 0;
  std::size_t n = 0;
};

/// Least-squares fit of log(downloads) = a + b log(gdp) + c log(population).
/// Requires >= 3 observations with strictly positive values; throws
/// IndicatorError{kDegenerateInput} otherwise or when the design is
/// collinear.
PowerLawFit fit_gdp_power_law(std::span<const GdpObservation> observations);

}  // namespace usagebib
