#include "usagebib/indicators.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "usagebib/rng.hpp"
#include "usagebib/util.hpp"

namespace usagebib {

std::string_view indicator_error_name(IndicatorErrorKind k) {
  switch (k) {
    case IndicatorErrorKind::kEmptyReferenceSet: return "EMPTY_REFERENCE_SET";
    case IndicatorErrorKind::kSampleTooLarge: return "SAMPLE_TOO_LARGE";
    case IndicatorErrorKind::kDegenerateInput: return "DEGENERATE_INPUT";
    case IndicatorErrorKind::kMissingBaseYear: return "MISSING_BASE_YEAR";
    case IndicatorErrorKind::kZeroBaseValue: return "ZERO_BASE_VALUE";
    case IndicatorErrorKind::kUnknownEntity: return "UNKNOWN_ENTITY";
  }
  return "INDICATOR_ERROR";
}

IndicatorError::IndicatorError(IndicatorErrorKind kind, std::string detail)
    : std::runtime_error(std::string(indicator_error_name(kind)) +
                         (detail.empty() ? "" : ": " + detail)),
      kind_(kind) {}

EntityYearData build_entity_year_sets(const Corpus& corpus,
                                      std::span<const UserYearStats> stats, const Entity& entity,
                                      int year, const JournalSet& journals,
                                      const CohortConfig& config,
                                      std::optional<std::string_view> journal_restriction) {
  EntityYearData data;
  data.sets.entity = entity.id;
  data.sets.year = year;

  const std::set<std::string> frequent =
      frequent_users(stats, year, entity, config, journal_restriction);
  data.frequent_user_count = frequent.size();

  for (const UserYearStats& s : stats) {
    if (s.year != year || frequent.find(s.user_id) == frequent.end()) continue;
    for (const auto& [pub_id, count] : s.downloaded_pubs) {
      const Publication* pub = corpus.find(pub_id);
      if (!pub || !journals.contains(pub->journal)) continue;
      data.sets.R.insert(pub_id);
      for (std::uint32_t i = 0; i < count; ++i) data.download_events.emplace_back(pub_id, pub->year);
    }
  }

  const YearRange this_year{year, year};
  data.sets.P_first =
      corpus.query_bibliography(entity.affiliation, this_year, true, &journals, false);
  data.sets.P_any =
      corpus.query_bibliography(entity.affiliation, this_year, false, &journals, false);
  data.sets.C = corpus.cited_set(data.sets.P_first, &journals);
  data.first_author_count = first_author_count(corpus, entity, year, journals);
  return data;
}

std::vector<std::pair<std::string, int>> download_events_from_records(
    std::span<const LogRecord> records, const Corpus& corpus, const JournalSet& journals,
    std::optional<Channel> channel) {
  std::vector<std::pair<std::string, int>> events;
  for (const LogRecord& record : records) {
    if (!is_download(record)) continue;
    if (channel && record.channel != *channel) continue;
    const Publication* pub = corpus.find(record.pub_id);
    if (!pub || !journals.contains(pub->journal)) continue;
    events.emplace_back(record.pub_id, pub->year);
  }
  return events;
}

std::uint64_t first_author_count(const Corpus& corpus, const Entity& entity, int year,
                                 const JournalSet& journals) {
  const PubIdSet p_first =
      corpus.query_bibliography(entity.affiliation, {year, year}, true, &journals, false);
  std::set<std::string_view> names;
  for (const std::string& id : p_first) {
    names.insert(corpus.find(id)->authors.front().name);
  }
  return names.size();
}

namespace {

std::uint64_t sorted_intersection_size(const PubIdSet& a, const PubIdSet& b) {
  std::uint64_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    const int cmp = ia->compare(*ib);
    if (cmp < 0) {
      ++ia;
    } else if (cmp > 0) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

double overlap_of_counts(std::uint64_t intersection, std::uint64_t r_size, std::uint64_t c_size,
                         OverlapDenominator denominator) {
  std::uint64_t denom = 0;
  switch (denominator) {
    case OverlapDenominator::kCited: denom = c_size; break;
    case OverlapDenominator::kDownloaded: denom = r_size; break;
    case OverlapDenominator::kUnion: denom = r_size + c_size - intersection; break;
  }
  if (denom == 0) {
    throw IndicatorError(IndicatorErrorKind::kEmptyReferenceSet, "overlap denominator is empty");
  }
  return static_cast<double>(intersection) / static_cast<double>(denom);
}

}  // namespace

double overlap_fraction(const PubIdSet& R, const PubIdSet& C, OverlapDenominator denominator) {
  return overlap_of_counts(sorted_intersection_size(R, C), R.size(), C.size(), denominator);
}

namespace {

struct BaselineSetup {
  std::unordered_set<std::string_view> members;

  BaselineSetup(std::span<const std::string> slice, std::size_t sample_size, const PubIdSet& C,
                OverlapDenominator denominator) {
    if (sample_size > slice.size()) {
      throw IndicatorError(IndicatorErrorKind::kSampleTooLarge,
                           "sample size " + std::to_string(sample_size) + " exceeds slice of " +
                               std::to_string(slice.size()));
    }
    // denominators are validated here so no exception can surface inside a
    // parallel sampling region
    const bool empty_denominator =
        (denominator == OverlapDenominator::kCited && C.empty()) ||
        (denominator == OverlapDenominator::kDownloaded && sample_size == 0) ||
        (denominator == OverlapDenominator::kUnion && C.empty() && sample_size == 0);
    if (empty_denominator) {
      throw IndicatorError(IndicatorErrorKind::kEmptyReferenceSet,
                           "overlap denominator is empty");
    }
    members.reserve(C.size() * 2);
    for (const std::string& id : C) members.insert(id);
  }
};

/// Overlap of one without-replacement sample drawn via partial Fisher-Yates.
/// `idx` must be the identity permutation on entry; the recorded swaps are
/// unwound before returning so one scratch array serves many samples.
double one_sample(std::span<const std::string> slice, std::vector<std::uint32_t>& idx,
                  std::vector<std::uint32_t>& picks, std::size_t sample_size,
                  const BaselineSetup& setup, std::uint64_t c_size,
                  OverlapDenominator denominator, std::uint64_t sample_seed) {
  Rng rng(sample_seed);
  const std::size_t n = idx.size();
  picks.resize(sample_size);
  std::uint64_t intersection = 0;
  for (std::size_t j = 0; j < sample_size; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    picks[j] = static_cast<std::uint32_t>(pick);
    std::swap(idx[j], idx[pick]);
    if (setup.members.count(slice[idx[j]]) != 0) ++intersection;
  }
  for (std::size_t j = sample_size; j-- > 0;) std::swap(idx[j], idx[picks[j]]);
  return overlap_of_counts(intersection, sample_size, c_size, denominator);
}

}  // namespace

double random_overlap_baseline(std::span<const std::string> slice, std::size_t sample_size,
                               const PubIdSet& C, std::size_t n_samples, std::uint64_t seed,
                               OverlapDenominator denominator, int threads) {
  if (n_samples == 0) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "n_samples must be positive");
  }
  const BaselineSetup setup(slice, sample_size, C, denominator);
  std::vector<double> values(n_samples);
  if (threads < 1) threads = 1;
#pragma omp parallel num_threads(threads)
  {
    std::vector<std::uint32_t> idx(slice.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<std::uint32_t> picks;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_samples); ++i) {
      values[static_cast<std::size_t>(i)] =
          one_sample(slice, idx, picks, sample_size, setup, C.size(), denominator,
                     derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
  }
  double sum = 0.0;
  for (double v : values) sum += v;  // fixed order: identical for any thread count
  return sum / static_cast<double>(n_samples);
}

double random_overlap_baseline_serial(std::span<const std::string> slice,
                                      std::size_t sample_size, const PubIdSet& C,
                                      std::size_t n_samples, std::uint64_t seed,
                                      OverlapDenominator denominator) {
  if (n_samples == 0) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "n_samples must be positive");
  }
  const BaselineSetup setup(slice, sample_size, C, denominator);
  std::vector<double> values(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    // fresh scratch per sample: simple and obviously correct
    std::vector<std::uint32_t> idx(slice.size());
    std::iota(idx.begin(), idx.end(), 0u);
    Rng rng(derive_seed(seed, i));
    std::uint64_t intersection = 0;
    for (std::size_t j = 0; j < sample_size; ++j) {
      const std::size_t pick = j + static_cast<std::size_t>(rng.below(idx.size() - j));
      std::swap(idx[j], idx[pick]);
      if (setup.members.count(slice[idx[j]]) != 0) ++intersection;
    }
    values[i] = overlap_of_counts(intersection, sample_size, C.size(), denominator);
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(n_samples);
}

ObsolescenceCurve obsolescence_curve(std::span<const std::pair<std::string, int>> events,
                                     const std::map<int, std::uint64_t>& year_totals,
                                     YearRange window) {
  ObsolescenceCurve curve;
  curve.window_from = window.from;
  curve.window_to = window.to;

  std::map<int, std::uint64_t> counts;
  std::map<int, std::set<std::string_view>> unique;
  for (const auto& [pub_id, year] : events) {
    if (!window.contains(year)) continue;
    ++counts[year];
    unique[year].insert(pub_id);
    ++curve.total_events;
  }
  if (curve.total_events == 0) return curve;

  for (const auto& [year, count] : counts) {
    curve.normalized_count[year] =
        static_cast<double>(count) / static_cast<double>(curve.total_events);
  }
  for (const auto& [year, ids] : unique) {
    const auto it = year_totals.find(year);
    if (it == year_totals.end() || it->second == 0) continue;  // nothing to normalize against
    curve.unique_fraction[year] =
        static_cast<double>(ids.size()) / static_cast<double>(it->second);
  }
  return curve;
}

int h_index(std::span<const std::uint64_t> citation_counts) {
  std::vector<std::uint64_t> sorted(citation_counts.begin(), citation_counts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  int h = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= i + 1) {
      h = static_cast<int>(i + 1);
    } else {
      break;
    }
  }
  return h;
}

int h_index_next_year(const Corpus& corpus, const PubIdSet& p_first, int year) {
  std::vector<std::uint64_t> counts;
  counts.reserve(p_first.size());
  for (const std::string& id : p_first) {
    counts.push_back(corpus.citations_received(id, year + 1));
  }
  return h_index(counts);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "length mismatch");
  }
  const std::size_t n = xs.size();
  if (n < 2) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "need at least 2 points");
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> ranks_with_ties(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] < xs[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && xs[order[j]] == xs[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput, "length mismatch");
  }
  const std::vector<double> rx = ranks_with_ties(xs);
  const std::vector<double> ry = ranks_with_ties(ys);
  return pearson_r(rx, ry);
}

double correlation(std::span<const double> xs, std::span<const double> ys, CorrelationKind kind) {
  return kind == CorrelationKind::kPearson ? pearson_r(xs, ys) : spearman_r(xs, ys);
}

std::map<int, double> normalize_to_base_year(const std::map<int, double>& series,
                                             int base_year) {
  const auto base = series.find(base_year);
  if (base == series.end()) {
    throw IndicatorError(IndicatorErrorKind::kMissingBaseYear,
                         "base year " + std::to_string(base_year) + " absent from series");
  }
  if (base->second == 0.0) {
    throw IndicatorError(IndicatorErrorKind::kZeroBaseValue,
                         "base year " + std::to_string(base_year) + " has zero value");
  }
  std::map<int, double> out;
  for (const auto& [year, value] : series) out[year] = value / base->second;
  return out;
}

std::string_view aux_kind_name(AuxKind k) {
  switch (k) {
    case AuxKind::kIauMembers: return "IAU_MEMBERS";
    case AuxKind::kGdpPerCapita: return "GDP_PER_CAPITA";
    case AuxKind::kPopulation: return "POPULATION";
    case AuxKind::kGdpTotal: return "GDP_TOTAL";
  }
  return "UNKNOWN";
}

std::optional<AuxKind> aux_kind_from_name(std::string_view name) {
  if (name == "IAU_MEMBERS") return AuxKind::kIauMembers;
  if (name == "GDP_PER_CAPITA") return AuxKind::kGdpPerCapita;
  if (name == "POPULATION") return AuxKind::kPopulation;
  if (name == "GDP_TOTAL") return AuxKind::kGdpTotal;
  return std::nullopt;
}

AuxTable AuxTable::parse(std::string_view csv, std::string_view origin) {
  AuxTable table;
  std::size_t line_no = 0;
  bool seen_header = false;
  for (std::string_view raw : split(csv, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != "entity,kind,year,value") {
        throw DataError(std::string(origin) + ":1: expected header 'entity,kind,year,value'");
      }
      seen_header = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 4) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": expected 4 columns");
    }
    const auto kind = aux_kind_from_name(trim(cols[1]));
    if (!kind) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": unknown series kind: " + std::string(cols[1]));
    }
    int year = 0;
    double value = 0;
    try {
      year = std::stoi(std::string(trim(cols[2])));
      value = std::stod(std::string(trim(cols[3])));
    } catch (const std::exception&) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": bad year or value");
    }
    if (value < 0) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": negative value");
    }
    table.set(std::string(trim(cols[0])), *kind, year, value);
  }
  return table;
}

AuxTable AuxTable::load(const std::string& path) { return parse(read_file(path), path); }

void AuxTable::set(const std::string& entity, AuxKind kind, int year, double value) {
  table_[{entity, kind}][year] = value;
}

const std::map<int, double>* AuxTable::series(std::string_view entity, AuxKind kind) const {
  const auto it = table_.find({std::string(entity), kind});
  return it == table_.end() ? nullptr : &it->second;
}

std::string AuxTable::to_csv() const {
  std::string out = "entity,kind,year,value\n";
  for (const auto& [key, series] : table_) {
    for (const auto& [year, value] : series) {
      out += key.first;
      out += ',';
      out += aux_kind_name(key.second);
      out += ',';
      out += std::to_string(year);
      out += ',';
      out += format_g9(value);
      out += '\n';
    }
  }
  return out;
}

PowerLawFit fit_gdp_power_law(std::span<const GdpObservation> observations) {
  const std::size_t n = observations.size();
  if (n < 3) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput,
                         "need at least 3 observations, got " + std::to_string(n));
  }
  std::vector<double> ly(n), lx(n), lz(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GdpObservation& o = observations[i];
    if (o.downloads <= 0 || o.gdp_total <= 0 || o.population <= 0) {
      throw IndicatorError(IndicatorErrorKind::kDegenerateInput,
                           "observations must be strictly positive");
    }
    ly[i] = std::log(o.downloads);
    lx[i] = std::log(o.gdp_total);
    lz[i] = std::log(o.population);
  }
  double mx = 0, mz = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    mz += lz[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  mz /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, szz = 0, sxz = 0, sxy = 0, szy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dz = lz[i] - mz;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    szz += dz * dz;
    sxz += dx * dz;
    sxy += dx * dy;
    szy += dz * dy;
  }
  const double det = sxx * szz - sxz * sxz;
  if (sxx == 0.0 || szz == 0.0 || std::abs(det) <= 1e-12 * sxx * szz) {
    throw IndicatorError(IndicatorErrorKind::kDegenerateInput,
                         "collinear or constant regressors");
  }
  PowerLawFit fit;
  fit.n = n;
  fit.gdp_exponent = (szz * sxy - sxz * szy) / det;
  fit.population_exponent = (sxx * szy - sxz * sxy) / det;
  fit.intercept = my - fit.gdp_exponent * mx - fit.population_exponent * mz;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.gdp_exponent * lx[i] + fit.population_exponent * lz[i];
    const double r = ly[i] - pred;
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

}  // namespace usagebib
