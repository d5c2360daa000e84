#include "usagebib/cohort.hpp"

#include <algorithm>

namespace usagebib {

std::string_view cohort_category_name(CohortCategory c) {
  switch (c) {
    case CohortCategory::kAbstractOnly: return "ABSTRACT_ONLY";
    case CohortCategory::kInfrequent: return "INFREQUENT";
    case CohortCategory::kFrequent: return "FREQUENT";
    case CohortCategory::kRemainder: return "REMAINDER";
  }
  return "UNKNOWN";
}

CohortCategory classify_count(std::uint64_t downloads, const CohortConfig& config) {
  if (downloads == 0) return CohortCategory::kAbstractOnly;
  if (downloads < config.lower) return CohortCategory::kInfrequent;
  if (downloads <= config.upper) return CohortCategory::kFrequent;
  return CohortCategory::kRemainder;
}

CohortCategory classify(const UserYearStats& stats, const CohortConfig& config,
                        std::optional<std::string_view> journal_restriction) {
  std::uint64_t d = stats.downloads_total;
  if (journal_restriction) {
    const auto it = stats.downloads_in_set.find(*journal_restriction);
    d = it == stats.downloads_in_set.end() ? 0 : it->second;
  }
  return classify_count(d, config);
}

std::uint64_t CohortCounts::of(CohortCategory c) const {
  switch (c) {
    case CohortCategory::kAbstractOnly: return abstract_only;
    case CohortCategory::kInfrequent: return infrequent;
    case CohortCategory::kFrequent: return frequent;
    case CohortCategory::kRemainder: return remainder;
  }
  return 0;
}

CohortCounts cohort_counts(std::span<const UserYearStats> stats, int year,
                           const CohortConfig& config,
                           std::optional<std::string_view> journal_restriction) {
  CohortCounts counts;
  for (const UserYearStats& s : stats) {
    if (s.year != year) continue;
    switch (classify(s, config, journal_restriction)) {
      case CohortCategory::kAbstractOnly: ++counts.abstract_only; break;
      case CohortCategory::kInfrequent: ++counts.infrequent; break;
      case CohortCategory::kFrequent: ++counts.frequent; break;
      case CohortCategory::kRemainder: ++counts.remainder; break;
    }
  }
  return counts;
}

bool entity_matches(const UserYearStats& stats, const Entity& entity) {
  if (entity.kind == Entity::Kind::kCountry) return stats.country.code == entity.id;
  return stats.entity == entity.id;
}

std::set<std::string> frequent_users(std::span<const UserYearStats> stats, int year,
                                     const Entity& entity, const CohortConfig& config,
                                     std::optional<std::string_view> journal_restriction) {
  std::set<std::string> out;
  for (const UserYearStats& s : stats) {
    if (s.year != year || !entity_matches(s, entity)) continue;
    if (classify(s, config, journal_restriction) == CohortCategory::kFrequent) {
      out.insert(s.user_id);
    }
  }
  return out;
}

EntityMap EntityMap::parse(std::string_view text, std::string_view origin) {
  EntityMap map;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t ws = line.find_first_of(" \t");
    if (ws == std::string_view::npos) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": expected '<hostname-suffix> <entity-id>'");
    }
    const std::string_view suffix = trim(line.substr(0, ws));
    const std::string_view id = trim(line.substr(ws + 1));
    if (suffix.empty() || id.empty()) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": expected '<hostname-suffix> <entity-id>'");
    }
    map.add(suffix, id);
  }
  return map;
}

EntityMap EntityMap::load(const std::string& path) {
  return parse(read_file(path), path);
}

void EntityMap::add(std::string_view hostname_suffix, std::string_view entity_id) {
  suffixes_.emplace_back(to_lower(hostname_suffix), std::string(entity_id));
  std::stable_sort(suffixes_.begin(), suffixes_.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
}

std::string_view EntityMap::lookup(std::string_view hostname) const {
  if (hostname.empty() || suffixes_.empty()) return {};
  const std::string host = to_lower(hostname);
  for (const auto& [suffix, id] : suffixes_) {
    if (host.size() < suffix.size()) continue;
    if (host.compare(host.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    // anchor at a label boundary: exact host or a dot right before the suffix
    if (host.size() == suffix.size() || host[host.size() - suffix.size() - 1] == '.') {
      return id;
    }
  }
  return {};
}

bool EntityMap::maps_to(std::string_view entity_id) const {
  for (const auto& [suffix, id] : suffixes_) {
    if (id == entity_id) return true;
  }
  return false;
}

std::string EntityMap::serialize() const {
  std::string out;
  for (const auto& [suffix, id] : suffixes_) {
    out += suffix;
    out += ' ';
    out += id;
    out += '\n';
  }
  return out;
}

Accumulator::Accumulator(std::vector<JournalSet> journals, const Corpus* corpus,
                         const EntityMap* entities)
    : journals_(std::move(journals)), corpus_(corpus), entities_(entities) {}

void Accumulator::add(const LogRecord& record) {
  if (!record.identified()) {
    ++unidentified_;  // no per-user stats for anonymous traffic
    return;
  }
  const int year = attribution_year(record.timestamp);
  Partial& p = by_user_year_[{record.user_id, year}];
  if (p.downloads_in_set.empty() && !journals_.empty()) {
    p.downloads_in_set.assign(journals_.size(), 0);
  }
  ++p.interactions;
  ++p.country_votes[attribute_country(record.hostname, record.ip).code];
  if (entities_) {
    const std::string_view entity = entities_->lookup(record.hostname);
    if (!entity.empty()) ++p.entity_votes[std::string(entity)];
  }
  if (record.action == Action::kDownload) {
    ++p.downloads_total;
    ++p.downloaded_pubs[record.pub_id];
    if (corpus_) {
      if (const Publication* pub = corpus_->find(record.pub_id)) {
        for (std::size_t i = 0; i < journals_.size(); ++i) {
          if (journals_[i].contains(pub->journal)) ++p.downloads_in_set[i];
        }
      }
    }
  }
}

void Accumulator::merge(Accumulator&& other) {
  unidentified_ += other.unidentified_;
  for (auto& [key, theirs] : other.by_user_year_) {
    auto [it, inserted] = by_user_year_.try_emplace(key, std::move(theirs));
    if (inserted) continue;
    Partial& mine = it->second;
    mine.interactions += theirs.interactions;
    mine.downloads_total += theirs.downloads_total;
    if (mine.downloads_in_set.size() < theirs.downloads_in_set.size()) {
      mine.downloads_in_set.resize(theirs.downloads_in_set.size(), 0);
    }
    for (std::size_t i = 0; i < theirs.downloads_in_set.size(); ++i) {
      mine.downloads_in_set[i] += theirs.downloads_in_set[i];
    }
    for (auto& [pub, count] : theirs.downloaded_pubs) mine.downloaded_pubs[pub] += count;
    for (auto& [code, votes] : theirs.country_votes) mine.country_votes[code] += votes;
    for (auto& [id, votes] : theirs.entity_votes) mine.entity_votes[id] += votes;
  }
  other.by_user_year_.clear();
}

namespace {

// Majority value; ties break toward the lexicographically smallest key.
std::string majority(const std::map<std::string, std::uint64_t>& votes) {
  std::string best;
  std::uint64_t best_votes = 0;
  for (const auto& [value, count] : votes) {
    if (count > best_votes) {
      best = value;
      best_votes = count;
    }
  }
  return best;
}

}  // namespace

std::vector<UserYearStats> Accumulator::finish() const {
  std::vector<UserYearStats> out;
  out.reserve(by_user_year_.size());
  for (const auto& [key, p] : by_user_year_) {
    UserYearStats s;
    s.user_id = key.first;
    s.year = key.second;
    s.interactions = p.interactions;
    s.downloads_total = p.downloads_total;
    for (std::size_t i = 0; i < journals_.size() && i < p.downloads_in_set.size(); ++i) {
      s.downloads_in_set[journals_[i].name] = p.downloads_in_set[i];
    }
    for (const auto& [pub, count] : p.downloaded_pubs) s.downloaded_pubs[pub] = count;
    s.country = p.country_votes.empty() ? CountryCode::unknown()
                                        : CountryCode{majority(p.country_votes)};
    s.entity = majority(p.entity_votes);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const UserYearStats& a, const UserYearStats& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.year < b.year;
  });
  return out;
}

std::vector<UserYearStats> accumulate(std::span<const LogRecord> records,
                                      std::vector<JournalSet> journals, const Corpus* corpus,
                                      const EntityMap* entities) {
  Accumulator acc(std::move(journals), corpus, entities);
  for (const LogRecord& r : records) acc.add(r);
  return acc.finish();
}

}  // namespace usagebib
