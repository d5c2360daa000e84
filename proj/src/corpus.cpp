#include "usagebib/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include <json.hpp>

namespace usagebib {

namespace {

std::string_view kind_name(CorpusErrorKind k) {
  switch (k) {
    case CorpusErrorKind::kIo: return "IO_FAILURE";
    case CorpusErrorKind::kMalformedLine: return "MALFORMED_LINE";
    case CorpusErrorKind::kDuplicatePubId: return "DUPLICATE_PUB_ID";
    case CorpusErrorKind::kInvalidPublication: return "INVALID_PUBLICATION";
    case CorpusErrorKind::kUnknownPubId: return "UNKNOWN_PUB_ID";
  }
  return "CORPUS_ERROR";
}

}  // namespace

CorpusError::CorpusError(CorpusErrorKind kind, std::size_t line_no, std::string detail)
    : std::runtime_error(std::string(kind_name(kind)) +
                         (line_no ? " at line " + std::to_string(line_no) : "") +
                         (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      line_no_(line_no) {}

const JournalSet& JournalSet::main_astronomy() {
  static const JournalSet kMain{"main", {"ApJ", "ApJL", "ApJS", "AJ", "MNRAS", "A&A"}};
  return kMain;
}

const Publication* Corpus::find(std::string_view pub_id) const {
  const auto it = index_.find(pub_id);
  return it == index_.end() ? nullptr : &pubs_[it->second];
}

void Corpus::add_validated(Publication pub, std::size_t line_no, YearRange sane_years) {
  if (pub.pub_id.empty()) {
    throw CorpusError(CorpusErrorKind::kInvalidPublication, line_no, "empty pub_id");
  }
  if (pub.authors.empty()) {
    throw CorpusError(CorpusErrorKind::kInvalidPublication, line_no,
                      pub.pub_id + ": authors must be non-empty");
  }
  if (!sane_years.contains(pub.year)) {
    throw CorpusError(CorpusErrorKind::kInvalidPublication, line_no,
                      pub.pub_id + ": year " + std::to_string(pub.year) + " outside [" +
                          std::to_string(sane_years.from) + "," + std::to_string(sane_years.to) +
                          "]");
  }
  if (index_.find(pub.pub_id) != index_.end()) {
    throw CorpusError(CorpusErrorKind::kDuplicatePubId, line_no, pub.pub_id);
  }
  index_.emplace(pub.pub_id, pubs_.size());
  pubs_.push_back(std::move(pub));
}

void Corpus::finalize() {
  citing_years_.clear();
  dangling_references_ = 0;
  std::unordered_set<std::string_view> seen;
  for (const Publication& pub : pubs_) {
    seen.clear();
    for (const std::string& ref : pub.references) {
      if (!seen.insert(ref).second) continue;  // a citing paper counts once per target
      if (index_.find(ref) == index_.end()) {
        ++dangling_references_;
        continue;
      }
      citing_years_[ref].push_back(pub.year);
    }
  }
  for (auto& [id, years] : citing_years_) std::sort(years.begin(), years.end());
}

Corpus Corpus::from_publications(std::vector<Publication> pubs, YearRange sane_years) {
  Corpus corpus;
  corpus.pubs_.reserve(pubs.size());
  for (Publication& pub : pubs) corpus.add_validated(std::move(pub), 0, sane_years);
  corpus.finalize();
  return corpus;
}

Corpus Corpus::from_jsonl(std::string_view text, YearRange sane_years) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    if (start == text.size()) break;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(CorpusErrorKind::kMalformedLine, line_no, e.what());
    }
    Publication pub;
    try {
      pub.pub_id = j.at("pub_id").get<std::string>();
      pub.year = j.at("year").get<int>();
      pub.journal = j.at("journal").get<std::string>();
      pub.refereed = j.at("refereed").get<bool>();
      for (const auto& a : j.at("authors")) {
        pub.authors.push_back({a.at("name").get<std::string>(), a.at("aff").get<std::string>()});
      }
      for (const auto& r : j.at("references")) {
        pub.references.push_back(r.get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(CorpusErrorKind::kMalformedLine, line_no, e.what());
    }
    corpus.add_validated(std::move(pub), line_no, sane_years);
  }
  corpus.finalize();
  return corpus;
}

Corpus Corpus::load(const std::string& path, YearRange sane_years) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw CorpusError(CorpusErrorKind::kIo, 0, e.what());
  }
  return from_jsonl(text, sane_years);
}

PubIdSet Corpus::query_bibliography(std::string_view affiliation, YearRange years,
                                    bool first_author_only, const JournalSet* journals,
                                    bool refereed_only) const {
  const std::string needle = to_lower(affiliation);
  PubIdSet out;
  for (const Publication& pub : pubs_) {
    if (!years.contains(pub.year)) continue;
    if (journals && !journals->contains(pub.journal)) continue;
    if (refereed_only && !pub.refereed) continue;
    bool matches = false;
    if (first_author_only) {
      matches = ci_contains(pub.authors.front().affiliation, needle);
    } else {
      for (const Author& a : pub.authors) {
        if (ci_contains(a.affiliation, needle)) {
          matches = true;
          break;
        }
      }
    }
    if (matches) out.insert(pub.pub_id);
  }
  return out;
}

PubIdSet Corpus::cited_set(const PubIdSet& pubs, const JournalSet* journals) const {
  PubIdSet out;
  for (const std::string& id : pubs) {
    const Publication* pub = find(id);
    if (!pub) continue;
    for (const std::string& ref : pub->references) {
      const Publication* target = find(ref);
      if (!target) continue;  // dangling edges are legal and ignored
      if (journals && !journals->contains(target->journal)) continue;
      out.insert(ref);
    }
  }
  return out;
}

std::map<int, std::uint64_t> Corpus::year_totals(const JournalSet& journals) const {
  std::map<int, std::uint64_t> out;
  for (const Publication& pub : pubs_) {
    if (journals.contains(pub.journal)) ++out[pub.year];
  }
  return out;
}

std::uint64_t Corpus::citations_received(std::string_view pub_id, int up_to_year) const {
  if (index_.find(pub_id) == index_.end()) {
    throw CorpusError(CorpusErrorKind::kUnknownPubId, 0, std::string(pub_id));
  }
  const auto it = citing_years_.find(pub_id);
  if (it == citing_years_.end()) return 0;
  const auto& years = it->second;
  return static_cast<std::uint64_t>(
      std::upper_bound(years.begin(), years.end(), up_to_year) - years.begin());
}

std::string Corpus::to_jsonl_line(const Publication& pub) {
  nlohmann::json j;
  j["pub_id"] = pub.pub_id;
  j["year"] = pub.year;
  j["journal"] = pub.journal;
  j["refereed"] = pub.refereed;
  nlohmann::json authors = nlohmann::json::array();
  for (const Author& a : pub.authors) {
    authors.push_back({{"name", a.name}, {"aff", a.affiliation}});
  }
  j["authors"] = std::move(authors);
  j["references"] = pub.references;
  return j.dump();
}

std::string Corpus::to_jsonl() const {
  std::string out;
  for (const Publication& pub : pubs_) {
    out += to_jsonl_line(pub);
    out += '\n';
  }
  return out;
}

}  // namespace usagebib
