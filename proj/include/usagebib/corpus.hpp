#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usagebib/util.hpp"

namespace usagebib {

struct Author {
  std::string name;
  std::string affiliation;
};

struct Publication {
  std::string pub_id;
  int year = 0;
  std::string journal;
  bool refereed = false;
  std::vector<Author> authors;            // ordered; first entry is the first author
  std::vector<std::string> references;    // outgoing citations; may dangle
};

/// Named set of canonical journal names.
struct JournalSet {
  std::string name;
  std::set<std::string, std::less<>> members;

  bool contains(std::string_view journal) const {
    return members.find(journal) != members.end();
  }

  /// ApJ, ApJL, ApJS, AJ, MNRAS, A&A.
  static const JournalSet& main_astronomy();
};

using PubIdSet = std::set<std::string, std::less<>>;

struct YearRange {
  int from = 0;
  int to = 0;
  bool contains(int y) const { return y >= from && y <= to; }
  bool empty() const { return to < from; }
};

enum class CorpusErrorKind {
  kIo,
  kMalformedLine,
  kDuplicatePubId,
  kInvalidPublication,
  kUnknownPubId,
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(CorpusErrorKind kind, std::size_t line_no, std::string detail);
  CorpusErrorKind kind() const { return kind_; }
  std::size_t line_no() const { return line_no_; }

 private:
  CorpusErrorKind kind_;
  std::size_t line_no_;
};

/// Immutable publication metadata plus an inverted citation index. Built
/// once via the factory functions; all queries are read-only and safe to run
/// concurrently.
class Corpus {
 public:
  static constexpr YearRange kDefaultSaneYears{1800, 2100};

  Corpus() = default;

  /// JSON-lines, one publication object per line.
  static Corpus from_jsonl(std::string_view text, YearRange sane_years = kDefaultSaneYears);
  static Corpus load(const std::string& path, YearRange sane_years = kDefaultSaneYears);
  static Corpus from_publications(std::vector<Publication> pubs,
                                  YearRange sane_years = kDefaultSaneYears);

  std::size_t size() const { return pubs_.size(); }
  bool contains(std::string_view pub_id) const { return index_.find(pub_id) != index_.end(); }
  const Publication* find(std::string_view pub_id) const;
  const std::vector<Publication>& publications() const { return pubs_; }

  /// References that name publications absent from the corpus (counted once
  /// per citing publication after de-duplication).
  std::uint64_t dangling_reference_count() const { return dangling_references_; }

  /// Publications whose (first or any) author affiliation contains
  /// `affiliation` case-insensitively, within the year range, optionally
  /// restricted to a journal set and to refereed entries. An empty
  /// affiliation matches every publication in the slice.
  PubIdSet query_bibliography(std::string_view affiliation, YearRange years,
                              bool first_author_only, const JournalSet* journals,
                              bool refereed_only) const;

  /// Union of the references of `pubs`, filtered to corpus members and,
  /// when given, to the journal set. Dangling references are dropped.
  PubIdSet cited_set(const PubIdSet& pubs, const JournalSet* journals) const;

  /// Exact per-year publication counts for the journal set; years with no
  /// publications are absent.
  std::map<int, std::uint64_t> year_totals(const JournalSet& journals) const;

  /// Number of corpus publications of year <= up_to_year citing `pub_id`.
  /// Throws CorpusError{kUnknownPubId} for ids outside the corpus.
  std::uint64_t citations_received(std::string_view pub_id, int up_to_year) const;

  static std::string to_jsonl_line(const Publication& pub);
  std::string to_jsonl() const;

 private:
  void add_validated(Publication pub, std::size_t line_no, YearRange sane_years);
  void finalize();

  std::vector<Publication> pubs_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
  // pub_id -> sorted years of the distinct corpus publications citing it
  std::unordered_map<std::string, std::vector<int>, StringHash, std::equal_to<>> citing_years_;
  std::uint64_t dangling_references_ = 0;
};

}  // namespace usagebib
