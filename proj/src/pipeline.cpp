#include "usagebib/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "usagebib/rng.hpp"
#include "usagebib/util.hpp"

namespace usagebib {

const JournalSet& RunConfig::primary_journals() const {
  for (const JournalSet& set : journals) {
    if (set.name == primary_set) return set;
  }
  throw ConfigError("journal set '" + primary_set + "' is not configured");
}

std::optional<std::string_view> RunConfig::restriction() const {
  if (!cohort_restriction || cohort_restriction->empty()) return std::nullopt;
  return std::string_view(*cohort_restriction);
}

OverlapDenominator denominator_from_name(std::string_view name) {
  if (name == "cited") return OverlapDenominator::kCited;
  if (name == "downloaded") return OverlapDenominator::kDownloaded;
  if (name == "union") return OverlapDenominator::kUnion;
  throw ConfigError("overlap denominator must be cited|downloaded|union, got: " +
                    std::string(name));
}

std::string_view denominator_name(OverlapDenominator d) {
  switch (d) {
    case OverlapDenominator::kCited: return "cited";
    case OverlapDenominator::kDownloaded: return "downloaded";
    case OverlapDenominator::kUnion: return "union";
  }
  return "cited";
}

RunConfig RunConfig::from_config(const KeyValueFile& kv) {
  RunConfig c;
  c.log_path = kv.get_or("logs", "");
  c.corpus_path = kv.get_or("corpus", "");
  c.robot_policy_path = kv.get_or("robot_policy", "");
  c.entity_map_path = kv.get_or("entity_map", "");
  c.aux_path = kv.get_or("aux_series", "");
  c.out_dir = kv.get_or("out_dir", c.out_dir);
  c.model_path = kv.get_or("model", "");

  c.cohort.lower = static_cast<std::uint64_t>(kv.get_int("lower", 100));
  c.cohort.upper = static_cast<std::uint64_t>(kv.get_int("upper", 1000));
  if (c.cohort.lower < 1 || c.cohort.lower > c.cohort.upper) {
    throw ConfigError("cohort bounds must satisfy 1 <= lower <= upper");
  }

  if (auto years = kv.get("years")) {
    const std::size_t dash = years->find('-');
    if (dash == std::string::npos) throw ConfigError("years must be <from>-<to>: " + *years);
    try {
      c.years.from = std::stoi(years->substr(0, dash));
      c.years.to = std::stoi(years->substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("years must be numeric: " + *years);
    }
  }
  if (c.years.empty()) throw ConfigError("year range is empty");

  c.window_from = static_cast<int>(kv.get_int("window_from", c.window_from));
  c.base_year = static_cast<int>(kv.get_int("base_year", c.base_year));
  if (auto denom = kv.get("overlap_denominator")) c.denominator = denominator_from_name(*denom);
  c.baseline_samples = static_cast<std::size_t>(kv.get_int("samples", 10));
  if (c.baseline_samples == 0) throw ConfigError("samples must be positive");
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 42));
  if (auto corr = kv.get("correlation")) {
    if (*corr == "pearson") {
      c.correlation = CorrelationKind::kPearson;
    } else if (*corr == "spearman") {
      c.correlation = CorrelationKind::kSpearman;
    } else {
      throw ConfigError("correlation must be pearson|spearman, got: " + *corr);
    }
  }
  c.threads = static_cast<int>(kv.get_int("threads", 0));

  const auto journal_lines = kv.get_all("journal_set");
  if (journal_lines.empty()) {
    c.journals.push_back(JournalSet::main_astronomy());
  } else {
    for (const std::string& line : journal_lines) {
      // <name>: <journal>|<journal>|...
      const std::size_t colon = line.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("journal_set must be '<name>: J1|J2|...': " + line);
      }
      JournalSet set;
      set.name = std::string(trim(line.substr(0, colon)));
      const std::string members_text = line.substr(colon + 1);
      for (std::string_view member : split(members_text, '|')) {
        const std::string_view j = trim(member);
        if (!j.empty()) set.members.insert(std::string(j));
      }
      if (set.name.empty() || set.members.empty()) {
        throw ConfigError("journal_set needs a name and at least one member: " + line);
      }
      c.journals.push_back(std::move(set));
    }
  }
  c.primary_set = kv.get_or("primary_set", c.journals.front().name);
  c.primary_journals();  // validates

  if (auto restriction = kv.get("cohort_restriction")) {
    if (*restriction != "total") {
      bool known = false;
      for (const JournalSet& set : c.journals) known = known || set.name == *restriction;
      if (!known) throw ConfigError("cohort_restriction names unknown journal set: " + *restriction);
      c.cohort_restriction = *restriction;
    }
  }

  for (const std::string& line : kv.get_all("entity")) {
    // <id> <country|institute> <affiliation...>
    const std::string_view t = trim(line);
    const std::size_t ws1 = t.find(' ');
    if (ws1 == std::string_view::npos) throw ConfigError("entity needs 3 fields: " + line);
    const std::string_view rest = trim(t.substr(ws1 + 1));
    const std::size_t ws2 = rest.find(' ');
    if (ws2 == std::string_view::npos) throw ConfigError("entity needs 3 fields: " + line);
    Entity e;
    e.id = std::string(t.substr(0, ws1));
    const std::string_view kind = rest.substr(0, ws2);
    if (kind == "country") {
      e.kind = Entity::Kind::kCountry;
    } else if (kind == "institute") {
      e.kind = Entity::Kind::kInstitute;
    } else {
      throw ConfigError("entity kind must be country|institute: " + line);
    }
    e.affiliation = std::string(trim(rest.substr(ws2 + 1)));
    c.entities.push_back(std::move(e));
  }

  c.obsolescence_entity = kv.get_or("obsolescence_entity", "");
  c.obsolescence_year = static_cast<int>(kv.get_int("obsolescence_year", 0));
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  return from_config(KeyValueFile::load(path));
}

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1, omp_get_max_threads());
}

struct PendingError {
  bool set = false;
  ParseErrorKind kind{};
  int column = 0;
  std::size_t line_no = std::numeric_limits<std::size_t>::max();
  std::string detail;
};

/// Handles one raw log line; returns false if the line was a comment/blank.
bool handle_line(std::string_view line, std::size_t line_no, const RobotPolicy& policy,
                 Accumulator& acc, IngestSummary& summary) {
  if (line.empty() || line == "\r") {
    ++summary.blanks;
    return false;
  }
  if (line.front() == '#') {
    ++summary.comments;
    return false;
  }
  const LogRecord record = parse_log_line(line, line_no);
  ++summary.records;
  if (is_robot(record, policy)) {
    ++summary.robot_records;
    return true;
  }
  acc.add(record);
  return true;
}

}  // namespace

IngestResult ingest_serial(std::istream& in, const RobotPolicy& policy,
                           const std::vector<JournalSet>& journals, const Corpus* corpus,
                           const EntityMap* entities) {
  Accumulator acc(journals, corpus, entities);
  IngestSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++summary.lines;
    handle_line(line, line_no, policy, acc, summary);
  }
  IngestResult result;
  result.summary = summary;
  result.summary.unidentified_records = acc.unidentified_records();
  result.stats = acc.finish();
  return result;
}

IngestResult ingest_parallel(std::istream& in, const RobotPolicy& policy,
                             const std::vector<JournalSet>& journals, const Corpus* corpus,
                             const EntityMap* entities, int threads, std::size_t block_bytes) {
  const int n_threads = resolve_threads(threads);
  std::vector<Accumulator> accs;
  accs.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) accs.emplace_back(journals, corpus, entities);
  std::vector<IngestSummary> summaries(static_cast<std::size_t>(n_threads));
  std::vector<PendingError> errors(static_cast<std::size_t>(n_threads));

  std::string block;
  std::string pending;
  std::vector<std::string_view> lines;
  std::size_t line_base = 0;
  bool eof = false;
  while (!eof) {
    block.assign(pending);
    pending.clear();
    const std::size_t old = block.size();
    block.resize(old + block_bytes);
    in.read(block.data() + static_cast<std::ptrdiff_t>(old),
            static_cast<std::streamsize>(block_bytes));
    const auto got = static_cast<std::size_t>(in.gcount());
    block.resize(old + got);
    eof = got == 0;
    if (block.empty()) break;
    if (!eof) {
      const std::size_t last_nl = block.rfind('\n');
      if (last_nl == std::string::npos) {
        pending = std::move(block);
        block.clear();
        continue;
      }
      pending.assign(block, last_nl + 1, std::string::npos);
      block.resize(last_nl + 1);
    }

    lines.clear();
    std::size_t start = 0;
    while (start < block.size()) {
      std::size_t nl = block.find('\n', start);
      if (nl == std::string::npos) nl = block.size();
      lines.push_back(std::string_view(block).substr(start, nl - start));
      start = nl + 1;
    }

#pragma omp parallel num_threads(n_threads)
    {
      const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(lines.size()); ++i) {
        if (errors[tid].set) continue;  // a shard error poisons only later work
        const std::size_t line_no = line_base + static_cast<std::size_t>(i) + 1;
        ++summaries[tid].lines;
        try {
          handle_line(lines[static_cast<std::size_t>(i)], line_no, policy, accs[tid],
                      summaries[tid]);
        } catch (const LogParseError& e) {
          PendingError& err = errors[tid];
          err.set = true;
          err.kind = e.kind();
          err.column = e.column();
          err.line_no = e.line_no();
          err.detail = e.detail();
        }
      }
    }
    // the earliest failing line wins so parallel errors match the serial run
    const PendingError* first = nullptr;
    for (const PendingError& err : errors) {
      if (err.set && (!first || err.line_no < first->line_no)) first = &err;
    }
    if (first) throw LogParseError(first->kind, first->column, first->line_no, first->detail);
    line_base += lines.size();
  }

  IngestResult result;
  for (std::size_t i = 1; i < accs.size(); ++i) accs[0].merge(std::move(accs[i]));
  for (const IngestSummary& s : summaries) {
    result.summary.lines += s.lines;
    result.summary.comments += s.comments;
    result.summary.blanks += s.blanks;
    result.summary.records += s.records;
    result.summary.robot_records += s.robot_records;
  }
  result.summary.unidentified_records = accs[0].unidentified_records();
  result.stats = accs[0].finish();
  return result;
}

IngestResult ingest_file(const std::string& path, const RobotPolicy& policy,
                         const std::vector<JournalSet>& journals, const Corpus* corpus,
                         const EntityMap* entities, int threads) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open log file: " + path);
  if (resolve_threads(threads) == 1) {
    return ingest_serial(in, policy, journals, corpus, entities);
  }
  return ingest_parallel(in, policy, journals, corpus, entities, threads);
}

IngestResult ingest_text(std::string_view text, const RobotPolicy& policy,
                         const std::vector<JournalSet>& journals, const Corpus* corpus,
                         const EntityMap* entities, int threads) {
  // in-memory logs are parsed in place: lines are views into `text`
  std::vector<std::string_view> lines;
  lines.reserve(text.size() / 64 + 16);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  const int n_threads = resolve_threads(threads);
  IngestResult result;
  if (n_threads == 1) {
    Accumulator acc(journals, corpus, entities);
    IngestSummary summary;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      ++summary.lines;
      handle_line(lines[i], i + 1, policy, acc, summary);
    }
    result.summary = summary;
    result.summary.unidentified_records = acc.unidentified_records();
    result.stats = acc.finish();
    return result;
  }

  std::vector<Accumulator> accs;
  accs.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) accs.emplace_back(journals, corpus, entities);
  std::vector<IngestSummary> summaries(static_cast<std::size_t>(n_threads));
  std::vector<PendingError> errors(static_cast<std::size_t>(n_threads));
#pragma omp parallel num_threads(n_threads)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(lines.size()); ++i) {
      if (errors[tid].set) continue;
      ++summaries[tid].lines;
      try {
        handle_line(lines[static_cast<std::size_t>(i)], static_cast<std::size_t>(i) + 1, policy,
                    accs[tid], summaries[tid]);
      } catch (const LogParseError& e) {
        PendingError& err = errors[tid];
        err.set = true;
        err.kind = e.kind();
        err.column = e.column();
        err.line_no = e.line_no();
        err.detail = e.detail();
      }
    }
  }
  const PendingError* first = nullptr;
  for (const PendingError& err : errors) {
    if (err.set && (!first || err.line_no < first->line_no)) first = &err;
  }
  if (first) throw LogParseError(first->kind, first->column, first->line_no, first->detail);
  for (std::size_t i = 1; i < accs.size(); ++i) accs[0].merge(std::move(accs[i]));
  for (const IngestSummary& s : summaries) {
    result.summary.lines += s.lines;
    result.summary.comments += s.comments;
    result.summary.blanks += s.blanks;
    result.summary.records += s.records;
    result.summary.robot_records += s.robot_records;
  }
  result.summary.unidentified_records = accs[0].unidentified_records();
  result.stats = accs[0].finish();
  return result;
}

std::vector<std::pair<std::string, int>> citation_events(const Corpus& corpus,
                                                         const PubIdSet& p_first,
                                                         const JournalSet& journals) {
  std::vector<std::pair<std::string, int>> events;
  std::set<std::string_view> seen;
  for (const std::string& id : p_first) {
    const Publication* pub = corpus.find(id);
    if (!pub) continue;
    seen.clear();
    for (const std::string& ref : pub->references) {
      if (!seen.insert(ref).second) continue;
      const Publication* target = corpus.find(ref);
      if (!target || !journals.contains(target->journal)) continue;
      events.emplace_back(ref, target->year);
    }
  }
  return events;
}

void validate_entities(std::span<const Entity> entities, const Corpus& corpus,
                       const EntityMap* entity_map) {
  for (const Entity& entity : entities) {
    bool resolvable = false;
    if (entity.kind == Entity::Kind::kCountry) {
      // attribution can only ever yield assigned ISO codes
      std::string iso;
      resolvable = cctld_to_iso(to_lower(entity.id), iso) && iso == entity.id;
    } else {
      resolvable = entity_map && entity_map->maps_to(entity.id);
    }
    if (!resolvable) {
      const PubIdSet matches = corpus.query_bibliography(
          entity.affiliation, Corpus::kDefaultSaneYears, false, nullptr, false);
      resolvable = !matches.empty();
    }
    if (!resolvable) {
      throw IndicatorError(IndicatorErrorKind::kUnknownEntity,
                           entity.id + ": no usage mapping and no matching affiliation");
    }
  }
}

std::vector<EntityYearOutputs> compute_entity_years(const Corpus& corpus,
                                                    std::span<const UserYearStats> stats,
                                                    const RunConfig& config) {
  if (config.entities.empty()) {
    throw ConfigError("no entities configured; add 'entity = <id> <kind> <affiliation>'");
  }
  const JournalSet& journals = config.primary_journals();
  const int n_years = config.years.to - config.years.from + 1;

  // per-year sampling slices: journal-set publications in [window_from, Y]
  std::vector<std::vector<std::string>> slices(static_cast<std::size_t>(n_years));
  for (int yi = 0; yi < n_years; ++yi) {
    const int year = config.years.from + yi;
    for (const Publication& pub : corpus.publications()) {
      if (!journals.contains(pub.journal)) continue;
      if (pub.year < config.window_from || pub.year > year) continue;
      slices[static_cast<std::size_t>(yi)].push_back(pub.pub_id);
    }
  }

  const std::size_t n_tasks = config.entities.size() * static_cast<std::size_t>(n_years);
  std::vector<EntityYearOutputs> outputs(n_tasks);
  const int threads = resolve_threads(config.threads);
  const double nan = std::numeric_limits<double>::quiet_NaN();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(n_tasks); ++ti) {
    const std::size_t ei = static_cast<std::size_t>(ti) / static_cast<std::size_t>(n_years);
    const int year = config.years.from + static_cast<int>(ti % n_years);
    EntityYearOutputs& out = outputs[static_cast<std::size_t>(ti)];
    out.data = build_entity_year_sets(corpus, stats, config.entities[ei], year, journals,
                                      config.cohort, config.restriction());
    const PubIdSet& R = out.data.sets.R;
    const PubIdSet& C = out.data.sets.C;
    try {
      out.overlap = overlap_fraction(R, C, config.denominator);
    } catch (const IndicatorError&) {
      out.overlap = nan;
    }
    const std::vector<std::string>& slice = slices[static_cast<std::size_t>(ti % n_years)];
    try {
      out.baseline = random_overlap_baseline(slice, R.size(), C, config.baseline_samples,
                                             derive_seed(config.seed, static_cast<std::uint64_t>(ti)),
                                             config.denominator, /*threads=*/1);
    } catch (const IndicatorError&) {
      out.baseline = nan;
    }
    out.h_index_next = h_index_next_year(corpus, out.data.sets.P_first, year);
  }
  return outputs;
}

VerifyReport run_verify(const synth::CommunityModel& model, const RunConfig& base) {
  return verify_bundle(synth::generate_all(model), model, base);
}

VerifyReport verify_bundle(const synth::SynthBundle& bundle,
                           const synth::CommunityModel& model, const RunConfig& base) {
  RunConfig config = base;
  config.cohort = {model.rate_lower, model.rate_upper};
  config.years = {model.year_from, model.year_to};
  config.entities = synth::pipeline_entities(model);
  config.journals = {JournalSet::main_astronomy()};
  config.primary_set = "main";
  config.cohort_restriction.reset();

  const Corpus corpus = Corpus::from_jsonl(bundle.corpus_jsonl);
  const RobotPolicy policy = synth::default_robot_policy();
  const EntityMap entity_map = EntityMap::parse(bundle.entity_map);
  const IngestResult ingest = ingest_text(bundle.log_tsv, policy, config.journals, &corpus,
                                          &entity_map, config.threads);
  const std::vector<EntityYearOutputs> outputs =
      compute_entity_years(corpus, ingest.stats, config);

  VerifyReport report;
  auto mismatch = [&](const std::string& entity, int year, std::string_view quantity,
                      const std::string& detail) {
    report.ok = false;
    report.mismatches.push_back("(" + entity + ", " + std::to_string(year) + ", " +
                                std::string(quantity) + "): " + detail);
  };
  auto check_set = [&](const std::string& entity, int year, std::string_view quantity,
                       const PubIdSet& got, const PubIdSet& want) {
    if (got == want) return;
    std::string detail = "expected " + std::to_string(want.size()) + " ids, got " +
                         std::to_string(got.size());
    for (const std::string& id : want) {
      if (got.find(id) == got.end()) {
        detail += "; first missing " + id;
        break;
      }
    }
    for (const std::string& id : got) {
      if (want.find(id) == want.end()) {
        detail += "; first unexpected " + id;
        break;
      }
    }
    mismatch(entity, year, quantity, detail);
  };

  // entity-years are checked in sorted order so the first mismatch is stable
  std::vector<std::size_t> order(outputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = outputs[a].data.sets;
    const auto& sb = outputs[b].data.sets;
    if (sa.entity != sb.entity) return sa.entity < sb.entity;
    return sa.year < sb.year;
  });

  auto entity_by_id = [&](const std::string& id) -> const Entity& {
    for (const Entity& e : config.entities) {
      if (e.id == id) return e;
    }
    throw IndicatorError(IndicatorErrorKind::kUnknownEntity, id);
  };

  for (const std::size_t i : order) {
    const EntityYearOutputs& out = outputs[i];
    const std::string& entity = out.data.sets.entity;
    const int year = out.data.sets.year;
    static const synth::EntityYearTruth kEmpty{};
    const synth::EntityYearTruth* truth = bundle.truth.find(entity, year);
    if (!truth) truth = &kEmpty;

    const std::set<std::string> recovered_frequent = frequent_users(
        ingest.stats, year, entity_by_id(entity), config.cohort, config.restriction());
    if (recovered_frequent != truth->frequent) {
      mismatch(entity, year, "frequent_users",
               "expected " + std::to_string(truth->frequent.size()) + " users, got " +
                   std::to_string(recovered_frequent.size()));
    }
    if (out.data.frequent_user_count != truth->frequent.size()) {
      mismatch(entity, year, "frequent_user_count",
               "expected " + std::to_string(truth->frequent.size()) + ", got " +
                   std::to_string(out.data.frequent_user_count));
    }
    if (out.data.first_author_count != truth->first_author_count) {
      mismatch(entity, year, "first_author_count",
               "expected " + std::to_string(truth->first_author_count) + ", got " +
                   std::to_string(out.data.first_author_count));
    }
    check_set(entity, year, "R", out.data.sets.R, truth->R);
    check_set(entity, year, "P_first", out.data.sets.P_first, truth->P_first);
    check_set(entity, year, "P_any", out.data.sets.P_any, truth->P_any);
    check_set(entity, year, "C", out.data.sets.C, truth->C);
  }

  // pooled correlation between cohort size and first authors
  double recovered_r = std::numeric_limits<double>::quiet_NaN();
  {
    std::vector<double> xs, ys;
    for (const std::size_t i : order) {
      xs.push_back(static_cast<double>(outputs[i].data.frequent_user_count));
      ys.push_back(static_cast<double>(outputs[i].data.first_author_count));
    }
    try {
      recovered_r = pearson_r(xs, ys);
    } catch (const IndicatorError&) {
    }
    const double planted = bundle.truth.planted_pearson;
    if (!std::isnan(planted)) {
      if (std::isnan(recovered_r) || std::abs(recovered_r - planted) > 0.05) {
        mismatch("*", 0, "pearson_frequent_vs_first_authors",
                 "planted " + format_g9(planted) + ", recovered " + format_g9(recovered_r));
      }
    }
  }

  // planted overlap must beat the random baseline
  double mean_overlap = 0, mean_baseline = 0;
  std::size_t n_defined = 0;
  for (const EntityYearOutputs& out : outputs) {
    if (std::isnan(out.overlap) || std::isnan(out.baseline)) continue;
    mean_overlap += out.overlap;
    mean_baseline += out.baseline;
    ++n_defined;
  }
  if (n_defined > 0) {
    mean_overlap /= static_cast<double>(n_defined);
    mean_baseline /= static_cast<double>(n_defined);
    if (bundle.truth.planted_overlap_probability > 0 && mean_overlap <= mean_baseline) {
      mismatch("*", 0, "overlap_vs_baseline",
               "mean overlap " + format_g9(mean_overlap) + " does not exceed baseline " +
                   format_g9(mean_baseline));
    }
  }

  std::string summary;
  summary += "verify: entities=" + std::to_string(config.entities.size()) +
             " years=" + std::to_string(config.years.from) + "-" + std::to_string(config.years.to) +
             "\n";
  summary += "  log lines=" + std::to_string(ingest.summary.lines) +
             " records=" + std::to_string(ingest.summary.records) +
             " robots=" + std::to_string(ingest.summary.robot_records) + "\n";
  summary += "  pearson recovered=" + format_g9(recovered_r) +
             " planted=" + format_g9(bundle.truth.planted_pearson) + "\n";
  summary += "  mean overlap=" + format_g9(mean_overlap) +
             " mean baseline=" + format_g9(mean_baseline) + "\n";
  summary += report.ok ? "  result: OK\n" : "  result: MISMATCH\n";
  report.summary = std::move(summary);
  return report;
}

}  // namespace usagebib
