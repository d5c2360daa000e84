// Acceptance suite: one criterion per check, one PASS/FAIL line each.
// Exits non-zero if any criterion fails or exceeds its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "usagebib/pipeline.hpp"
#include "usagebib/rng.hpp"
#include "usagebib/util.hpp"

using namespace usagebib;

namespace {

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(std::string&)> run;  // throws or appends to the failure note
};

int g_failures = 0;

void run_criterion(const Criterion& c) {
  std::string note;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(note);
  } catch (const std::exception& e) {
    note = e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (note.empty() && elapsed > c.budget_seconds) {
    note = "time budget exceeded: " + format_g9(elapsed) + " s > " +
           format_g9(c.budget_seconds) + " s";
  }
  if (note.empty()) {
    std::printf("CRITERION %2d PASS  (%6.2f s)  %s\n", c.id, elapsed, c.name);
  } else {
    std::printf("CRITERION %2d FAIL  (%6.2f s)  %s -- %s\n", c.id, elapsed, c.name, note.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

void expect(bool ok, const std::string& what, std::string& note) {
  if (!ok && note.empty()) note = what;
}

// ---------------------------------------------------------------- criteria

void cohort_boundaries(std::string& note) {
  const CohortConfig config;
  expect(classify_count(100, config) == CohortCategory::kFrequent, "d=100 must be FREQUENT", note);
  expect(classify_count(1000, config) == CohortCategory::kFrequent, "d=1000 must be FREQUENT",
         note);
  expect(classify_count(99, config) == CohortCategory::kInfrequent, "d=99 must be INFREQUENT",
         note);
  expect(classify_count(1001, config) == CohortCategory::kRemainder, "d=1001 must be REMAINDER",
         note);
  for (std::uint64_t d = 0; d <= 2000; ++d) {
    CohortCategory want;
    if (d == 0) {
      want = CohortCategory::kAbstractOnly;
    } else if (d < 100) {
      want = CohortCategory::kInfrequent;
    } else if (d <= 1000) {
      want = CohortCategory::kFrequent;
    } else {
      want = CohortCategory::kRemainder;
    }
    if (classify_count(d, config) != want) {
      note = "sweep mismatch at d=" + std::to_string(d);
      return;
    }
  }
}

void tld_attribution(std::string& note) {
  for (const char* host : {"x.edu", "x.gov", "x.mil", "x.net"}) {
    if (attribute_country(host, "").code != "US") {
      note = std::string(host) + " must attribute to US";
      return;
    }
  }
  const std::pair<const char*, const char*> cc_fixtures[] = {
      {"host.de", "DE"}, {"host.fr", "FR"}, {"host.nl", "NL"}, {"host.uk", "GB"},
      {"host.jp", "JP"}, {"host.cn", "CN"}, {"host.ru", "RU"}, {"host.br", "BR"},
      {"host.au", "AU"}, {"host.ca", "CA"}, {"host.ch", "CH"}, {"host.at", "AT"},
      {"host.es", "ES"}, {"host.it", "IT"}, {"host.se", "SE"}, {"host.no", "NO"},
      {"host.fi", "FI"}, {"host.in", "IN"}, {"host.za", "ZA"}, {"host.ar", "AR"},
  };
  for (const auto& [host, want] : cc_fixtures) {
    if (attribute_country(host, "").code != want) {
      note = std::string(host) + " must attribute to " + want;
      return;
    }
  }
  for (const char* host : {"", "x.com", "x.org", "x.int", "localhost", "1.2.3.4", "x.xx",
                           "weird..", "x.zz", "...."}) {
    if (!attribute_country(host, "").is_unknown()) {
      note = "'" + std::string(host) + "' must attribute to UNKNOWN";
      return;
    }
  }
}

synth::CommunityModel acceptance_small_model(std::uint64_t seed) {
  synth::CommunityModel m;
  m.entities = {
      {"NL", Entity::Kind::kCountry, "nl", "Netherlands", 10, 16.0, 60},
      {"AR", Entity::Kind::kCountry, "ar", "Argentina", 8, 39.0, -180},
  };
  m.year_from = 2005;
  m.year_to = 2006;
  m.ratio_scale = 500.0;
  m.robots = 2;
  m.background_start = 1995;
  m.background_per_year = 150;
  m.other_per_year = 15;
  m.seed = seed;
  return m;
}

void robot_invariance(std::string& note) {
  const synth::CommunityModel model = acceptance_small_model(911);
  const synth::SynthBundle bundle = synth::generate_all(model);
  const Corpus corpus = Corpus::from_jsonl(bundle.corpus_jsonl);
  const RobotPolicy policy = synth::default_robot_policy();
  const AuxTable aux = AuxTable::parse(bundle.aux_csv);

  RunConfig config;
  config.years = {model.year_from, model.year_to};
  config.entities = synth::pipeline_entities(model);
  config.journals = {JournalSet::main_astronomy()};
  config.seed = 5;
  config.threads = 2;

  auto all_reports = [&](const std::string& log) {
    const IngestResult r = ingest_text(log, policy, config.journals, &corpus, nullptr, 2);
    const auto outputs = compute_entity_years(corpus, r.stats, config);
    ReportBundle reports = indicator_reports(corpus, outputs, &aux, config);
    reports.files["cohorts.csv"] = cohorts_csv(r.stats, config);
    reports.files["user_year_stats.csv"] = stats_csv(r.stats, config.journals);
    reports.files["entity_year_sets.jsonl"] = sets_jsonl(outputs);
    return reports.files;
  };

  const auto clean = all_reports(bundle.log_tsv);

  std::string robots;
  robots.reserve(10000 * 100);
  for (int i = 0; i < 10000; ++i) {
    const bool by_agent = i % 2 == 0;
    robots += "2005-0" + std::to_string(3 + i % 7) + "-15T0" + std::to_string(i % 10) +
              ":30:00-05:00\trob" + std::to_string(i) + "\t";
    robots += by_agent ? "140.1.2." + std::to_string(i % 256)
                       : "203.0.113." + std::to_string(i % 256);
    robots += "\tsweep" + std::to_string(i % 17) + ".example.com\t";
    robots += by_agent ? "MegaCrawler/4." + std::to_string(i % 10) : "Mozilla/5.0 (X11)";
    robots += "\tDOWNLOAD\tB2004." + std::string(i % 10 == 0 ? "0000" : "000" + std::to_string(i % 10)) +
              "\tUNKNOWN\n";
  }
  const std::size_t cut = bundle.log_tsv.find('\n', bundle.log_tsv.size() / 3) + 1;
  const std::size_t robot_cut = robots.find('\n', robots.size() / 2) + 1;
  const std::string contaminated = robots.substr(0, robot_cut) + bundle.log_tsv.substr(0, cut) +
                                   robots.substr(robot_cut) + bundle.log_tsv.substr(cut);

  const auto dirty = all_reports(contaminated);
  if (clean.size() != dirty.size()) {
    note = "report sets differ in size";
    return;
  }
  for (const auto& [name, content] : clean) {
    const auto it = dirty.find(name);
    if (it == dirty.end() || it->second != content) {
      note = "report " + name + " changed under robot contamination";
      return;
    }
  }
}

void h_index_exhaustive(std::string& note) {
  auto brute = [](const std::vector<std::uint64_t>& counts) {
    int best = 0;
    for (int h = 0; h <= static_cast<int>(counts.size()); ++h) {
      int at_least = 0;
      for (const std::uint64_t c : counts) {
        if (c >= static_cast<std::uint64_t>(h)) ++at_least;
      }
      if (at_least >= h) best = h;
    }
    return best;
  };
  std::uint64_t cases = 0;
  std::vector<std::uint64_t> counts;
  for (int len = 0; len <= 6; ++len) {
    std::vector<int> odo(static_cast<std::size_t>(len), 0);
    while (true) {
      counts.assign(odo.begin(), odo.end());
      ++cases;
      if (h_index(counts) != brute(counts)) {
        std::string enumerated;
        for (const std::uint64_t c : counts) enumerated += std::to_string(c) + " ";
        note = "mismatch for multiset [" + enumerated + "]";
        return;
      }
      int pos = len - 1;
      while (pos >= 0 && odo[static_cast<std::size_t>(pos)] == 6) {
        odo[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++odo[static_cast<std::size_t>(pos)];
    }
  }
  expect(cases >= 117649, "must cover at least the 117,649 length-6 cases, covered " +
                              std::to_string(cases),
         note);
}

void overlap_and_baseline(std::string& note) {
  Rng rng(20250601);
  // exact overlap on 1,000 random fixtures
  for (int round = 0; round < 1000; ++round) {
    PubIdSet r, c;
    const auto universe = 20 + rng.below(200);
    for (std::uint64_t i = 0; i < universe; ++i) {
      const std::string id = "u" + std::to_string(i);
      if (rng.bernoulli(0.3)) r.insert(id);
      if (rng.bernoulli(0.3)) c.insert(id);
    }
    if (c.empty()) continue;
    std::unordered_set<std::string> cset(c.begin(), c.end());
    std::uint64_t inter = 0;
    for (const std::string& id : r) inter += cset.count(id);
    const double brute = static_cast<double>(inter) / static_cast<double>(c.size());
    if (overlap_fraction(r, c) != brute) {
      note = "overlap mismatch on fixture " + std::to_string(round);
      return;
    }
  }

  // mean of 10^4 samples within 3 standard errors of the expectation 0.01
  std::vector<std::string> slice;
  slice.reserve(10000);
  for (int i = 0; i < 10000; ++i) slice.push_back("p" + std::to_string(i));
  PubIdSet c;
  for (int i = 0; i < 500; ++i) c.insert("p" + std::to_string((i * 19 + 7) % 10000));
  if (c.size() != 500) {
    note = "fixture construction broke: |C| = " + std::to_string(c.size());
    return;
  }
  const double expectation = 100.0 / 10000.0;
  const double p = 500.0 / 10000.0;
  const double sd_single = std::sqrt(100.0 * p * (1.0 - p)) / 500.0;

  const double mean =
      random_overlap_baseline(slice, 100, c, 10000, 424242, OverlapDenominator::kCited, 2);
  const double tol_big = 3.0 * sd_single / 100.0;
  expect(std::abs(mean - expectation) <= tol_big,
         "10^4-sample mean " + format_g9(mean) + " outside 3 SE of " + format_g9(expectation),
         note);
  if (!note.empty()) return;

  // the default 10-sample estimator is unbiased over 10^3 repetitions
  double grand = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    grand += random_overlap_baseline(slice, 100, c, 10, derive_seed(777, rep),
                                     OverlapDenominator::kCited, 2);
  }
  grand /= reps;
  const double tol_reps = 3.0 * sd_single / std::sqrt(10.0 * reps);
  expect(std::abs(grand - expectation) <= tol_reps,
         "10-sample estimator grand mean " + format_g9(grand) + " outside 3 SE of 0.01", note);
}

void obsolescence_normalization(std::string& note) {
  Rng rng(60601);
  for (int round = 0; round < 100; ++round) {
    // events reference a per-year universe no larger than that year's output
    std::map<int, std::uint64_t> totals;
    for (int y = 1978; y <= 2017; ++y) totals[y] = 5 + rng.below(50);
    std::vector<std::pair<std::string, int>> events;
    const auto n = 1 + rng.below(500);
    for (std::uint64_t i = 0; i < n; ++i) {
      const int year = 1978 + static_cast<int>(rng.below(40));
      events.emplace_back(
          "y" + std::to_string(year) + "e" + std::to_string(rng.below(totals.at(year))), year);
    }
    const YearRange window{1980, 2015};
    const ObsolescenceCurve curve = obsolescence_curve(events, totals, window);
    if (curve.total_events == 0) continue;
    double sum = 0;
    for (const auto& [year, value] : curve.normalized_count) sum += value;
    if (std::abs(sum - 1.0) > 1e-9) {
      note = "normalized_count sums to " + format_g9(sum);
      return;
    }
    // brute-force unique fraction
    std::map<int, std::set<std::string>> unique;
    for (const auto& [id, year] : events) {
      if (year >= 1980 && year <= 2015) unique[year].insert(id);
    }
    for (const auto& [year, ids] : unique) {
      const double want =
          static_cast<double>(ids.size()) / static_cast<double>(totals.at(year));
      if (curve.unique_fraction.at(year) != want) {
        note = "unique_fraction mismatch in year " + std::to_string(year);
        return;
      }
      if (want < 0.0 || want > 1.0) {
        note = "unique_fraction out of range";
        return;
      }
    }
  }
}

void end_to_end_verify(std::string& note) {
  // the default community: 1,000 researchers across 5 entities, amateur and
  // lay populations at the documented ratios scaled down 100x, 2005-2015
  const synth::CommunityModel model = synth::CommunityModel::default_model();
  {
    int researchers = 0;
    for (const auto& e : model.entities) researchers += e.researchers;
    expect(researchers == 1000, "default model must plant 1,000 researchers", note);
    expect(model.entities.size() == 5, "default model must span 5 entities", note);
    if (!note.empty()) return;
  }
  RunConfig config;
  config.threads = 2;
  const VerifyReport report = run_verify(model, config);
  if (!report.ok) {
    note = "verify mismatch: " + report.mismatches.front();
    return;
  }

  // planted overlap beats its random baseline in at least 29 of 30 seeds
  // (a reduced community keeps the thirty runs inside the time budget)
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    synth::CommunityModel small = acceptance_small_model(3000 + seed);
    const synth::SynthBundle bundle = synth::generate_all(small);
    const Corpus corpus = Corpus::from_jsonl(bundle.corpus_jsonl);
    RunConfig small_config;
    small_config.years = {small.year_from, small.year_to};
    small_config.entities = synth::pipeline_entities(small);
    small_config.journals = {JournalSet::main_astronomy()};
    small_config.seed = seed;
    small_config.threads = 2;
    const IngestResult ingest =
        ingest_text(bundle.log_tsv, synth::default_robot_policy(), small_config.journals,
                    &corpus, nullptr, 2);
    const auto outputs = compute_entity_years(corpus, ingest.stats, small_config);
    double overlap = 0, baseline = 0;
    std::size_t n = 0;
    for (const auto& o : outputs) {
      if (std::isnan(o.overlap) || std::isnan(o.baseline)) continue;
      overlap += o.overlap;
      baseline += o.baseline;
      ++n;
    }
    if (n > 0 && overlap / n > baseline / n) ++wins;
  }
  expect(wins >= 29, "overlap beat its baseline in only " + std::to_string(wins) + "/30 seeds",
         note);
}

void gdp_power_law(std::string& note) {
  Rng rng(808);
  std::vector<GdpObservation> exact;
  const double k = 2.5e-4;
  for (int i = 0; i < 40; ++i) {
    const double gdp = rng.uniform(50, 30000);
    const double pop = rng.uniform(0.5, 1400);
    exact.push_back({k * gdp * gdp / pop, gdp, pop});
  }
  const PowerLawFit fit = fit_gdp_power_law(exact);
  expect(std::abs(fit.gdp_exponent - 2.0) <= 1e-9,
         "exact fit b = " + format_g9(fit.gdp_exponent), note);
  expect(std::abs(fit.population_exponent + 1.0) <= 1e-9,
         "exact fit c = " + format_g9(fit.population_exponent), note);
  expect(fit.rms_residual <= 1e-9, "exact fit residual = " + format_g9(fit.rms_residual), note);
  if (!note.empty()) return;

  double sum_b = 0;
  for (int seed = 1; seed <= 30; ++seed) {
    Rng noisy_rng(9000 + static_cast<std::uint64_t>(seed));
    std::vector<GdpObservation> noisy;
    for (int i = 0; i < 50; ++i) {
      const double gdp = noisy_rng.uniform(50, 30000);
      const double pop = noisy_rng.uniform(0.5, 1400);
      const double noise = std::exp(0.05 * noisy_rng.gaussian());
      noisy.push_back({k * gdp * gdp / pop * noise, gdp, pop});
    }
    sum_b += fit_gdp_power_law(noisy).gdp_exponent;
  }
  const double mean_b = sum_b / 30.0;
  expect(mean_b >= 1.9 && mean_b <= 2.1,
         "noisy fit mean b over 30 seeds = " + format_g9(mean_b), note);
}

void base_year_normalization(std::string& note) {
  Rng rng(112);
  for (int round = 0; round < 200; ++round) {
    std::map<int, double> series;
    for (int y = 2005; y <= 2015; ++y) series[y] = rng.uniform(1e-3, 1e6);
    const auto norm = normalize_to_base_year(series, 2005);
    if (norm.at(2005) != 1.0) {
      note = "base year not exactly 1.0";
      return;
    }
    for (const auto& [y1, v1] : norm) {
      for (const auto& [y2, v2] : norm) {
        const double want = series.at(y1) / series.at(y2);
        if (std::abs(v1 / v2 - want) > 1e-12 * std::max(1.0, std::abs(want))) {
          note = "ratio not preserved between " + std::to_string(y1) + " and " +
                 std::to_string(y2);
          return;
        }
      }
    }
  }
}

void ingest_performance(std::string& note) {
  // a million-line synthetic log over a 2,000-publication corpus
  std::vector<Publication> pubs;
  for (int i = 0; i < 2000; ++i) {
    Publication p;
    p.pub_id = "P" + std::to_string(i);
    p.year = 1990 + i % 25;
    p.journal = i % 2 ? "ApJ" : "OtherJ";
    p.refereed = true;
    p.authors = {{"A", "X"}};
    pubs.push_back(std::move(p));
  }
  const Corpus corpus = Corpus::from_publications(std::move(pubs));
  RobotPolicy policy;
  policy.add_agent_pattern("crawler");
  policy.add_ip_block("203.0.113.0/24");

  const char* hosts[] = {"obs.uva.nl", "astro.cornell.edu", "inst.mpg.de", "", "isp.com"};
  const char* agents[] = {"Mozilla/5.0 (X11; Linux)", "Mozilla/5.0 (Windows NT)",
                          "WebCrawler/2.0", "Safari/537.36"};
  std::string log;
  log.reserve(120u << 20);
  Rng rng(314159);
  const int n_lines = 1000000;
  for (int i = 0; i < n_lines; ++i) {
    const int year = 2005 + i % 6;
    log += std::to_string(year);
    log += "-06-15T12:00:";
    const int sec = i % 60;
    log += sec < 10 ? "0" + std::to_string(sec) : std::to_string(sec);
    log += "-05:00\tu";
    log += std::to_string(rng.below(40000));
    log += i % 97 == 0 ? "\t203.0.113.7\t" : "\t140.105.16.8\t";
    log += hosts[rng.below(5)];
    log += '\t';
    log += agents[rng.below(4)];
    const bool download = rng.bernoulli(0.6);
    log += download ? "\tDOWNLOAD\tP" : "\tABSTRACT_VIEW\tP";
    log += std::to_string(rng.below(2000));
    log += "\tDIRECT\n";
  }

  const std::vector<JournalSet> journals{JournalSet::main_astronomy()};
  const auto start = std::chrono::steady_clock::now();
  const IngestResult parallel = ingest_text(log, policy, journals, &corpus, nullptr, 0);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  expect(parallel.summary.lines == n_lines, "line count mismatch", note);
  expect(elapsed < 10.0, "ingest took " + format_g9(elapsed) + " s for 10^6 lines", note);
  if (!note.empty()) return;

  const IngestResult serial = ingest_text(log, policy, journals, &corpus, nullptr, 1);
  expect(stats_csv(serial.stats, journals) == stats_csv(parallel.stats, journals),
         "shard-parallel stats differ from the sequential run", note);
  expect(serial.summary == parallel.summary, "summaries differ between runs", note);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "cohort boundary exactness", 1.0, cohort_boundaries},
      {2, "top-level-domain country attribution", 1.0, tld_attribution},
      {3, "robot traffic leaves reports byte-identical", 10.0, robot_invariance},
      {4, "h-index exhaustive brute-force agreement", 5.0, h_index_exhaustive},
      {5, "overlap exactness and baseline statistics", 60.0, overlap_and_baseline},
      {6, "obsolescence normalization and unique fractions", 5.0, obsolescence_normalization},
      {7, "end-to-end synthetic verify", 300.0, end_to_end_verify},
      {8, "GDP power-law exponent recovery", 30.0, gdp_power_law},
      {9, "base-year normalization exactness", 1.0, base_year_normalization},
      {10, "million-line ingest throughput and parallel equality", 60.0, ingest_performance},
  };
  for (const Criterion& c : criteria) run_criterion(c);
  if (g_failures) {
    std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all %zu criteria passed\n", criteria.size());
  return 0;
}
