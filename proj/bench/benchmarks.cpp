// Serial-vs-parallel benchmarks for the two hot kernels: log ingest and the
// Monte Carlo overlap baseline.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <string>
#include <vector>

#include "usagebib/pipeline.hpp"
#include "usagebib/rng.hpp"

using namespace usagebib;

namespace {

struct IngestFixture {
  std::string log;
  Corpus corpus;
  RobotPolicy policy;
  std::vector<JournalSet> journals{JournalSet::main_astronomy()};

  explicit IngestFixture(int n_lines) {
    std::vector<Publication> pubs;
    for (int i = 0; i < 1000; ++i) {
      Publication p;
      p.pub_id = "P" + std::to_string(i);
      p.year = 1995 + i % 20;
      p.journal = i % 2 ? "ApJ" : "OtherJ";
      p.refereed = true;
      p.authors = {{"A", "X"}};
      pubs.push_back(std::move(p));
    }
    corpus = Corpus::from_publications(std::move(pubs));
    policy.add_agent_pattern("crawler");
    policy.add_ip_block("203.0.113.0/24");

    Rng rng(1);
    log.reserve(static_cast<std::size_t>(n_lines) * 100);
    for (int i = 0; i < n_lines; ++i) {
      log += "2008-06-15T12:00:00-05:00\tu";
      log += std::to_string(rng.below(20000));
      log += "\t140.105.16.8\tobs.uva.nl\tMozilla/5.0\t";
      log += rng.bernoulli(0.6) ? "DOWNLOAD" : "ABSTRACT_VIEW";
      log += "\tP";
      log += std::to_string(rng.below(1000));
      log += "\tDIRECT\n";
    }
  }
};

const IngestFixture& ingest_fixture() {
  static const IngestFixture fixture(200000);
  return fixture;
}

void BM_IngestSerial(benchmark::State& state) {
  const IngestFixture& f = ingest_fixture();
  for (auto _ : state) {
    const IngestResult r = ingest_text(f.log, f.policy, f.journals, &f.corpus, nullptr, 1);
    benchmark::DoNotOptimize(r.stats.size());
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_IngestSerial)->Unit(benchmark::kMillisecond);

void BM_IngestParallel(benchmark::State& state) {
  const IngestFixture& f = ingest_fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const IngestResult r = ingest_text(f.log, f.policy, f.journals, &f.corpus, nullptr, threads);
    benchmark::DoNotOptimize(r.stats.size());
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_IngestParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

struct BaselineFixture {
  std::vector<std::string> slice;
  PubIdSet cited;

  BaselineFixture() {
    for (int i = 0; i < 20000; ++i) slice.push_back("p" + std::to_string(i));
    for (int i = 0; i < 800; ++i) cited.insert("p" + std::to_string(i * 23 % 20000));
  }
};

const BaselineFixture& baseline_fixture() {
  static const BaselineFixture fixture;
  return fixture;
}

void BM_BaselineSerial(benchmark::State& state) {
  const BaselineFixture& f = baseline_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        random_overlap_baseline_serial(f.slice, 2000, f.cited, 64, 42));
  }
}
BENCHMARK(BM_BaselineSerial)->Unit(benchmark::kMillisecond);

void BM_BaselineParallel(benchmark::State& state) {
  const BaselineFixture& f = baseline_fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(random_overlap_baseline(f.slice, 2000, f.cited, 64, 42,
                                                     OverlapDenominator::kCited, threads));
  }
}
BENCHMARK(BM_BaselineParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ParseLine(benchmark::State& state) {
  const char* line =
      "2008-01-15T09:30:00-05:00\tu123\t131.142.1.1\tcfa.harvard.edu\tMozilla/5.0\tDOWNLOAD\t"
      "2007ApJ...999..123H\tDIRECT";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_log_line(line));
  }
}
BENCHMARK(BM_ParseLine);

}  // namespace

BENCHMARK_MAIN();
