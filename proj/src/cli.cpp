#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <vector>

#include <CLI11.hpp>

#include "usagebib/pipeline.hpp"
#include "usagebib/util.hpp"

namespace usagebib {

namespace {

struct CliState {
  std::string config_path;
  std::string logs, corpus, policy, emap, aux, out, model;
  std::string years, denominator, correlation, restriction, obs_entity;
  std::uint64_t lower = 0, upper = 0, seed = 0, samples = 0;
  int base_year = 0, threads = 0, obs_year = 0;

  std::map<std::string, std::vector<CLI::Option*>> options;

  bool is_set(const std::string& name) const {
    const auto it = options.find(name);
    if (it == options.end()) return false;
    for (const CLI::Option* o : it->second) {
      if (o->count() > 0) return true;
    }
    return false;
  }
};

void add_common_options(CLI::App* cmd, CliState& s) {
  auto track = [&](const std::string& name, CLI::Option* o) { s.options[name].push_back(o); };
  track("config", cmd->add_option("--config", s.config_path, "run configuration file"));
  track("logs", cmd->add_option("--logs", s.logs, "clickstream log file (TSV)"));
  track("corpus", cmd->add_option("--corpus", s.corpus, "publication corpus (JSON lines)"));
  track("robot-policy",
        cmd->add_option("--robot-policy", s.policy, "robot filter policy file"));
  track("entity-map", cmd->add_option("--entity-map", s.emap, "hostname-suffix entity map"));
  track("aux", cmd->add_option("--aux", s.aux, "auxiliary series CSV"));
  track("out", cmd->add_option("--out", s.out, "output directory"));
  track("model", cmd->add_option("--model", s.model, "community model file"));
  track("lower", cmd->add_option("--lower", s.lower, "frequent-user lower bound"));
  track("upper", cmd->add_option("--upper", s.upper, "frequent-user upper bound"));
  track("years", cmd->add_option("--years", s.years, "analysis year range, e.g. 2005-2015"));
  track("base-year", cmd->add_option("--base-year", s.base_year, "normalization base year"));
  track("overlap-denominator",
        cmd->add_option("--overlap-denominator", s.denominator,
                        "overlap denominator: cited|downloaded|union"));
  track("seed", cmd->add_option("--seed", s.seed, "random seed"));
  track("samples", cmd->add_option("--samples", s.samples, "baseline sample count"));
  track("correlation",
        cmd->add_option("--correlation", s.correlation, "correlation kind: pearson|spearman"));
  track("threads", cmd->add_option("--threads", s.threads, "worker threads (0 = all)"));
  track("cohort-restriction",
        cmd->add_option("--cohort-restriction", s.restriction,
                        "journal set restricting frequency classification, or 'total'"));
  track("obsolescence-entity",
        cmd->add_option("--obsolescence-entity", s.obs_entity, "entity for the fig7 report"));
  track("obsolescence-year",
        cmd->add_option("--obsolescence-year", s.obs_year, "year for the fig7 report"));
}

RunConfig build_config(const CliState& s) {
  // defaults come from an empty config so flag-only runs behave like
  // config-file runs
  RunConfig config = s.config_path.empty()
                         ? RunConfig::from_config(KeyValueFile::parse(""))
                         : RunConfig::load(s.config_path);
  if (const char* env = std::getenv("USAGEBIB_OUT_DIR"); env && *env) config.out_dir = env;
  if (s.is_set("logs")) config.log_path = s.logs;
  if (s.is_set("corpus")) config.corpus_path = s.corpus;
  if (s.is_set("robot-policy")) config.robot_policy_path = s.policy;
  if (s.is_set("entity-map")) config.entity_map_path = s.emap;
  if (s.is_set("aux")) config.aux_path = s.aux;
  if (s.is_set("out")) config.out_dir = s.out;
  if (s.is_set("model")) config.model_path = s.model;
  if (s.is_set("lower")) config.cohort.lower = s.lower;
  if (s.is_set("upper")) config.cohort.upper = s.upper;
  if (config.cohort.lower < 1 || config.cohort.lower > config.cohort.upper) {
    throw ConfigError("cohort bounds must satisfy 1 <= lower <= upper");
  }
  if (s.is_set("years")) {
    const std::size_t dash = s.years.find('-');
    if (dash == std::string::npos) throw ConfigError("years must be <from>-<to>: " + s.years);
    try {
      config.years.from = std::stoi(s.years.substr(0, dash));
      config.years.to = std::stoi(s.years.substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("years must be numeric: " + s.years);
    }
    if (config.years.empty()) throw ConfigError("year range is empty");
  }
  if (s.is_set("base-year")) config.base_year = s.base_year;
  if (s.is_set("overlap-denominator")) {
    config.denominator = denominator_from_name(s.denominator);
  }
  if (s.is_set("seed")) config.seed = s.seed;
  if (s.is_set("samples")) {
    if (s.samples == 0) throw ConfigError("samples must be positive");
    config.baseline_samples = s.samples;
  }
  if (s.is_set("correlation")) {
    if (s.correlation == "pearson") {
      config.correlation = CorrelationKind::kPearson;
    } else if (s.correlation == "spearman") {
      config.correlation = CorrelationKind::kSpearman;
    } else {
      throw ConfigError("correlation must be pearson|spearman, got: " + s.correlation);
    }
  }
  if (s.is_set("threads")) config.threads = s.threads;
  if (s.is_set("cohort-restriction")) {
    if (s.restriction == "total") {
      config.cohort_restriction.reset();
    } else {
      config.cohort_restriction = s.restriction;
    }
  }
  if (s.is_set("obsolescence-entity")) config.obsolescence_entity = s.obs_entity;
  if (s.is_set("obsolescence-year")) config.obsolescence_year = s.obs_year;
  return config;
}

void require_input(const std::string& path, std::string_view what) {
  if (path.empty()) {
    throw ConfigError("no " + std::string(what) + " path configured");
  }
  if (!file_exists(path)) {
    throw ConfigError(std::string(what) + " file not found: " + path);
  }
}

std::string write_output(const RunConfig& config, const std::string& name,
                         std::string_view content) {
  std::filesystem::create_directories(config.out_dir);
  const std::string path = (std::filesystem::path(config.out_dir) / name).string();
  write_file(path, content);
  return path;
}

struct LoadedInputs {
  RobotPolicy policy;
  Corpus corpus;
  bool have_corpus = false;
  EntityMap entity_map;
  AuxTable aux;
  bool have_aux = false;
};

LoadedInputs load_inputs(const RunConfig& config, bool need_corpus) {
  LoadedInputs in;
  if (!config.robot_policy_path.empty()) {
    require_input(config.robot_policy_path, "robot policy");
    in.policy = RobotPolicy::load(config.robot_policy_path);
  }
  if (need_corpus) {
    require_input(config.corpus_path, "corpus");
  }
  if (!config.corpus_path.empty()) {
    require_input(config.corpus_path, "corpus");
    in.corpus = Corpus::load(config.corpus_path);
    in.have_corpus = true;
  }
  if (!config.entity_map_path.empty()) {
    require_input(config.entity_map_path, "entity map");
    in.entity_map = EntityMap::load(config.entity_map_path);
  }
  if (!config.aux_path.empty()) {
    require_input(config.aux_path, "aux series");
    in.aux = AuxTable::load(config.aux_path);
    in.have_aux = true;
  }
  return in;
}

IngestResult run_ingest(const RunConfig& config, const LoadedInputs& in) {
  require_input(config.log_path, "log");
  return ingest_file(config.log_path, in.policy, config.journals,
                     in.have_corpus ? &in.corpus : nullptr,
                     in.entity_map.empty() ? nullptr : &in.entity_map, config.threads);
}

void print_ingest_summary(const IngestResult& result) {
  const IngestSummary& s = result.summary;
  std::cout << "ingest: lines=" << s.lines << " records=" << s.records
            << " robots=" << s.robot_records << " unidentified=" << s.unidentified_records
            << " comments=" << s.comments << " blanks=" << s.blanks << "\n";
  std::cout << "stats: user-years=" << result.stats.size() << "\n";
}

int cmd_ingest(const RunConfig& config) {
  const LoadedInputs in = load_inputs(config, false);
  const IngestResult result = run_ingest(config, in);
  print_ingest_summary(result);
  if (in.have_corpus) {
    std::cout << "corpus: publications=" << in.corpus.size()
              << " dangling-references=" << in.corpus.dangling_reference_count() << "\n";
  }
  std::cout << "wrote " << write_output(config, "user_year_stats.csv",
                                        stats_csv(result.stats, config.journals))
            << "\n";
  return 0;
}

int cmd_cohorts(const RunConfig& config) {
  const LoadedInputs in = load_inputs(config, false);
  const IngestResult result = run_ingest(config, in);
  print_ingest_summary(result);
  std::cout << "wrote " << write_output(config, "cohorts.csv", cohorts_csv(result.stats, config))
            << "\n";
  return 0;
}

int cmd_sets(const RunConfig& config) {
  const LoadedInputs in = load_inputs(config, true);
  validate_entities(config.entities, in.corpus, in.entity_map.empty() ? nullptr : &in.entity_map);
  const IngestResult result = run_ingest(config, in);
  print_ingest_summary(result);
  const auto outputs = compute_entity_years(in.corpus, result.stats, config);
  std::cout << "wrote " << write_output(config, "entity_year_sets.jsonl", sets_jsonl(outputs))
            << "\n";
  return 0;
}

int cmd_indicators(const RunConfig& config) {
  const LoadedInputs in = load_inputs(config, true);
  validate_entities(config.entities, in.corpus, in.entity_map.empty() ? nullptr : &in.entity_map);
  const IngestResult result = run_ingest(config, in);
  print_ingest_summary(result);
  const auto outputs = compute_entity_years(in.corpus, result.stats, config);
  const ReportBundle reports =
      indicator_reports(in.corpus, outputs, in.have_aux ? &in.aux : nullptr, config);
  for (const std::string& note : reports.notes) std::cout << "note: " << note << "\n";
  for (const auto& [name, content] : reports.files) {
    std::cout << "wrote " << write_output(config, name, content) << "\n";
  }
  return 0;
}

synth::CommunityModel model_for(const RunConfig& config, const CliState& s) {
  synth::CommunityModel model;
  if (!config.model_path.empty()) {
    require_input(config.model_path, "model");
    model = synth::CommunityModel::load(config.model_path);
  } else {
    model = synth::CommunityModel::default_model();
  }
  if (s.is_set("seed")) model.seed = config.seed;
  if (s.is_set("years")) {
    model.year_from = config.years.from;
    model.year_to = config.years.to;
  }
  if (s.is_set("lower")) model.rate_lower = config.cohort.lower;
  if (s.is_set("upper")) model.rate_upper = config.cohort.upper;
  model.validate();
  return model;
}

int cmd_synth(const RunConfig& config, const CliState& s) {
  const synth::CommunityModel model = model_for(config, s);
  const synth::SynthBundle bundle = synth::generate_all(model);
  std::cout << "synth: entities=" << model.entities.size()
            << " researchers=" << model.total_researchers() << " years=" << model.year_from << "-"
            << model.year_to << " seed=" << model.seed << "\n";
  std::cout << "wrote " << write_output(config, "logs.tsv", bundle.log_tsv) << "\n";
  std::cout << "wrote " << write_output(config, "corpus.jsonl", bundle.corpus_jsonl) << "\n";
  std::cout << "wrote " << write_output(config, "robots.policy", bundle.robots_policy) << "\n";
  std::cout << "wrote " << write_output(config, "entities.map", bundle.entity_map) << "\n";
  std::cout << "wrote " << write_output(config, "aux_series.csv", bundle.aux_csv) << "\n";
  std::cout << "wrote " << write_output(config, "ground_truth.jsonl", bundle.truth.to_jsonl())
            << "\n";
  std::cout << "wrote " << write_output(config, "model.cfg", model.serialize()) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& config, const CliState& s) {
  const synth::CommunityModel model = model_for(config, s);
  const VerifyReport report = run_verify(model, config);
  std::cout << report.summary;
  if (!report.ok) {
    std::cout << "first mismatch: " << report.mismatches.front() << "\n";
    const std::size_t shown = std::min<std::size_t>(report.mismatches.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
      std::cout << "mismatch: " << report.mismatches[i] << "\n";
    }
    if (report.mismatches.size() > shown) {
      std::cout << "mismatches omitted: " << report.mismatches.size() - shown << "\n";
    }
    return 3;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"usagebib: download-based research activity indicators"};
  app.require_subcommand(1);
  CliState state;

  CLI::App* ingest = app.add_subcommand("ingest", "parse, robot-filter and accumulate a log");
  CLI::App* cohorts = app.add_subcommand("cohorts", "per-year user frequency cohorts");
  CLI::App* sets = app.add_subcommand("sets", "per-entity-year R/P/C set dump");
  CLI::App* indicators = app.add_subcommand("indicators", "per-figure indicator reports");
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic community");
  CLI::App* verify = app.add_subcommand("verify", "synthesize, recover and diff ground truth");
  for (CLI::App* cmd : {ingest, cohorts, sets, indicators, synth_cmd, verify}) {
    add_common_options(cmd, state);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig config = build_config(state);
    if (ingest->parsed()) return cmd_ingest(config);
    if (cohorts->parsed()) return cmd_cohorts(config);
    if (sets->parsed()) return cmd_sets(config);
    if (indicators->parsed()) return cmd_indicators(config);
    if (synth_cmd->parsed()) return cmd_synth(config, state);
    if (verify->parsed()) return cmd_verify(config, state);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const CorpusError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const LogParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const IndicatorError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace usagebib
