#include "usagebib/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#include "usagebib/rng.hpp"
#include "usagebib/util.hpp"

namespace usagebib::synth {

namespace {

const std::vector<std::string>& main_journals_ordered() {
  static const std::vector<std::string> kJournals = {"ApJ",  "ApJL",  "ApJS",
                                                     "AJ",   "MNRAS", "A&A"};
  return kJournals;
}

constexpr std::string_view kOtherJournal = "OtherJ";

std::string pad(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

// Substream tags for the generator phases. Background structure is rng-free
// so the corpus builder can re-derive it from the model alone.
constexpr std::uint64_t kLogStream = 2;
constexpr std::uint64_t kCorpusStream = 3;

struct BackgroundPub {
  std::string id;
  int year = 0;
  bool main = false;
  int journal_idx = 0;  // into main_journals_ordered() when main
};

struct BackgroundUniverse {
  std::vector<BackgroundPub> mains;   // ordered by (year, index)
  std::vector<BackgroundPub> others;  // same ordering
};

BackgroundUniverse background_universe(const CommunityModel& model) {
  BackgroundUniverse bg;
  for (int y = model.background_start; y <= model.year_to; ++y) {
    for (int i = 0; i < model.background_per_year; ++i) {
      BackgroundPub pub;
      pub.id = "B" + std::to_string(y) + "." + pad(i, 4);
      pub.year = y;
      pub.main = true;
      pub.journal_idx = (i + y) % static_cast<int>(main_journals_ordered().size());
      bg.mains.push_back(std::move(pub));
    }
    for (int i = 0; i < model.other_per_year; ++i) {
      BackgroundPub pub;
      pub.id = "O" + std::to_string(y) + "." + pad(i, 4);
      pub.year = y;
      pub.main = false;
      bg.others.push_back(std::move(pub));
    }
  }
  return bg;
}

struct SimUser {
  std::string user_id;
  std::string name;
  std::string hostname;
  std::string ip;
  int entity_idx = -1;
  int offset_minutes = 0;
};

std::string derived_ipv4(std::uint64_t salt, std::uint64_t index) {
  // 132.0.0.0/8 style addresses: public-looking, never inside the synthetic
  // robot blocks (203.0.113.0/24, 2001:db8:bad::/48).
  std::uint64_t s = salt * 0x9E3779B97F4A7C15ull + index;
  const std::uint64_t h = splitmix64(s);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%d.%d.%d.%d", 132 + static_cast<int>(h & 3),
                static_cast<int>((h >> 8) & 0xFF), static_cast<int>((h >> 16) & 0xFF),
                1 + static_cast<int>((h >> 24) & 0xFE));
  return buf;
}

const std::vector<std::string>& browser_agents() {
  static const std::vector<std::string> kAgents = {
      "Mozilla/5.0 (X11; Linux x86_64; rv:45.0) Gecko/20100101 Firefox/45.0",
      "Mozilla/5.0 (Windows NT 6.1; WOW64) AppleWebKit/537.36 Safari/537.36",
      "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_9) AppleWebKit/537.71 Safari/537.71",
      "Opera/9.80 (X11; Linux i686) Presto/2.12.388 Version/12.16",
  };
  return kAgents;
}

const std::vector<std::string>& robot_agents() {
  static const std::vector<std::string> kAgents = {
      "IndexBot/2.1 (+http://indexbot.example/about)",
      "DataSpider/3.0 (archive collection)",
      "harvest-crawler/1.4",
  };
  return kAgents;
}

const std::vector<std::string>& lay_tlds() {
  static const std::vector<std::string> kTlds = {"de", "fr", "jp", "br",  "cn",  "ru",
                                                 "it", "es", "au", "se",  "ch",  "kr",
                                                 "mx", "za", "pl", "com", "org"};
  return kTlds;
}

Timestamp random_timestamp(Rng& rng, int year, int offset_minutes) {
  // days 32..330 keep every offset safely inside the attribution year
  const int day = 32 + static_cast<int>(rng.below(299));
  const int sec = static_cast<int>(rng.below(86400));
  const std::int64_t local =
      (days_from_civil(year, 1, 1) + day - 1) * 86400 + sec;
  return Timestamp{local - static_cast<std::int64_t>(offset_minutes) * 60,
                   static_cast<std::int16_t>(offset_minutes)};
}

void emit_line(std::string& out, const Timestamp& ts, std::string_view user, std::string_view ip,
               std::string_view host, std::string_view agent, Action action, std::string_view pub,
               Channel channel) {
  out += format_timestamp(ts);
  out += '\t';
  out += user;
  out += '\t';
  out += ip;
  out += '\t';
  out += host;
  out += '\t';
  out += agent;
  out += '\t';
  out += action_token(action);
  out += '\t';
  out += pub;
  out += '\t';
  out += channel_token(channel);
  out += '\n';
}

std::uint64_t draw_rate(Rng& rng, const CommunityModel& m, bool* in_bounds) {
  if (m.rate_tail_mass > 0.0 && rng.bernoulli(m.rate_tail_mass)) {
    *in_bounds = false;
    const bool below = m.rate_lower > 1 && rng.bernoulli(0.5);
    if (below) {
      const std::uint64_t lo = std::max<std::uint64_t>(1, m.rate_lower / 5);
      return lo + rng.below(m.rate_lower - lo);
    }
    return m.rate_upper + 1 + rng.below(m.rate_upper * 2);
  }
  *in_bounds = true;
  const double median = m.monthly_read_median * 12.0 / m.read_download_ratio;
  for (int tries = 0; tries < 1000; ++tries) {
    const double x = median * std::exp(m.rate_sigma * rng.gaussian());
    const auto d = static_cast<std::uint64_t>(std::llround(x));
    if (d >= m.rate_lower && d <= m.rate_upper) return d;
  }
  return (m.rate_lower + m.rate_upper) / 2;
}

/// Cumulative weights over the main background slice <= year, biased toward
/// recent publication years.
struct WeightedSlice {
  std::vector<double> cumulative;
  double total = 0.0;
  std::size_t size = 0;

  void build(const std::vector<BackgroundPub>& mains, int year, double half_life) {
    cumulative.clear();
    total = 0.0;
    size = 0;
    for (const BackgroundPub& pub : mains) {
      if (pub.year > year) break;  // mains are year-ordered
      total += std::exp2(-static_cast<double>(year - pub.year) / half_life);
      cumulative.push_back(total);
      ++size;
    }
  }

  std::size_t pick(Rng& rng) const {
    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(it - cumulative.begin(), size - 1);
  }
};

}  // namespace

int CommunityModel::total_researchers() const {
  int total = 0;
  for (const SynthEntity& e : entities) total += e.researchers;
  return total;
}

int CommunityModel::active_researchers(const SynthEntity& entity, int year) const {
  if (entity.researchers <= 0) return 0;
  if (year_to == year_from) return entity.researchers;
  const double t = static_cast<double>(year - year_from) /
                   static_cast<double>(year_to - year_from);
  const double fraction = start_fraction + (1.0 - start_fraction) * t;
  const int active = static_cast<int>(std::llround(entity.researchers * fraction));
  return std::clamp(active, entity.researchers > 0 ? 1 : 0, entity.researchers);
}

void CommunityModel::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("community model: " + what);
  };
  require(year_from <= year_to, "year range is empty");
  require(background_start <= year_from, "background must start at or before the first year");
  require(rate_lower >= 1 && rate_lower <= rate_upper, "rate bounds must satisfy 1 <= lower <= upper");
  for (double p : {citation_follows_download, cross_entity_coauthor, rate_tail_mass,
                   amateur_download_prob, lay_download_prob, lay_search_engine_prob,
                   unidentified_prob}) {
    require(p >= 0.0 && p <= 1.0, "probabilities must lie in [0,1]");
  }
  require(amateur_ratio >= 0 && lay_ratio >= 0 && practitioner_ratio >= 0 && ratio_scale > 0,
          "population ratios must be non-negative and the scale positive");
  require(robots >= 0, "robot count must be non-negative");
  require(read_download_ratio >= 1.0, "read:download ratio must be at least 1");
  require(monthly_read_median > 0 && rate_sigma >= 0, "rate distribution parameters invalid");
  require(download_half_life > 0, "download half life must be positive");
  require(pubs_per_researcher >= 0 && refs_mean >= 1, "publication parameters invalid");
  require(background_per_year > 0, "background journal output must be positive");
  // keep the amateur/lay classes clear of the frequent band so planted
  // cohorts are recoverable exactly
  require(static_cast<std::uint64_t>(2 * amateur_activity) + 1 < rate_lower,
          "amateur activity collides with the frequent band");
  require(static_cast<std::uint64_t>(2 * lay_activity) + 1 < rate_lower,
          "lay activity collides with the frequent band");
  std::set<std::string> ids;
  for (const SynthEntity& e : entities) {
    require(!e.id.empty(), "entity id must be non-empty");
    require(ids.insert(e.id).second, "duplicate entity id " + e.id);
    require(!e.host_suffix.empty(), "entity " + e.id + " needs a host suffix");
    require(!e.affiliation.empty(), "entity " + e.id + " needs an affiliation string");
    require(e.researchers >= 0, "entity " + e.id + " researcher count negative");
    require(e.researchers == 0 || e.population > 0,
            "entity " + e.id + " needs a positive population");
    if (e.kind == Entity::Kind::kCountry) {
      const CountryCode cc = attribute_country("host." + e.host_suffix, "");
      require(cc.code == e.id, "entity " + e.id + ": host suffix '" + e.host_suffix +
                                   "' does not attribute to it");
    }
  }
  // a country entity must own its country: another entity's traffic landing
  // in it would break planted-cohort recovery
  for (const SynthEntity& c : entities) {
    if (c.kind != Entity::Kind::kCountry) continue;
    for (const SynthEntity& e : entities) {
      if (e.id == c.id) continue;
      require(attribute_country("host." + e.host_suffix, "").code != c.id,
              "entity " + e.id + " traffic would be attributed to country " + c.id);
    }
  }
  for (const SynthEntity& a : entities) {
    const std::string needle = to_lower(a.affiliation);
    require(!ci_contains("background consortium 0123456789", needle),
            "affiliation '" + a.affiliation + "' collides with background affiliations");
    for (const SynthEntity& b : entities) {
      if (a.id == b.id) continue;
      require(!ci_contains(b.affiliation, needle),
              "affiliation '" + a.affiliation + "' is a substring of '" + b.affiliation + "'");
    }
  }
}

CommunityModel CommunityModel::default_model() {
  CommunityModel m;
  m.entities = {
      {"US", Entity::Kind::kCountry, "edu", "United States", 300, 296.0, -300},
      {"NL", Entity::Kind::kCountry, "nl", "Netherlands", 150, 16.3, 60},
      {"CA", Entity::Kind::kCountry, "ca", "Canada", 200, 32.2, -300},
      {"AR", Entity::Kind::kCountry, "ar", "Argentina", 100, 38.6, -180},
      {"IN", Entity::Kind::kCountry, "in", "India", 250, 1100.0, 330},
  };
  m.ratio_scale = 100.0;  // amateurs 1x, lay 100x researchers
  return m;
}

CommunityModel CommunityModel::from_config(const KeyValueFile& kv) {
  CommunityModel m;
  if (kv.has("entity")) m.entities.clear();
  for (const std::string& line : kv.get_all("entity")) {
    // <id> <country|institute> <host-suffix> <researchers> <population> <utc-offset-min> <affiliation...>
    std::vector<std::string_view> tok;
    std::string_view rest = line;
    for (int i = 0; i < 6; ++i) {
      const std::string_view t = trim(rest);
      const std::size_t ws = t.find(' ');
      if (ws == std::string_view::npos) {
        throw ConfigError("model entity needs 7 fields: " + line);
      }
      tok.push_back(t.substr(0, ws));
      rest = t.substr(ws + 1);
    }
    SynthEntity e;
    e.id = std::string(tok[0]);
    if (tok[1] == "country") {
      e.kind = Entity::Kind::kCountry;
    } else if (tok[1] == "institute") {
      e.kind = Entity::Kind::kInstitute;
    } else {
      throw ConfigError("model entity kind must be country|institute: " + line);
    }
    e.host_suffix = std::string(tok[2]);
    try {
      e.researchers = std::stoi(std::string(tok[3]));
      e.population = std::stod(std::string(tok[4]));
      e.utc_offset_minutes = std::stoi(std::string(tok[5]));
    } catch (const std::exception&) {
      throw ConfigError("model entity has non-numeric fields: " + line);
    }
    e.affiliation = std::string(trim(rest));
    if (e.affiliation.empty()) throw ConfigError("model entity needs an affiliation: " + line);
    m.entities.push_back(std::move(e));
  }
  if (auto years = kv.get("years")) {
    const std::size_t dash = years->find('-');
    if (dash == std::string::npos) throw ConfigError("years must be <from>-<to>: " + *years);
    try {
      m.year_from = std::stoi(years->substr(0, dash));
      m.year_to = std::stoi(years->substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("years must be numeric: " + *years);
    }
  }
  m.amateur_ratio = kv.get_double("amateur_ratio", m.amateur_ratio);
  m.lay_ratio = kv.get_double("lay_ratio", m.lay_ratio);
  m.practitioner_ratio = kv.get_double("practitioner_ratio", m.practitioner_ratio);
  m.ratio_scale = kv.get_double("ratio_scale", m.ratio_scale);
  m.robots = static_cast<int>(kv.get_int("robots", m.robots));
  m.monthly_read_median = kv.get_double("monthly_read_median", m.monthly_read_median);
  m.read_download_ratio = kv.get_double("read_download_ratio", m.read_download_ratio);
  m.rate_sigma = kv.get_double("rate_sigma", m.rate_sigma);
  m.rate_tail_mass = kv.get_double("rate_tail_mass", m.rate_tail_mass);
  m.rate_lower = static_cast<std::uint64_t>(kv.get_int("rate_lower", static_cast<long long>(m.rate_lower)));
  m.rate_upper = static_cast<std::uint64_t>(kv.get_int("rate_upper", static_cast<long long>(m.rate_upper)));
  m.citation_follows_download =
      kv.get_double("citation_follows_download", m.citation_follows_download);
  m.cross_entity_coauthor = kv.get_double("cross_entity_coauthor", m.cross_entity_coauthor);
  m.pubs_per_researcher = kv.get_double("pubs_per_researcher", m.pubs_per_researcher);
  m.refs_mean = kv.get_double("refs_mean", m.refs_mean);
  m.ref_noise_prob = kv.get_double("ref_noise_prob", m.ref_noise_prob);
  m.background_start = static_cast<int>(kv.get_int("background_start", m.background_start));
  m.background_per_year =
      static_cast<int>(kv.get_int("background_per_year", m.background_per_year));
  m.other_per_year = static_cast<int>(kv.get_int("other_per_year", m.other_per_year));
  m.download_half_life = kv.get_double("download_half_life", m.download_half_life);
  m.start_fraction = kv.get_double("start_fraction", m.start_fraction);
  m.amateur_activity = kv.get_double("amateur_activity", m.amateur_activity);
  m.amateur_download_prob = kv.get_double("amateur_download_prob", m.amateur_download_prob);
  m.lay_activity = kv.get_double("lay_activity", m.lay_activity);
  m.lay_download_prob = kv.get_double("lay_download_prob", m.lay_download_prob);
  m.lay_search_engine_prob = kv.get_double("lay_search_engine_prob", m.lay_search_engine_prob);
  m.unidentified_prob = kv.get_double("unidentified_prob", m.unidentified_prob);
  m.gdp_scale_k = kv.get_double("gdp_scale_k", m.gdp_scale_k);
  m.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(m.seed)));
  m.validate();
  return m;
}

CommunityModel CommunityModel::load(const std::string& path) {
  return from_config(KeyValueFile::load(path));
}

std::string CommunityModel::serialize() const {
  std::string out;
  out += "years = " + std::to_string(year_from) + "-" + std::to_string(year_to) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "amateur_ratio = " + format_g9(amateur_ratio) + "\n";
  out += "lay_ratio = " + format_g9(lay_ratio) + "\n";
  out += "practitioner_ratio = " + format_g9(practitioner_ratio) + "\n";
  out += "ratio_scale = " + format_g9(ratio_scale) + "\n";
  out += "robots = " + std::to_string(robots) + "\n";
  out += "monthly_read_median = " + format_g9(monthly_read_median) + "\n";
  out += "read_download_ratio = " + format_g9(read_download_ratio) + "\n";
  out += "rate_sigma = " + format_g9(rate_sigma) + "\n";
  out += "rate_tail_mass = " + format_g9(rate_tail_mass) + "\n";
  out += "rate_lower = " + std::to_string(rate_lower) + "\n";
  out += "rate_upper = " + std::to_string(rate_upper) + "\n";
  out += "citation_follows_download = " + format_g9(citation_follows_download) + "\n";
  out += "cross_entity_coauthor = " + format_g9(cross_entity_coauthor) + "\n";
  out += "pubs_per_researcher = " + format_g9(pubs_per_researcher) + "\n";
  out += "refs_mean = " + format_g9(refs_mean) + "\n";
  out += "ref_noise_prob = " + format_g9(ref_noise_prob) + "\n";
  out += "background_start = " + std::to_string(background_start) + "\n";
  out += "background_per_year = " + std::to_string(background_per_year) + "\n";
  out += "other_per_year = " + std::to_string(other_per_year) + "\n";
  out += "download_half_life = " + format_g9(download_half_life) + "\n";
  out += "start_fraction = " + format_g9(start_fraction) + "\n";
  out += "amateur_activity = " + format_g9(amateur_activity) + "\n";
  out += "amateur_download_prob = " + format_g9(amateur_download_prob) + "\n";
  out += "lay_activity = " + format_g9(lay_activity) + "\n";
  out += "lay_download_prob = " + format_g9(lay_download_prob) + "\n";
  out += "lay_search_engine_prob = " + format_g9(lay_search_engine_prob) + "\n";
  out += "unidentified_prob = " + format_g9(unidentified_prob) + "\n";
  out += "gdp_scale_k = " + format_g9(gdp_scale_k) + "\n";
  for (const SynthEntity& e : entities) {
    out += "entity = " + e.id + " " +
           (e.kind == Entity::Kind::kCountry ? std::string("country") : std::string("institute")) +
           " " + e.host_suffix + " " + std::to_string(e.researchers) + " " +
           format_g9(e.population) + " " + std::to_string(e.utc_offset_minutes) + " " +
           e.affiliation + "\n";
  }
  return out;
}

const EntityYearTruth* GroundTruth::find(std::string_view entity, int year) const {
  const auto it = entity_years.find({std::string(entity), year});
  return it == entity_years.end() ? nullptr : &it->second;
}

EntityYearTruth& GroundTruth::at(const std::string& entity, int year) {
  EntityYearTruth& t = entity_years[{entity, year}];
  if (t.entity.empty()) {
    t.entity = entity;
    t.year = year;
  }
  return t;
}

std::string GroundTruth::to_jsonl() const {
  std::string out;
  {
    nlohmann::json g;
    g["planted_overlap_probability"] = planted_overlap_probability;
    g["planted_pearson"] = planted_pearson;
    g["gdp_scale_k"] = gdp_scale_k;
    out += g.dump();
    out += '\n';
  }
  for (const auto& [key, t] : entity_years) {
    nlohmann::json j;
    j["entity"] = t.entity;
    j["year"] = t.year;
    j["researchers"] = t.researchers;
    j["frequent"] = t.frequent;
    j["first_author_count"] = t.first_author_count;
    j["download_events"] = t.download_events;
    j["R"] = t.R;
    j["P_first"] = t.P_first;
    j["P_any"] = t.P_any;
    j["C"] = t.C;
    out += j.dump();
    out += '\n';
  }
  return out;
}

RobotPolicy default_robot_policy() {
  RobotPolicy policy;
  policy.add_agent_pattern("bot");
  policy.add_agent_pattern("crawler");
  policy.add_agent_pattern("spider");
  policy.add_ip_block("203.0.113.0/24");
  policy.add_ip_block("2001:db8:bad::/48");
  return policy;
}

std::string entity_map_text(const CommunityModel& model) {
  std::string out = "# hostname-suffix to entity-id mapping\n";
  for (const SynthEntity& e : model.entities) {
    if (e.kind == Entity::Kind::kInstitute) {
      out += e.host_suffix;
      out += ' ';
      out += e.id;
      out += '\n';
    }
  }
  return out;
}

std::vector<Entity> pipeline_entities(const CommunityModel& model) {
  std::vector<Entity> out;
  for (const SynthEntity& e : model.entities) {
    out.push_back(Entity{e.id, e.kind, e.affiliation});
  }
  return out;
}

std::string aux_series_csv(const CommunityModel& model) {
  std::string out = "entity,kind,year,value\n";
  for (const SynthEntity& e : model.entities) {
    if (e.researchers <= 0) continue;
    for (int y = model.year_from; y <= model.year_to; ++y) {
      const double active = model.active_researchers(e, y);
      const double population = e.population * 1e6;
      const double gdp = std::sqrt(active * population / model.gdp_scale_k);
      out += e.id + ",GDP_TOTAL," + std::to_string(y) + "," + format_g9(gdp) + "\n";
      out += e.id + ",GDP_PER_CAPITA," + std::to_string(y) + "," + format_g9(gdp / population) +
             "\n";
      out += e.id + ",POPULATION," + std::to_string(y) + "," + format_g9(population) + "\n";
      if (y >= 2008) {
        // national membership series drifts upward over the decade
        const double factor = 0.75 + 0.025 * (y - 2005);
        out += e.id + ",IAU_MEMBERS," + std::to_string(y) + "," +
               format_g9(std::llround(active * factor)) + "\n";
      }
    }
  }
  return out;
}

LogsAndTruth generate_logs(const CommunityModel& model) {
  model.validate();
  LogsAndTruth result;
  result.truth.planted_overlap_probability = model.citation_follows_download;
  result.truth.gdp_scale_k = model.gdp_scale_k;
  std::string& log = result.log_tsv;
  log += "# synthetic scholarly access log\n";
  log += "# seed " + std::to_string(model.seed) + "\n";

  const BackgroundUniverse bg = background_universe(model);
  Rng rng(derive_seed(model.seed, kLogStream));

  // researcher/amateur/practitioner rosters, entity by entity
  std::vector<std::vector<SimUser>> researchers(model.entities.size());
  std::vector<std::vector<SimUser>> amateurs(model.entities.size());
  std::vector<std::vector<SimUser>> practitioners(model.entities.size());
  std::uint64_t user_counter = 0;
  for (std::size_t ei = 0; ei < model.entities.size(); ++ei) {
    const SynthEntity& e = model.entities[ei];
    for (int i = 0; i < e.researchers; ++i) {
      SimUser u;
      u.user_id = "u" + e.id + "R" + pad(i, 4);
      u.name = e.id + " Researcher " + pad(i, 4);
      u.hostname = "astro" + pad(i % 20, 2) + ".inst" + pad(i % 7, 2) + "." + e.host_suffix;
      u.ip = derived_ipv4(model.seed, ++user_counter);
      u.entity_idx = static_cast<int>(ei);
      u.offset_minutes = e.utc_offset_minutes;
      researchers[ei].push_back(std::move(u));
    }
    const int n_amateur =
        static_cast<int>(std::llround(e.researchers * model.amateur_ratio / model.ratio_scale));
    for (int i = 0; i < n_amateur; ++i) {
      SimUser u;
      u.user_id = "uAm" + e.id + pad(i, 5);
      u.hostname = "home" + pad(i % 100, 2) + ".isp" + pad(i % 11, 2) + "." + e.host_suffix;
      u.ip = derived_ipv4(model.seed + 1, ++user_counter);
      u.entity_idx = static_cast<int>(ei);
      u.offset_minutes = e.utc_offset_minutes;
      amateurs[ei].push_back(std::move(u));
    }
    const int n_pract = static_cast<int>(
        std::llround(e.researchers * model.practitioner_ratio / model.ratio_scale));
    for (int i = 0; i < n_pract; ++i) {
      SimUser u;
      u.user_id = "uPr" + e.id + pad(i, 5);
      u.hostname = "lab" + pad(i % 50, 2) + ".org" + pad(i % 9, 2) + "." + e.host_suffix;
      u.ip = derived_ipv4(model.seed + 2, ++user_counter);
      u.entity_idx = static_cast<int>(ei);
      u.offset_minutes = e.utc_offset_minutes;
      practitioners[ei].push_back(std::move(u));
    }
  }

  const int n_lay = static_cast<int>(
      std::llround(model.total_researchers() * model.lay_ratio / model.ratio_scale));
  const int n_years = model.year_to - model.year_from + 1;

  WeightedSlice weighted;             // researcher targets: recency-biased mains
  std::vector<std::size_t> flat_all;  // casual targets: uniform over everything <= y
  const std::size_t n_mains = bg.mains.size();

  for (int y = model.year_from; y <= model.year_to; ++y) {
    weighted.build(bg.mains, y, model.download_half_life);
    flat_all.clear();
    for (std::size_t i = 0; i < bg.mains.size(); ++i) {
      if (bg.mains[i].year <= y) flat_all.push_back(i);
    }
    for (std::size_t i = 0; i < bg.others.size(); ++i) {
      if (bg.others[i].year <= y) flat_all.push_back(n_mains + i);
    }
    auto flat_pick = [&](Rng& r) -> const BackgroundPub& {
      const std::size_t k = flat_all[static_cast<std::size_t>(r.below(flat_all.size()))];
      return k < n_mains ? bg.mains[k] : bg.others[k - n_mains];
    };

    // --- researchers ---
    for (std::size_t ei = 0; ei < model.entities.size(); ++ei) {
      const SynthEntity& e = model.entities[ei];
      const int active = model.active_researchers(e, y);
      if (active == 0) continue;
      EntityYearTruth& truth = result.truth.at(e.id, y);
      for (int i = 0; i < active; ++i) {
        const SimUser& u = researchers[ei][static_cast<std::size_t>(i)];
        truth.researchers.insert(u.user_id);
        bool in_bounds = false;
        const std::uint64_t downloads = draw_rate(rng, model, &in_bounds);
        const std::string& agent =
            browser_agents()[(static_cast<std::size_t>(i) + ei) % browser_agents().size()];
        std::vector<std::string>& unique = truth.researcher_downloads[u.user_id];
        std::unordered_set<std::string_view> seen;
        for (std::uint64_t k = 0; k < downloads; ++k) {
          const BackgroundPub& pub = bg.mains[weighted.pick(rng)];
          const Channel ch = rng.bernoulli(0.05) ? Channel::kSearchEngine : Channel::kDirect;
          emit_line(log, random_timestamp(rng, y, u.offset_minutes), u.user_id, u.ip, u.hostname,
                    agent, Action::kDownload, pub.id, ch);
          if (seen.insert(pub.id).second) unique.push_back(pub.id);
        }
        std::sort(unique.begin(), unique.end());
        const auto abstracts = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(downloads) * (model.read_download_ratio - 1.0)));
        for (std::uint64_t k = 0; k < abstracts; ++k) {
          const BackgroundPub& pub = bg.mains[weighted.pick(rng)];
          emit_line(log, random_timestamp(rng, y, u.offset_minutes), u.user_id, u.ip, u.hostname,
                    agent, Action::kAbstractView, pub.id, Channel::kDirect);
        }
        if (in_bounds) {
          truth.frequent.insert(u.user_id);
          truth.download_events += downloads;
          for (const std::string& id : unique) truth.R.insert(id);
        }
      }
    }

    // --- amateurs and practitioners: casual, never frequent ---
    for (const auto& roster : {std::cref(amateurs), std::cref(practitioners)}) {
      for (const auto& group : roster.get()) {
        for (const SimUser& u : group) {
          const auto events = 1 + rng.below(static_cast<std::uint64_t>(2 * model.amateur_activity));
          const std::string& agent =
              browser_agents()[static_cast<std::size_t>(u.ip.back()) % browser_agents().size()];
          for (std::uint64_t k = 0; k < events; ++k) {
            const BackgroundPub& pub = flat_pick(rng);
            const bool dl = rng.bernoulli(model.amateur_download_prob);
            const Channel ch = rng.bernoulli(0.25) ? Channel::kSearchEngine : Channel::kDirect;
            emit_line(log, random_timestamp(rng, y, u.offset_minutes), u.user_id, u.ip, u.hostname,
                      agent, dl ? Action::kDownload : Action::kAbstractView, pub.id, ch);
          }
        }
      }
    }

    // --- lay public: one active year each ---
    for (int li = 0; li < n_lay; ++li) {
      std::uint64_t h = model.seed ^ (0xA24BAED4963EE407ull * (static_cast<std::uint64_t>(li) + 1));
      const int active_year =
          model.year_from + static_cast<int>(splitmix64(h) % static_cast<std::uint64_t>(n_years));
      if (active_year != y) continue;
      const std::string& tld = lay_tlds()[static_cast<std::size_t>(li) % lay_tlds().size()];
      const bool v6 = li % 97 == 0;
      char ipbuf[48];
      if (v6) {
        std::snprintf(ipbuf, sizeof(ipbuf), "2001:db8:%x::%x", 1 + li % 14, 1 + li % 0xFFFE);
      } else {
        std::snprintf(ipbuf, sizeof(ipbuf), "%d.%d.%d.%d", 152 + li % 4, (li / 4) % 256,
                      (li / 1024) % 256, 1 + li % 254);
      }
      const std::string host =
          rng.bernoulli(0.1) ? std::string()
                             : "cust" + pad(li % 100000, 5) + ".isp" + pad(li % 23, 2) + "." + tld;
      const std::string user = rng.bernoulli(model.unidentified_prob)
                                   ? std::string()
                                   : "uL" + pad(li, 7);
      const auto events = 1 + rng.below(static_cast<std::uint64_t>(2 * model.lay_activity));
      const std::string& agent = browser_agents()[static_cast<std::size_t>(li) % browser_agents().size()];
      const int offset = ((li * 37) % 49 - 24) * 30;
      for (std::uint64_t k = 0; k < events; ++k) {
        const double what = rng.uniform01();
        const Channel ch =
            rng.bernoulli(model.lay_search_engine_prob) ? Channel::kSearchEngine : Channel::kDirect;
        if (what < 0.1) {
          emit_line(log, random_timestamp(rng, y, offset), user, ipbuf, host, agent, Action::kOther,
                    "", ch);
        } else {
          const BackgroundPub& pub = flat_pick(rng);
          const bool dl = what >= 0.1 && what < 0.1 + model.lay_download_prob;
          emit_line(log, random_timestamp(rng, y, offset), user, ipbuf, host, agent,
                    dl ? Action::kDownload : Action::kAbstractView, pub.id, ch);
        }
      }
    }

    // --- robots: half betrayed by their agent, half only by ip block ---
    for (int ri = 0; ri < model.robots; ++ri) {
      const bool by_agent = ri % 2 == 0;
      std::string agent;
      std::string ip;
      if (by_agent) {
        agent = robot_agents()[static_cast<std::size_t>(ri) % robot_agents().size()];
        ip = derived_ipv4(model.seed + 3, static_cast<std::uint64_t>(ri));
      } else {
        agent = browser_agents()[static_cast<std::size_t>(ri) % browser_agents().size()];
        if (ri % 10 == 1) {
          char buf[48];
          std::snprintf(buf, sizeof(buf), "2001:db8:bad:%x::%x", ri % 16, ri + 1);
          ip = buf;
        } else {
          ip = "203.0.113." + std::to_string(ri % 256);
        }
      }
      const std::string host = "fetch" + pad(ri, 3) + ".example.com";
      const std::string user = "robot" + pad(ri, 3);
      const auto events = 150 + rng.below(451);
      for (std::uint64_t k = 0; k < events; ++k) {
        const double what = rng.uniform01();
        if (what < 0.1) {
          emit_line(log, random_timestamp(rng, y, 0), user, ip, host, agent, Action::kOther, "",
                    Channel::kUnknown);
        } else {
          const BackgroundPub& pub = flat_pick(rng);
          emit_line(log, random_timestamp(rng, y, 0), user, ip, host, agent,
                    what < 0.7 ? Action::kDownload : Action::kAbstractView, pub.id,
                    Channel::kUnknown);
        }
      }
    }
  }
  return result;
}

std::string generate_corpus(const CommunityModel& model, GroundTruth& truth) {
  model.validate();
  const BackgroundUniverse bg = background_universe(model);
  Rng rng(derive_seed(model.seed, kCorpusStream));
  std::string out;

  // background universe, refs drawn main-to-main from older years
  std::vector<std::size_t> mains_before;  // indices of mains with year < current
  {
    std::size_t cursor = 0;
    for (int y = model.background_start; y <= model.year_to; ++y) {
      while (cursor < bg.mains.size() && bg.mains[cursor].year < y) ++cursor;
      mains_before.push_back(cursor);
    }
  }
  auto background_refs = [&](int year) {
    std::vector<std::string> refs;
    const std::size_t limit = mains_before[static_cast<std::size_t>(year - model.background_start)];
    if (limit == 0) return refs;
    for (int k = 0; k < 3; ++k) {
      refs.push_back(bg.mains[static_cast<std::size_t>(rng.below(limit))].id);
    }
    return refs;
  };
  for (const BackgroundPub& pub : bg.mains) {
    Publication p;
    p.pub_id = pub.id;
    p.year = pub.year;
    p.journal = main_journals_ordered()[static_cast<std::size_t>(pub.journal_idx)];
    p.refereed = true;
    p.authors = {{"Bkg Author " + pub.id, "Background Consortium " + pad(pub.journal_idx, 2)}};
    p.references = background_refs(pub.year);
    out += Corpus::to_jsonl_line(p);
    out += '\n';
  }
  for (const BackgroundPub& pub : bg.others) {
    Publication p;
    p.pub_id = pub.id;
    p.year = pub.year;
    p.journal = std::string(kOtherJournal);
    p.refereed = pub.year % 2 == 0;
    p.authors = {{"Bkg Author " + pub.id, "Background Consortium 99"}};
    p.references = background_refs(pub.year);
    out += Corpus::to_jsonl_line(p);
    out += '\n';
  }

  // researcher publications, year by year; references follow the first
  // author's planted downloads with the configured probability
  std::vector<std::string> uniform_slice;  // main-journal ids <= current year
  std::size_t bg_cursor = 0;
  int dangling_counter = 0;
  struct AuthorRef {
    std::size_t entity;
    int index;
  };
  for (int y = model.year_from; y <= model.year_to; ++y) {
    while (bg_cursor < bg.mains.size() && bg.mains[bg_cursor].year <= y) {
      uniform_slice.push_back(bg.mains[bg_cursor].id);
      ++bg_cursor;
    }
    for (std::size_t ei = 0; ei < model.entities.size(); ++ei) {
      const SynthEntity& e = model.entities[ei];
      const int active = model.active_researchers(e, y);
      if (active == 0) continue;
      EntityYearTruth& t = truth.at(e.id, y);
      const int n_pubs = static_cast<int>(std::llround(model.pubs_per_researcher * active));
      std::set<std::string> first_author_names;
      for (int pi = 0; pi < n_pubs; ++pi) {
        Publication p;
        p.pub_id = "S" + std::to_string(y) + "." + e.id + "." + pad(pi, 3);
        p.year = y;
        p.journal = main_journals_ordered()[static_cast<std::size_t>(pi + y) %
                                            main_journals_ordered().size()];
        p.refereed = true;

        std::vector<AuthorRef> authors;
        const int first_idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(active)));
        authors.push_back({ei, first_idx});
        const int extra = static_cast<int>(rng.below(4));
        for (int ai = 0; ai < extra; ++ai) {
          std::size_t home = ei;
          if (model.entities.size() > 1 && rng.bernoulli(model.cross_entity_coauthor)) {
            home = static_cast<std::size_t>(rng.below(model.entities.size()));
          }
          const int peer_active = model.active_researchers(model.entities[home], y);
          if (peer_active == 0) continue;
          authors.push_back({home, static_cast<int>(rng.below(static_cast<std::uint64_t>(peer_active)))});
        }

        std::set<std::string> author_entities;
        std::set<std::pair<std::size_t, int>> seen_authors;
        for (const AuthorRef& a : authors) {
          if (!seen_authors.insert({a.entity, a.index}).second) continue;
          const SynthEntity& home = model.entities[a.entity];
          p.authors.push_back(
              {home.id + " Researcher " + pad(a.index, 4),
               "Dept. of Astronomy, Institute " + pad(a.index % 7, 2) + ", " + home.affiliation});
          author_entities.insert(home.id);
        }
        first_author_names.insert(p.authors.front().name);

        const std::string first_author_id = "u" + e.id + "R" + pad(first_idx, 4);
        const std::vector<std::string>* downloads = nullptr;
        if (const auto it = t.researcher_downloads.find(first_author_id);
            it != t.researcher_downloads.end() && !it->second.empty()) {
          downloads = &it->second;
        }

        const auto n_refs = static_cast<int>(
            std::llround(model.refs_mean * (0.5 + rng.uniform01())));
        std::set<std::string> ref_seen;
        for (int ri = 0; ri < std::max(1, n_refs); ++ri) {
          std::string ref;
          if (rng.bernoulli(model.ref_noise_prob)) {
            if (rng.bernoulli(0.5) || bg.others.empty()) {
              ref = "XMISSING" + pad(dangling_counter++, 5);
            } else {
              ref = bg.others[static_cast<std::size_t>(rng.below(bg.others.size()))].id;
            }
          } else if (downloads && rng.bernoulli(model.citation_follows_download)) {
            ref = (*downloads)[static_cast<std::size_t>(rng.below(downloads->size()))];
          } else if (!uniform_slice.empty()) {
            ref = uniform_slice[static_cast<std::size_t>(rng.below(uniform_slice.size()))];
          } else {
            continue;
          }
          if (!ref_seen.insert(ref).second) continue;
          p.references.push_back(ref);
          // truth C: main-journal corpus members only ('B' background main,
          // 'S' researcher publication)
          if (ref[0] == 'B' || ref[0] == 'S') t.C.insert(ref);
        }

        t.P_first.insert(p.pub_id);
        for (const std::string& id : author_entities) {
          truth.at(id, y).P_any.insert(p.pub_id);
        }
        uniform_slice.push_back(p.pub_id);  // later pubs may cite same-year ones
        out += Corpus::to_jsonl_line(p);
        out += '\n';
      }
      t.first_author_count = first_author_names.size();
    }
  }

  // pooled planted correlation between cohort size and authorship
  {
    std::vector<double> xs, ys;
    for (const auto& [key, t] : truth.entity_years) {
      xs.push_back(static_cast<double>(t.frequent.size()));
      ys.push_back(static_cast<double>(t.first_author_count));
    }
    truth.planted_pearson = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      double sxx = 0, syy = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      if (sxx > 0 && syy > 0) truth.planted_pearson = sxy / std::sqrt(sxx * syy);
    }
  }
  return out;
}

SynthBundle generate_all(const CommunityModel& model) {
  SynthBundle bundle;
  LogsAndTruth logs = generate_logs(model);
  bundle.log_tsv = std::move(logs.log_tsv);
  bundle.truth = std::move(logs.truth);
  bundle.corpus_jsonl = generate_corpus(model, bundle.truth);
  bundle.robots_policy = default_robot_policy().serialize();
  bundle.entity_map = entity_map_text(model);
  bundle.aux_csv = aux_series_csv(model);
  return bundle;
}

}  // namespace usagebib::synth
