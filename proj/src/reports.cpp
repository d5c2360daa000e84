#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "usagebib/pipeline.hpp"
#include "usagebib/util.hpp"

namespace usagebib {

namespace {

std::string float_cell(double v) { return std::isnan(v) ? std::string() : format_g9(v); }

std::vector<std::size_t> sorted_order(std::span<const EntityYearOutputs> outputs) {
  std::vector<std::size_t> order(outputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = outputs[a].data.sets;
    const auto& sb = outputs[b].data.sets;
    if (sa.entity != sb.entity) return sa.entity < sb.entity;
    return sa.year < sb.year;
  });
  return order;
}

}  // namespace

std::string stats_csv(std::span<const UserYearStats> stats,
                      const std::vector<JournalSet>& journals) {
  std::string out = "user_id,year,country,entity,interactions,downloads_total,unique_publications";
  for (const JournalSet& set : journals) {
    out += ",downloads_";
    out += set.name;
  }
  out += '\n';
  for (const UserYearStats& s : stats) {
    out += s.user_id;
    out += ',';
    out += std::to_string(s.year);
    out += ',';
    out += s.country.code;
    out += ',';
    out += s.entity;
    out += ',';
    out += std::to_string(s.interactions);
    out += ',';
    out += std::to_string(s.downloads_total);
    out += ',';
    out += std::to_string(s.unique_downloads());
    for (const JournalSet& set : journals) {
      const auto it = s.downloads_in_set.find(set.name);
      out += ',';
      out += std::to_string(it == s.downloads_in_set.end() ? 0 : it->second);
    }
    out += '\n';
  }
  return out;
}

std::string cohorts_csv(std::span<const UserYearStats> stats, const RunConfig& config) {
  std::string out = "year,category,count,journal_set\n";
  for (int year = config.years.from; year <= config.years.to; ++year) {
    for (int ri = -1; ri < static_cast<int>(config.journals.size()); ++ri) {
      std::optional<std::string_view> restriction;
      std::string_view label = "all";
      if (ri >= 0) {
        label = config.journals[static_cast<std::size_t>(ri)].name;
        restriction = label;
      }
      const CohortCounts counts = cohort_counts(stats, year, config.cohort, restriction);
      if (counts.total() == 0) continue;  // years without active users are absent
      const std::pair<std::string_view, std::uint64_t> rows[] = {
          {"ABSTRACT_ONLY", counts.abstract_only},
          {"INFREQUENT", counts.infrequent},
          {"FREQUENT", counts.frequent},
          {"REMAINDER", counts.remainder},
          {"TOTAL", counts.total()},
      };
      for (const auto& [category, count] : rows) {
        out += std::to_string(year);
        out += ',';
        out += category;
        out += ',';
        out += std::to_string(count);
        out += ',';
        out += label;
        out += '\n';
      }
    }
  }
  return out;
}

std::string sets_jsonl(std::span<const EntityYearOutputs> outputs) {
  std::string out;
  for (const std::size_t i : sorted_order(outputs)) {
    const EntityYearOutputs& o = outputs[i];
    nlohmann::json j;
    j["entity"] = o.data.sets.entity;
    j["year"] = o.data.sets.year;
    j["frequent_users"] = o.data.frequent_user_count;
    j["first_authors"] = o.data.first_author_count;
    j["R"] = o.data.sets.R;
    j["P_first"] = o.data.sets.P_first;
    j["P_any"] = o.data.sets.P_any;
    j["C"] = o.data.sets.C;
    out += j.dump();
    out += '\n';
  }
  return out;
}

ReportBundle indicator_reports(const Corpus& corpus, std::span<const EntityYearOutputs> outputs,
                               const AuxTable* aux, const RunConfig& config) {
  ReportBundle bundle;
  const std::vector<std::size_t> order = sorted_order(outputs);
  const JournalSet& journals = config.primary_journals();

  // fig4: cohort size vs authorship
  {
    std::string csv = "entity,year,frequent_users,first_authors\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             std::to_string(o.data.frequent_user_count) + "," +
             std::to_string(o.data.first_author_count) + "\n";
    }
    bundle.files["fig4.csv"] = std::move(csv);
  }

  // fig5: first authors vs national membership series
  {
    std::string csv = "entity,year,first_authors,iau_members\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      const std::map<int, double>* series =
          aux ? aux->series(o.data.sets.entity, AuxKind::kIauMembers) : nullptr;
      if (!series) continue;
      const auto it = series->find(o.data.sets.year);
      if (it == series->end()) continue;
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             std::to_string(o.data.first_author_count) + "," + format_g9(it->second) + "\n";
    }
    bundle.files["fig5.csv"] = std::move(csv);
  }

  // fig6: download activity vs any-author publications; events and unique
  // publications are both reported
  {
    std::string csv =
        "entity,year,downloads_by_frequent_users,publications_any_author,"
        "unique_publications_downloaded\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             std::to_string(o.data.download_events.size()) + "," +
             std::to_string(o.data.sets.P_any.size()) + "," +
             std::to_string(o.data.sets.R.size()) + "\n";
    }
    bundle.files["fig6.csv"] = std::move(csv);
  }

  // fig7: obsolescence distributions for one entity-year
  {
    std::string target_entity = config.obsolescence_entity;
    if (target_entity.empty() && !config.entities.empty()) {
      target_entity = config.entities.front().id;
      for (const Entity& e : config.entities) target_entity = std::min(target_entity, e.id);
    }
    const int target_year =
        config.obsolescence_year != 0 ? config.obsolescence_year : config.years.to;
    const EntityYearOutputs* target = nullptr;
    for (const EntityYearOutputs& o : outputs) {
      if (o.data.sets.entity == target_entity && o.data.sets.year == target_year) target = &o;
    }
    std::string csv =
        "year,unique_fraction_downloads,unique_fraction_citations,"
        "norm_count_downloads,norm_count_citations\n";
    if (target) {
      const YearRange window{config.window_from, target_year};
      const auto totals = corpus.year_totals(journals);
      const ObsolescenceCurve down =
          obsolescence_curve(target->data.download_events, totals, window);
      const ObsolescenceCurve cite = obsolescence_curve(
          citation_events(corpus, target->data.sets.P_first, journals), totals, window);
      auto value_or_zero = [](const std::map<int, double>& m, int y) {
        const auto it = m.find(y);
        return it == m.end() ? 0.0 : it->second;
      };
      for (int y = window.from; y <= window.to; ++y) {
        csv += std::to_string(y) + "," + format_g9(value_or_zero(down.unique_fraction, y)) + "," +
               format_g9(value_or_zero(cite.unique_fraction, y)) + "," +
               format_g9(value_or_zero(down.normalized_count, y)) + "," +
               format_g9(value_or_zero(cite.normalized_count, y)) + "\n";
      }
    } else {
      bundle.notes.push_back("fig7: no data for entity " + target_entity + " year " +
                             std::to_string(target_year));
    }
    bundle.files["fig7.csv"] = std::move(csv);
  }

  // fig8/fig10: overlap against the random baseline
  {
    std::string csv = "entity,year,overlap,random_baseline\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      if (std::isnan(o.overlap)) {
        bundle.notes.push_back("overlap undefined (empty denominator) for " + o.data.sets.entity +
                               " " + std::to_string(o.data.sets.year));
      }
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             float_cell(o.overlap) + "," + float_cell(o.baseline) + "\n";
    }
    bundle.files["fig8_10.csv"] = std::move(csv);
  }

  // fig9: publications vs next-year h-index
  {
    std::string csv = "entity,year,publications_first_author,h_index_next_year\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             std::to_string(o.data.sets.P_first.size()) + "," + std::to_string(o.h_index_next) +
             "\n";
    }
    bundle.files["fig9.csv"] = std::move(csv);
  }

  // fig11: per-entity growth, both series normalized to the base year
  {
    std::string csv = "entity,year,gdp_per_capita_normalized,downloads_normalized\n";
    std::map<std::string, std::map<int, double>> downloads_by_entity;
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      downloads_by_entity[o.data.sets.entity][o.data.sets.year] =
          static_cast<double>(o.data.download_events.size());
    }
    for (const auto& [entity, downloads] : downloads_by_entity) {
      const std::map<int, double>* gdp_pc =
          aux ? aux->series(entity, AuxKind::kGdpPerCapita) : nullptr;
      if (!gdp_pc) {
        bundle.notes.push_back("fig11: no GDP_PER_CAPITA series for " + entity);
        continue;
      }
      std::map<int, double> gdp_norm, down_norm;
      try {
        gdp_norm = normalize_to_base_year(*gdp_pc, config.base_year);
        down_norm = normalize_to_base_year(downloads, config.base_year);
      } catch (const IndicatorError& e) {
        bundle.notes.push_back("fig11: " + entity + ": " + e.what());
        continue;
      }
      for (const auto& [year, value] : down_norm) {
        if (year < config.years.from || year > config.years.to) continue;
        const auto g = gdp_norm.find(year);
        if (g == gdp_norm.end()) continue;
        csv += entity + "," + std::to_string(year) + "," + format_g9(g->second) + "," +
               format_g9(value) + "\n";
      }
    }
    bundle.files["fig11.csv"] = std::move(csv);
  }

  // downloads ~ GDP^2 / population, pooled over entity-years
  {
    std::string csv = "gdp_exponent,population_exponent,rms_residual,n_observations\n";
    std::vector<GdpObservation> observations;
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      if (!aux) break;
      const std::map<int, double>* gdp = aux->series(o.data.sets.entity, AuxKind::kGdpTotal);
      const std::map<int, double>* pop = aux->series(o.data.sets.entity, AuxKind::kPopulation);
      if (!gdp || !pop) continue;
      const auto g = gdp->find(o.data.sets.year);
      const auto p = pop->find(o.data.sets.year);
      if (g == gdp->end() || p == pop->end()) continue;
      const double downloads = static_cast<double>(o.data.download_events.size());
      if (downloads <= 0 || g->second <= 0 || p->second <= 0) continue;
      observations.push_back({downloads, g->second, p->second});
    }
    try {
      const PowerLawFit fit = fit_gdp_power_law(observations);
      csv += format_g9(fit.gdp_exponent) + "," + format_g9(fit.population_exponent) + "," +
             format_g9(fit.rms_residual) + "," + std::to_string(fit.n) + "\n";
    } catch (const IndicatorError& e) {
      bundle.notes.push_back(std::string("gdp_power_law: ") + e.what());
    }
    bundle.files["gdp_power_law.csv"] = std::move(csv);
  }

  // pooled correlations, one row per figure
  {
    const std::string_view kind_name =
        config.correlation == CorrelationKind::kPearson ? "pearson" : "spearman";
    std::string csv = "figure,x,y,kind,n,r\n";
    auto add_row = [&](std::string_view figure, std::string_view x, std::string_view y,
                       const std::vector<double>& xs, const std::vector<double>& ys) {
      std::string row = std::string(figure) + "," + std::string(x) + "," + std::string(y) + "," +
                        std::string(kind_name) + "," + std::to_string(xs.size()) + ",";
      try {
        row += format_g9(correlation(xs, ys, config.correlation));
      } catch (const IndicatorError&) {
        bundle.notes.push_back(std::string(figure) + ": correlation undefined");
        row += "";
      }
      csv += row + "\n";
    };
    std::vector<double> x4, y4, x6, y6, x9, y9;
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      x4.push_back(static_cast<double>(o.data.frequent_user_count));
      y4.push_back(static_cast<double>(o.data.first_author_count));
      x6.push_back(static_cast<double>(o.data.download_events.size()));
      y6.push_back(static_cast<double>(o.data.sets.P_any.size()));
      x9.push_back(static_cast<double>(o.data.sets.P_first.size()));
      y9.push_back(static_cast<double>(o.h_index_next));
    }
    add_row("fig4", "frequent_users", "first_authors", x4, y4);
    std::vector<double> x5, y5;
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      const std::map<int, double>* series =
          aux ? aux->series(o.data.sets.entity, AuxKind::kIauMembers) : nullptr;
      if (!series) continue;
      const auto it = series->find(o.data.sets.year);
      if (it == series->end()) continue;
      x5.push_back(static_cast<double>(o.data.first_author_count));
      y5.push_back(it->second);
    }
    if (!x5.empty()) add_row("fig5", "first_authors", "iau_members", x5, y5);
    add_row("fig6", "downloads_by_frequent_users", "publications_any_author", x6, y6);
    add_row("fig9", "publications_first_author", "h_index_next_year", x9, y9);
    bundle.files["correlations.csv"] = std::move(csv);
  }

  // the aggregate per-entity-year report
  {
    std::string csv =
        "entity,year,frequent_users,first_authors,download_events,"
        "r_size,p_first_size,p_any_size,c_size,overlap,random_baseline,h_index_next_year\n";
    for (const std::size_t i : order) {
      const EntityYearOutputs& o = outputs[i];
      csv += o.data.sets.entity + "," + std::to_string(o.data.sets.year) + "," +
             std::to_string(o.data.frequent_user_count) + "," +
             std::to_string(o.data.first_author_count) + "," +
             std::to_string(o.data.download_events.size()) + "," +
             std::to_string(o.data.sets.R.size()) + "," +
             std::to_string(o.data.sets.P_first.size()) + "," +
             std::to_string(o.data.sets.P_any.size()) + "," +
             std::to_string(o.data.sets.C.size()) + "," + float_cell(o.overlap) + "," +
             float_cell(o.baseline) + "," + std::to_string(o.h_index_next) + "\n";
    }
    bundle.files["indicator_report.csv"] = std::move(csv);
  }

  std::sort(bundle.notes.begin(), bundle.notes.end());
  return bundle;
}

}  // namespace usagebib
