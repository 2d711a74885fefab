#include "wm/analytics/report.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/ingest/types.hpp"
#include "wm/util/csv.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/text.hpp"

namespace wm::analytics {

namespace {

using util::Json;

std::optional<double> opt_double(const Json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

std::optional<Timestamp> opt_time(const Json& j) {
  return j.is_null() ? std::nullopt : std::optional<Timestamp>(j.get<Timestamp>());
}

std::optional<std::string> opt_level(const Json& developer, const char* key) {
  if (developer.is_null()) return std::nullopt;
  return developer.at(key).get<std::string>();
}

WeaknessView parse_weakness(const Json& j) {
  WeaknessView w;
  j.at("id").get_to(w.id);
  j.at("project_id").get_to(w.project_id);
  j.at("cwe_id").get_to(w.cwe_id);
  j.at("fixes").get_to(w.fixes);
  w.t0 = opt_time(j.at("t0"));
  w.t1 = opt_time(j.at("t1"));
  j.at("t2").get_to(w.t2);
  j.at("t3").get_to(w.t3);
  const auto& win = j.at("windows");
  w.windows.t01 = opt_double(win.at("t01"));
  w.windows.t12 = opt_double(win.at("t12"));
  w.windows.t23 = win.at("t23").get<double>();
  w.windows.t13 = opt_double(win.at("t13"));
  j.at("files").get_to(w.files);
  const auto& chain = j.at("chain");
  if (!chain.is_null()) {
    for (const auto& c : chain.at("wccs")) {
      w.wcc_hashes.push_back(c.at("hash").get<std::string>());
      const auto& msg = c.value("message", Json());
      w.wcc_messages.push_back(msg.is_null() ? std::string() : msg.get<std::string>());
    }
  }
  j.at("introduction_phase").get_to(w.introduction_phase);
  const auto& dev = j.at("developer");
  w.wl_commit_level = opt_level(dev, "wl_commit_level");
  w.wl_code_level = opt_level(dev, "wl_code_level");
  w.exp_level = opt_level(dev, "exp_level");
  return w;
}

std::map<std::string, std::string> category_by_project(const std::vector<ProjectView>& projects) {
  std::map<std::string, std::string> out;
  for (const auto& p : projects) out[p.id] = p.category;
  return out;
}

std::vector<std::string> category_order(const std::vector<ProjectView>& projects) {
  std::set<std::string> present;
  for (const auto& p : projects) present.insert(p.category);
  std::vector<std::string> order;
  for (auto c : ingest::all_categories()) {
    std::string name(ingest::to_string(c));
    if (present.erase(name)) order.push_back(name);
  }
  order.insert(order.end(), present.begin(), present.end());
  return order;
}

std::string days(double v) { return util::fixed(v, 0); }

}  // namespace

WeaknessFile parse_weakness_file(const std::vector<Json>& records) {
  if (records.empty() || records.front().value("record", "") != "meta")
    throw ArtifactMalformed("weakness file does not start with a meta record");
  WeaknessFile file;
  const auto& meta = records.front();
  for (const auto& p : meta.at("projects")) {
    ProjectView v;
    p.at("id").get_to(v.id);
    p.at("category").get_to(v.category);
    p.at("class").get_to(v.project_class);
    p.at("size_bytes").get_to(v.size_bytes);
    v.n_com = p.at("stats").at("n_com").get<std::size_t>();
    file.projects.push_back(std::move(v));
  }
  for (const auto& [year, count] : meta.at("commits_per_year").items())
    file.commits_per_year[std::stoi(year)] = count.get<std::size_t>();
  file.funnel = meta.at("funnel");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].value("record", "") != "weakness")
      throw ArtifactMalformed(fmt::format("record {} is not a weakness", i + 1));
    file.weaknesses.push_back(parse_weakness(records[i]));
  }
  return file;
}

WeaknessFile load_weakness_file(const std::string& path) {
  return parse_weakness_file(util::read_jsonl(path));
}

std::vector<CweCount> cwe_distribution(const std::vector<WeaknessView>& weaknesses) {
  std::map<std::string, std::size_t> counts;
  for (const auto& w : weaknesses) ++counts[w.cwe_id];
  std::vector<CweCount> out;
  for (const auto& [id, n] : counts) out.push_back({id, n});
  std::stable_sort(out.begin(), out.end(),
                   [](const CweCount& a, const CweCount& b) { return a.count > b.count; });
  return out;
}

double density(std::size_t weaknesses, double size_gb) {
  if (!(size_gb > 0.0)) return 0.0;
  return static_cast<double>(weaknesses) / size_gb;
}

std::vector<DensityRow> density_table(const std::vector<ProjectView>& projects,
                                      const std::vector<WeaknessView>& weaknesses) {
  const auto category_of = category_by_project(projects);
  std::map<std::string, DensityRow> rows;
  for (const auto& p : projects) {
    auto& r = rows[p.category];
    r.category = p.category;
    r.size_gb += static_cast<double>(p.size_bytes) / kBytesPerGb;
  }
  for (const auto& w : weaknesses)
    if (auto it = category_of.find(w.project_id); it != category_of.end()) ++rows[it->second].count;

  std::vector<DensityRow> out;
  for (const auto& name : category_order(projects)) {
    auto r = rows.at(name);
    r.empty_category = !(r.size_gb > 0.0);
    r.density = density(r.count, r.size_gb);
    out.push_back(r);
  }
  return out;
}

double ratio_permille(std::size_t weaknesses, std::size_t commits) {
  if (commits == 0) return 0.0;
  return 1000.0 * static_cast<double>(weaknesses) / static_cast<double>(commits);
}

std::vector<TrendRow> annual_trend(const std::map<int, std::size_t>& commits_per_year,
                                   const std::vector<WeaknessView>& weaknesses, YearKey key) {
  std::map<int, TrendRow> rows;
  for (const auto& [year, n] : commits_per_year) {
    rows[year].year = year;
    rows[year].commits = n;
  }
  for (const auto& w : weaknesses) {
    const Timestamp t = key == YearKey::t1 && w.t1 ? *w.t1 : w.t2;
    const int year = utc_year(t);
    rows[year].year = year;
    ++rows[year].weaknesses;
  }
  std::vector<TrendRow> out;
  for (auto& [_, r] : rows) {
    r.ratio_permille = ratio_permille(r.weaknesses, r.commits);
    out.push_back(r);
  }
  return out;
}

std::vector<TopCweRow> top_cwe_by_category(const std::vector<ProjectView>& projects,
                                           const std::vector<WeaknessView>& weaknesses,
                                           std::size_t top_n) {
  const auto category_of = category_by_project(projects);
  std::map<std::string, std::vector<WeaknessView>> grouped;
  for (const auto& w : weaknesses)
    if (auto it = category_of.find(w.project_id); it != category_of.end())
      grouped[it->second].push_back(w);
  std::vector<TopCweRow> out;
  for (const auto& name : category_order(projects)) {
    auto dist = cwe_distribution(grouped[name]);
    for (std::size_t i = 0; i < dist.size() && i < top_n; ++i)
      out.push_back({name, i + 1, dist[i].cwe_id, dist[i].count});
  }
  return out;
}

FixKind classify_fix(const weakness::Fix& fix) {
  if (fix.lines_added > 0 && fix.lines_deleted == 0) return FixKind::additions_only;
  if (fix.lines_added == 0 && fix.lines_deleted > 0) return FixKind::deletions_only;
  if (fix.lines_added > 0 && fix.lines_deleted > 0) return FixKind::both;
  return FixKind::none;
}

std::string_view to_string(FixKind kind) {
  switch (kind) {
    case FixKind::additions_only: return "additions_only";
    case FixKind::deletions_only: return "deletions_only";
    case FixKind::both: return "both";
    case FixKind::none: return "none";
  }
  return "none";
}

FixStats fix_change_stats(const std::vector<weakness::Fix>& fixes) {
  FixStats s;
  std::vector<double> lines, files;
  for (const auto& f : fixes) {
    switch (classify_fix(f)) {
      case FixKind::additions_only: ++s.additions_only; break;
      case FixKind::deletions_only: ++s.deletions_only; break;
      case FixKind::both: ++s.both; break;
      case FixKind::none: ++s.none; break;
    }
    lines.push_back(static_cast<double>(f.lines_added) + static_cast<double>(f.lines_deleted));
    files.push_back(static_cast<double>(f.files.size()));
  }
  s.lines_changed = five_number(std::move(lines));
  s.files_changed = five_number(std::move(files));
  return s;
}

std::vector<Library> parse_libraries(std::string_view text) {
  std::vector<Library> libs;
  for (const auto& raw : util::split_lines(text)) {
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    Library lib;
    std::istringstream in(line);
    in >> lib.name;
    for (std::string p; in >> p;) lib.prefixes.push_back(p);
    if (lib.prefixes.empty()) throw InvalidArgument("library '" + lib.name + "' has no path prefix");
    libs.push_back(std::move(lib));
  }
  return libs;
}

bool path_in_library(std::string_view path, const Library& library) {
  for (const auto& prefix : library.prefixes) {
    if (util::starts_with(path, prefix)) return true;
    if (path.find("/" + prefix) != std::string_view::npos) return true;
  }
  return false;
}

LibraryTable library_attribution(const std::vector<WeaknessView>& weaknesses,
                                 const std::vector<Library>& libraries) {
  struct Acc {
    std::set<std::string> files;
    std::size_t weaknesses = 0;
    std::set<std::string> first_wccs;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  LibraryTable table;
  for (const auto& w : weaknesses) {
    bool attributed = false;
    for (const auto& lib : libraries) {
      std::vector<std::string> hits;
      for (const auto& f : w.files)
        if (path_in_library(f, lib)) hits.push_back(f);
      if (hits.empty()) continue;
      attributed = true;
      auto& a = acc[{lib.name, w.project_id}];
      a.files.insert(hits.begin(), hits.end());
      ++a.weaknesses;
      if (!w.wcc_hashes.empty()) a.first_wccs.insert(w.wcc_hashes.front());
    }
    if (!attributed) ++table.unattributed;
  }
  for (const auto& lib : libraries)
    for (const auto& [key, a] : acc)
      if (key.first == lib.name)
        table.rows.push_back({key.first, key.second, a.files.size(), a.weaknesses, a.first_wccs.size()});
  return table;
}

GoalLexicon parse_goal_lexicon(std::string_view text) {
  GoalLexicon lex;
  for (auto& section : util::parse_sectioned_list(text)) {
    auto& terms = lex[section.name];
    for (auto& e : section.entries) terms.push_back(util::normalize_spaces(e));
  }
  return lex;
}

std::vector<std::string> tag_goals(std::string_view message, const GoalLexicon& lexicon) {
  util::TermMatcher matcher(message);
  std::vector<std::string> goals;
  for (const auto& [goal, terms] : lexicon)
    for (const auto& t : terms)
      if (matcher.matches(t)) {
        goals.push_back(goal);
        break;
      }
  return goals;
}

std::map<std::string, std::size_t> goal_counts(const std::vector<std::string>& messages,
                                               const GoalLexicon& lexicon) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [goal, _] : lexicon) counts[goal] = 0;
  for (const auto& m : messages)
    for (const auto& g : tag_goals(m, lexicon)) ++counts[g];
  return counts;
}

std::vector<DistributionPoint> window_points(const std::vector<ProjectView>& projects,
                                             const std::vector<WeaknessView>& weaknesses,
                                             GroupBy group_by) {
  const auto category_of = category_by_project(projects);
  std::vector<DistributionPoint> out;
  for (const auto& w : weaknesses) {
    std::string group = w.cwe_id;
    if (group_by == GroupBy::category) {
      auto it = category_of.find(w.project_id);
      group = it == category_of.end() ? std::string("unknown") : it->second;
    }
    auto add = [&](const char* window, const std::optional<double>& v) {
      if (v) out.push_back({group, window, w.id, *v});
    };
    add("insertion", w.windows.t01);
    add("latency", w.windows.t12);
    add("fixing", w.windows.t23);
    add("lifetime", w.windows.t13);
  }
  return out;
}

std::vector<DistributionRow> window_distributions(const std::vector<DistributionPoint>& points) {
  static const std::vector<std::string> kWindows = {"insertion", "latency", "fixing", "lifetime"};
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (const auto& p : points) values[p.group][p.window].push_back(p.days);
  std::vector<DistributionRow> out;
  for (const auto& [group, by_window] : values)
    for (const auto& window : kWindows)
      if (auto it = by_window.find(window); it != by_window.end())
        out.push_back({group, window, five_number(it->second)});
  return out;
}

ReportBundle build_report(const WeaknessFile& file, const ReportOptions& options) {
  const auto& ws = file.weaknesses;
  ReportBundle b;
  b.cwe_distribution = cwe_distribution(ws);
  b.density_table = density_table(file.projects, ws);
  b.annual_trend = annual_trend(file.commits_per_year, ws, options.year_key);
  b.top_cwe_by_category = top_cwe_by_category(file.projects, ws);

  std::vector<weakness::Fix> fixes;
  for (const auto& w : ws) fixes.insert(fixes.end(), w.fixes.begin(), w.fixes.end());
  b.fix_stats = fix_change_stats(fixes);
  b.library_table = library_attribution(ws, options.libraries);

  // Goals are counted once per distinct WCC.
  std::map<std::pair<std::string, std::string>, std::string> wcc_messages;
  for (const auto& w : ws)
    for (std::size_t i = 0; i < w.wcc_hashes.size(); ++i)
      wcc_messages.emplace(std::pair{w.project_id, w.wcc_hashes[i]}, w.wcc_messages[i]);
  std::vector<std::string> messages;
  for (const auto& [_, m] : wcc_messages) messages.push_back(m);
  b.goal_counts = goal_counts(messages, options.goals);

  b.window_points = window_points(file.projects, ws, options.group_by);
  b.window_distributions = window_distributions(b.window_points);

  for (const auto& w : ws) {
    ++b.introduction_phases[w.introduction_phase];
    if (w.wl_commit_level) ++b.developer_levels["wl_commit"][*w.wl_commit_level];
    if (w.wl_code_level) ++b.developer_levels["wl_code"][*w.wl_code_level];
    if (w.exp_level) ++b.developer_levels["exp"][*w.exp_level];
  }

  std::size_t cwe_total = 0;
  for (const auto& c : b.cwe_distribution) cwe_total += c.count;
  b.checks.push_back({"cwe_total", cwe_total == ws.size(),
                      fmt::format("{} counted, {} weaknesses", cwe_total, ws.size())});

  std::size_t merged = 0;
  std::set<std::pair<std::string, std::string>> fix_ids;
  for (const auto& w : ws) {
    merged += w.fixes.size() - 1;
    for (const auto& f : w.fixes) fix_ids.emplace(w.project_id, f.hash);
  }
  const auto wfcs = file.funnel.value("wfcs", std::size_t{0});
  b.checks.push_back({"dedup_conservation", ws.size() + merged == wfcs,
                      fmt::format("{} weaknesses + {} merged vs {} WFCs", ws.size(), merged, wfcs)});
  b.checks.push_back({"fixes_unique", fix_ids.size() == fixes.size(),
                      fmt::format("{} distinct of {} fixes", fix_ids.size(), fixes.size())});
  const auto recorded = file.funnel.value("weaknesses", std::size_t{0});
  b.checks.push_back({"weakness_count", recorded == ws.size(),
                      fmt::format("meta says {}, file holds {}", recorded, ws.size())});
  return b;
}

Json to_json(const ReportBundle& b) {
  auto five = [](const FiveNumber& f) {
    return Json{{"n", f.n}, {"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}};
  };
  Json j;
  j["schema_version"] = kHistorySchemaVersion;
  for (const auto& c : b.cwe_distribution)
    j["cwe_distribution"].push_back({{"cwe_id", c.cwe_id}, {"count", c.count}});
  for (const auto& r : b.density_table)
    j["density_table"].push_back({{"category", r.category},
                                  {"size_gb", r.size_gb},
                                  {"count", r.count},
                                  {"density", r.density},
                                  {"empty_category", r.empty_category}});
  for (const auto& r : b.annual_trend)
    j["annual_trend"].push_back({{"year", r.year},
                                 {"commits", r.commits},
                                 {"weaknesses", r.weaknesses},
                                 {"ratio_permille", r.ratio_permille}});
  for (const auto& r : b.top_cwe_by_category)
    j["top_cwe_by_category"].push_back(
        {{"category", r.category}, {"rank", r.rank}, {"cwe_id", r.cwe_id}, {"count", r.count}});
  j["fix_stats"] = {{"additions_only", b.fix_stats.additions_only},
                    {"deletions_only", b.fix_stats.deletions_only},
                    {"both", b.fix_stats.both},
                    {"none", b.fix_stats.none},
                    {"lines_changed", five(b.fix_stats.lines_changed)},
                    {"files_changed", five(b.fix_stats.files_changed)}};
  Json libs = Json::array();
  for (const auto& r : b.library_table.rows)
    libs.push_back({{"library", r.library},
                    {"project_id", r.project_id},
                    {"affected_files", r.affected_files},
                    {"weaknesses", r.weaknesses},
                    {"first_wccs", r.first_wccs}});
  j["library_table"] = {{"rows", libs}, {"unattributed", b.library_table.unattributed}};
  j["goal_counts"] = b.goal_counts;
  Json dists = Json::array();
  for (const auto& r : b.window_distributions)
    dists.push_back({{"group", r.group}, {"window", r.window}, {"summary", five(r.summary)}});
  j["window_distributions"] = dists;
  j["developer_levels"] = b.developer_levels;
  j["introduction_phases"] = b.introduction_phases;
  Json checks = Json::array();
  for (const auto& c : b.checks) checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  j["conservation"] = checks;
  for (const char* key : {"cwe_distribution", "density_table", "annual_trend", "top_cwe_by_category"})
    if (!j.contains(key)) j[key] = Json::array();
  return j;
}

void write_report(const ReportBundle& b, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const util::CsvWriter& csv) {
    util::write_file_atomic(out_dir + "/" + name, csv.str());
  };
  auto five_row = [](std::vector<std::string> lead, const FiveNumber& f, int decimals) {
    lead.push_back(std::to_string(f.n));
    for (double v : {f.min, f.q1, f.median, f.q3, f.max}) lead.push_back(util::fixed(v, decimals));
    return lead;
  };

  util::CsvWriter cwe({"cwe_id", "weaknesses"});
  for (const auto& c : b.cwe_distribution) cwe.add_row({c.cwe_id, std::to_string(c.count)});
  write("cwe_distribution.csv", cwe);

  util::CsvWriter dens({"category", "size_gb", "weaknesses", "density"});
  for (const auto& r : b.density_table)
    dens.add_row({r.category, util::fixed(r.size_gb, 2), std::to_string(r.count), util::fixed(r.density, 2)});
  write("density.csv", dens);

  util::CsvWriter trend({"year", "commits", "weaknesses", "ratio_permille"});
  for (const auto& r : b.annual_trend)
    trend.add_row({std::to_string(r.year), std::to_string(r.commits), std::to_string(r.weaknesses),
                   util::fixed(r.ratio_permille, 2)});
  write("annual_trend.csv", trend);

  util::CsvWriter top({"category", "rank", "cwe_id", "weaknesses"});
  for (const auto& r : b.top_cwe_by_category)
    top.add_row({r.category, std::to_string(r.rank), r.cwe_id, std::to_string(r.count)});
  write("top_cwe_by_category.csv", top);

  util::CsvWriter kinds({"kind", "fixes"});
  kinds.add_row({"additions_only", std::to_string(b.fix_stats.additions_only)});
  kinds.add_row({"deletions_only", std::to_string(b.fix_stats.deletions_only)});
  kinds.add_row({"both", std::to_string(b.fix_stats.both)});
  kinds.add_row({"none", std::to_string(b.fix_stats.none)});
  write("fix_kinds.csv", kinds);

  util::CsvWriter fixdist({"metric", "n", "min", "q1", "median", "q3", "max"});
  fixdist.add_row(five_row({"lines_changed"}, b.fix_stats.lines_changed, 2));
  fixdist.add_row(five_row({"files_changed"}, b.fix_stats.files_changed, 2));
  write("fix_distributions.csv", fixdist);

  util::CsvWriter libs({"library", "project_id", "affected_files", "weaknesses", "first_wccs"});
  for (const auto& r : b.library_table.rows)
    libs.add_row({r.library, r.project_id, std::to_string(r.affected_files), std::to_string(r.weaknesses),
                  std::to_string(r.first_wccs)});
  write("libraries.csv", libs);

  util::CsvWriter goals({"goal", "wccs"});
  for (const auto& [g, n] : b.goal_counts) goals.add_row({g, std::to_string(n)});
  write("goals.csv", goals);

  util::CsvWriter points({"group", "window", "weakness_id", "days"});
  for (const auto& p : b.window_points) points.add_row({p.group, p.window, p.weakness_id, days(p.days)});
  write("windows_long.csv", points);

  util::CsvWriter dists({"group", "window", "n", "min", "q1", "median", "q3", "max"});
  for (const auto& r : b.window_distributions) dists.add_row(five_row({r.group, r.window}, r.summary, 0));
  write("window_summary.csv", dists);

  util::CsvWriter devs({"metric", "level", "weaknesses"});
  for (const auto& [metric, levels] : b.developer_levels)
    for (const auto& [level, n] : levels) devs.add_row({metric, level, std::to_string(n)});
  write("developer_status.csv", devs);

  util::CsvWriter phases({"phase", "weaknesses"});
  for (const auto& [phase, n] : b.introduction_phases) phases.add_row({phase, std::to_string(n)});
  write("introduction_phase.csv", phases);

  util::CsvWriter checks({"check", "ok", "detail"});
  for (const auto& c : b.checks) checks.add_row({c.name, c.ok ? "true" : "false", c.detail});
  write("conservation.csv", checks);

  util::write_file_atomic(out_dir + "/report.json", to_json(b).dump(2) + "\n");
}

}  // namespace wm::analytics
