#include <doctest.h>

#include "fixtures.hpp"
#include "wm/analytics/report.hpp"
#include "wm/error.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/text.hpp"

using namespace wm;
namespace fs = std::filesystem;
using namespace wm::analytics;

namespace {

// 2020-06-01 and 2021-06-01, UTC.
constexpr Timestamp k2020 = 1590969600;
constexpr Timestamp k2021 = 1622505600;

weakness::Fix fix(char id, std::uint32_t added, std::uint32_t deleted, std::size_t files = 1) {
  weakness::Fix f;
  f.hash = std::string(40, id);
  f.cwe_id = "CWE-1";
  f.lines_added = added;
  f.lines_deleted = deleted;
  for (std::size_t i = 0; i < files; ++i) f.files.push_back("f" + std::to_string(i));
  return f;
}

WeaknessView view(std::string id, std::string project, std::string cwe, std::optional<Timestamp> t1,
                  Timestamp t2) {
  WeaknessView w;
  w.id = std::move(id);
  w.project_id = std::move(project);
  w.cwe_id = std::move(cwe);
  w.t1 = t1;
  w.t2 = w.t3 = t2;
  w.fixes = {fix(w.id.back(), 1, 1)};
  if (t1) {
    w.windows.t01 = 1.0;
    w.windows.t12 = 2.0;
    w.windows.t13 = 2.0;
  }
  return w;
}

util::Json meta(std::size_t wfcs, std::size_t weaknesses) {
  return {{"record", "meta"},
          {"projects",
           util::Json::array({{{"id", "g"}, {"category", "game"}, {"class", "application"}, {"size_bytes", 2000000000},
                         {"stats", {{"n_com", 100}}}},
                        {{"id", "s"}, {"category", "sdk"}, {"class", "development_tool"}, {"size_bytes", 0},
                         {"stats", {{"n_com", 10}}}}})},
          {"commits_per_year", {{"2020", 1000}, {"2021", 500}}},
          {"funnel", {{"wfcs", wfcs}, {"weaknesses", weaknesses}}}};
}

util::Json weakness_record(const std::string& id, const std::string& project, const std::string& cwe) {
  return {{"record", "weakness"},
          {"id", id},
          {"project_id", project},
          {"cwe_id", cwe},
          {"fixes", util::Json::array({fix(id.back(), 2, 0)})},
          {"chain", {{"wccs", util::Json::array({{{"hash", std::string(40, 'w')}, {"message", "add new menu"}}})}}},
          {"t0", k2020},
          {"t1", k2020},
          {"t2", k2021},
          {"t3", k2021},
          {"windows", {{"t01", 0.0}, {"t12", 365.0}, {"t23", 0.0}, {"t13", 365.0}}},
          {"files", {"Assets/Plugins/Photon/a.cs"}},
          {"introduction_phase", "creation"},
          {"developer", {{"wl_commit_level", "low"}, {"wl_code_level", "high"}, {"exp_level", "expert"}}}};
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("CWE distribution orders by count then id") {
    auto d = cwe_distribution({view("1", "g", "CWE-9", {}, 0), view("2", "g", "CWE-2", {}, 0),
                               view("3", "g", "CWE-9", {}, 0), view("4", "g", "CWE-1", {}, 0)});
    REQUIRE(d.size() == 3);
    CHECK(d[0].cwe_id == "CWE-9");
    CHECK(d[1].cwe_id == "CWE-1");
    CHECK(d[2].cwe_id == "CWE-2");
  }

  TEST_CASE("density and ratio") {
    CHECK(density(10, 2.0) == 5.0);
    CHECK(density(10, 0.0) == 0.0);
    CHECK(ratio_permille(3, 1000) == 3.0);
    CHECK(ratio_permille(3, 0) == 0.0);
    std::vector<ProjectView> projects = {{"g", "game", "application", 2000000000, 1},
                                         {"s", "sdk", "development_tool", 0, 1}};
    auto t = density_table(projects, {view("1", "g", "CWE-1", {}, 0), view("2", "g", "CWE-1", {}, 0),
                                      view("3", "s", "CWE-1", {}, 0)});
    REQUIRE(t.size() == 2);
    CHECK(t[0].category == "game");
    CHECK(t[0].size_gb == 2.0);
    CHECK(t[0].density == 1.0);
    CHECK(t[1].empty_category);
    CHECK(t[1].density == 0.0);
    CHECK(t[1].count == 1);
  }

  TEST_CASE("annual trend falls back to T2 when T1 is absent") {
    auto rows = annual_trend({{2020, 1000}, {2021, 500}},
                             {view("1", "g", "CWE-1", k2020, k2021), view("2", "g", "CWE-1", {}, k2021)});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].weaknesses == 1);
    CHECK(rows[0].ratio_permille == 1.0);
    CHECK(rows[1].weaknesses == 1);
    auto by_t2 = annual_trend({{2020, 1000}}, {view("1", "g", "CWE-1", k2020, k2021)}, YearKey::t2);
    REQUIRE(by_t2.size() == 2);
    CHECK(by_t2[1].year == 2021);
    CHECK(by_t2[1].commits == 0);
    CHECK(by_t2[1].ratio_permille == 0.0);
  }

  TEST_CASE("top CWE per category") {
    std::vector<ProjectView> projects = {{"g", "game", "application", 1, 1}};
    auto rows = top_cwe_by_category(projects, {view("1", "g", "CWE-5", {}, 0), view("2", "g", "CWE-5", {}, 0),
                                               view("3", "g", "CWE-4", {}, 0), view("4", "g", "CWE-3", {}, 0),
                                               view("5", "g", "CWE-2", {}, 0)});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cwe_id == "CWE-5");
    CHECK(rows[0].count == 2);
    CHECK(rows[2].rank == 3);
    CHECK(rows[2].cwe_id == "CWE-3");
  }

  TEST_CASE("fix kinds and change stats") {
    CHECK(classify_fix(fix('a', 3, 0)) == FixKind::additions_only);
    CHECK(classify_fix(fix('a', 0, 3)) == FixKind::deletions_only);
    CHECK(classify_fix(fix('a', 1, 3)) == FixKind::both);
    CHECK(classify_fix(fix('a', 0, 0)) == FixKind::none);
    auto s = fix_change_stats({fix('a', 3, 0, 1), fix('b', 1, 1, 3), fix('c', 0, 4, 2)});
    CHECK(s.additions_only == 1);
    CHECK(s.both == 1);
    CHECK(s.deletions_only == 1);
    CHECK(s.lines_changed.median == 3.0);
    CHECK(s.files_changed.max == 3.0);
  }

  TEST_CASE("library attribution") {
    auto libs = parse_libraries("# c\nPhoton Photon/ PhotonNetwork/\nDOTween DOTween/\n");
    REQUIRE(libs.size() == 2);
    CHECK(path_in_library("Assets/Plugins/Photon/x.cs", libs[0]));
    CHECK(path_in_library("Photon/x.cs", libs[0]));
    CHECK_FALSE(path_in_library("Assets/MyPhoton/x.cs", libs[0]));
    CHECK_THROWS_AS(parse_libraries("Lonely\n"), InvalidArgument);

    auto a = view("1", "g", "CWE-1", 1, 2);
    a.files = {"Assets/Photon/a.cs", "Assets/Photon/b.cs", "DOTween/t.cs"};
    a.wcc_hashes = {"h1"};
    auto b = view("2", "g", "CWE-1", 1, 2);
    b.files = {"Assets/Photon/a.cs"};
    b.wcc_hashes = {"h1"};
    auto c = view("3", "g", "CWE-1", 1, 2);
    c.files = {"Assets/Game.cs"};
    auto t = library_attribution({a, b, c}, libs);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].library == "Photon");
    CHECK(t.rows[0].affected_files == 2);
    CHECK(t.rows[0].weaknesses == 2);
    CHECK(t.rows[0].first_wccs == 1);
    CHECK(t.rows[1].weaknesses == 1);
    CHECK(t.unattributed == 1);
  }

  TEST_CASE("goal tagging") {
    auto lex = parse_goal_lexicon("[new_feature]\nadd\nimplement\n[refactoring]\nclean  up\n[bug_fixing]\nfix\n");
    CHECK(tag_goals("Add inventory and fix crash", lex) == std::vector<std::string>{"bug_fixing", "new_feature"});
    CHECK(tag_goals("Clean up shaders", lex) == std::vector<std::string>{"refactoring"});
    CHECK(tag_goals("prefix names", lex).empty());
    auto counts = goal_counts({"add x", "add y", "tweak"}, lex);
    CHECK(counts.at("new_feature") == 2);
    CHECK(counts.at("refactoring") == 0);
    auto shipped = parse_goal_lexicon(util::read_file(std::string(WM_DATA_DIR) + "/goals.txt"));
    for (const auto& g : kGoals) CHECK(shipped.count(g) == 1);
  }

  TEST_CASE("window points skip missing windows") {
    std::vector<ProjectView> projects = {{"g", "game", "application", 1, 1}};
    auto pts = window_points(projects, {view("1", "g", "CWE-1", 1, 2), view("2", "x", "CWE-1", {}, 2)},
                             GroupBy::category);
    CHECK(pts.size() == 5);
    CHECK(pts.back().group == "unknown");
    CHECK(pts.back().window == "fixing");
    auto rows = window_distributions(pts);
    CHECK(rows.size() == 5);
  }

  TEST_CASE("weakness file parsing, bundle and conservation checks") {
    auto file = parse_weakness_file({meta(3, 2), weakness_record("g:a", "g", "CWE-1"),
                                     weakness_record("g:b", "g", "CWE-2")});
    CHECK(file.projects.size() == 2);
    CHECK(file.commits_per_year.at(2020) == 1000);
    REQUIRE(file.weaknesses.size() == 2);
    CHECK(file.weaknesses[0].wcc_messages == std::vector<std::string>{"add new menu"});
    CHECK(file.weaknesses[0].exp_level == std::optional<std::string>("expert"));

    ReportOptions o;
    o.libraries = parse_libraries("Photon Photon/\n");
    o.goals = parse_goal_lexicon("[new_feature]\nadd\n");
    auto b = build_report(file, o);
    CHECK(b.goal_counts.at("new_feature") == 1);
    CHECK(b.introduction_phases.at("creation") == 2);
    CHECK(b.developer_levels.at("exp").at("expert") == 2);
    std::map<std::string, bool> checks;
    for (const auto& c : b.checks) checks[c.name] = c.ok;
    CHECK(checks.at("cwe_total"));
    CHECK(checks.at("weakness_count"));
    CHECK(checks.at("fixes_unique"));
    CHECK_FALSE(checks.at("dedup_conservation"));

    fixtures::TempDir tmp;
    write_report(b, tmp.path().string());
    for (const char* name : {"cwe_distribution.csv", "density.csv", "annual_trend.csv", "libraries.csv",
                             "goals.csv", "window_summary.csv", "conservation.csv", "report.json"})
      CHECK(fs::exists(tmp.path() / name));
    CHECK(to_json(b).contains("cwe_distribution"));
  }

  TEST_CASE("malformed weakness files") {
    CHECK_THROWS_AS(parse_weakness_file({}), ArtifactMalformed);
    CHECK_THROWS_AS(parse_weakness_file({weakness_record("g:a", "g", "CWE-1")}), ArtifactMalformed);
    CHECK_THROWS_AS(parse_weakness_file({meta(1, 1), meta(1, 1)}), ArtifactMalformed);
  }
}
