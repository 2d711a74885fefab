#include <doctest.h>

#include "fixtures.hpp"
#include "wm/error.hpp"
#include "wm/ingest/ingest.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/text.hpp"

using namespace wm;
using namespace wm::fixtures;

namespace {

ingest::CommitRecord commit_at(Timestamp t, int parents = 1) {
  ingest::CommitRecord c;
  c.hash = std::string(40, 'a');
  c.authored_at = t;
  c.parents.assign(static_cast<std::size_t>(parents), std::string(40, 'b'));
  return c;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("selection keeps accessible projects with enough commits, in order") {
    std::vector<ingest::Candidate> cands(4);
    cands[0] = {"u0", 100, true};
    cands[1] = {"u1", 99, true};
    cands[2] = {"u2", 500, false};
    cands[3] = {"u3", 101, true};
    cands[0].id = "p0";
    cands[3].id = "p3";
    auto s = ingest::select_projects(cands, 100);
    REQUIRE(s.projects.size() == 2);
    CHECK(s.projects[0].id == "p0");
    CHECK(s.projects[1].id == "p3");
    CHECK(s.inaccessible == 1);
    CHECK(s.too_few_commits == 1);
    CHECK_THROWS_AS(ingest::select_projects(cands, 0), InvalidArgument);
  }

  TEST_CASE("selection is monotone in the threshold") {
    std::vector<ingest::Candidate> cands;
    for (std::size_t i = 0; i < 60; ++i) cands.push_back({"u", (i * 37) % 250, i % 7 != 0});
    std::size_t previous = cands.size() + 1;
    for (std::size_t m = 1; m < 300; m += 7) {
      auto n = ingest::select_projects(cands, m).projects.size();
      CHECK(n <= previous);
      previous = n;
    }
  }

  TEST_CASE("project stats") {
    std::vector<ingest::CommitRecord> commits{commit_at(0), commit_at(10 * 86400, 2),
                                              commit_at(30 * 86400 + 43200)};
    auto s = ingest::compute_project_stats(commits);
    CHECK(s.d_act_days == 30);
    CHECK(s.n_com == 3);
    CHECK(s.d_act_months == doctest::Approx(30.5 / 30.44));
    CHECK(s.f_com == doctest::Approx(3 / (30.5 / 30.44)));
    CHECK_FALSE(s.floor_applied);
    CHECK(ingest::compute_project_stats(commits, false).n_com == 2);

    auto single = ingest::compute_project_stats({commit_at(5)});
    CHECK(single.floor_applied);
    CHECK(single.f_com == doctest::Approx(30.44));
    CHECK_THROWS_AS(ingest::compute_project_stats({}), EmptyHistory);
  }

  TEST_CASE("manifest parsing") {
    auto m = ingest::parse_manifest(
        "# header\n\nhttps://x/y.git category=game id=y  # trailing\n/tmp/z language=C#\n");
    REQUIRE(m.size() == 2);
    CHECK(m[0].source == "https://x/y.git");
    CHECK(m[0].attributes.at("category") == "game");
    CHECK(m[0].attributes.at("id") == "y");
    CHECK(m[1].attributes.at("language") == "C#");
    CHECK_THROWS_AS(ingest::parse_manifest("src bogus\n"), ManifestMalformed);
  }

  TEST_CASE("categories and classes") {
    CHECK(ingest::class_of(ingest::Category::game) == ingest::ProjectClass::application);
    CHECK(ingest::class_of(ingest::Category::sdk) == ingest::ProjectClass::development_tool);
    CHECK(ingest::all_categories().size() == 9);
    for (auto c : ingest::all_categories()) CHECK(ingest::parse_category(ingest::to_string(c)) == c);
    CHECK_FALSE(ingest::parse_category("spaceship"));
  }

  TEST_CASE("language guess weights by size") {
    CHECK(ingest::guess_language({{"a.cs", 10}, {"b.cpp", 30}, {"c.cs", 25}}) == "C#");
    CHECK(ingest::guess_language({{"README", 10}}) == "unknown");
  }

  TEST_CASE("commit record JSON round trip") {
    ingest::CommitRecord c;
    c.hash = std::string(40, 'c');
    c.author_id = "a@x";
    c.authored_at = 123;
    c.message = "line\nbreak";
    ingest::FileChange f;
    f.path = f.old_path = "x.cs";
    f.lines_added = 1;
    f.hunks.push_back({1, 0, 1, 1, {}, {"int a;"}});
    c.changes.push_back(f);
    auto back = nlohmann::json(c).get<ingest::CommitRecord>();
    CHECK(back.hash == c.hash);
    CHECK(back.message == c.message);
    REQUIRE(back.changes.size() == 1);
    CHECK(back.changes[0].hunks[0].added_line_texts == f.hunks[0].added_line_texts);
    CHECK(c.lines_changed() == 1);

    auto bad = nlohmann::json(c);
    bad["hash"] = "nothex";
    CHECK_THROWS(bad.get<ingest::CommitRecord>());
  }

  TEST_CASE("utc year") {
    CHECK(utc_year(kEpoch) == 2019);
    CHECK(utc_year(kEpoch - 1) == 2018);
  }

  TEST_CASE("run_ingest on local, cloned, tiny and missing sources") {
    TempDir tmp;
    auto linear = build_linear_multi_author(tmp.path() / "src" / "linear");
    auto tiny = build_tiny(tmp.path() / "src" / "tiny");
    auto manifest = ingest::parse_manifest(
        linear.path.string() + " category=game id=linear\n" +
        "file://" + linear.path.string() + " category=sdk\n" +
        tiny.path.string() + " category=tutorial\n" +
        (tmp.path() / "missing").string() + "\n");
    const auto out = tmp.path() / "out";
    auto summary = ingest::run_ingest(manifest, {.out_dir = out, .min_commits = 4, .jobs = 3,
                                                 .count_merges = true});
    CHECK(summary.candidates == 4);
    CHECK(summary.selected == 2);
    CHECK(summary.inaccessible == 1);
    CHECK(summary.too_few_commits == 1);
    CHECK(summary.commits == 2 * linear.commits.size());

    auto projects = ingest::read_projects(out);
    REQUIRE(projects.size() == 2);
    CHECK(projects[0].project.id == "linear");
    CHECK(projects[0].project.author_count == 4);
    CHECK(projects[0].project.primary_language == "C#");
    CHECK(projects[1].project.id == "linear-2");
    CHECK(projects[1].project.category == ingest::Category::sdk);
    CHECK(projects[0].stats.n_com == static_cast<std::int64_t>(linear.commits.size()));

    auto history = ingest::read_history(out, "linear");
    REQUIRE(history.size() == linear.commits.size());
    for (std::size_t i = 1; i < history.size(); ++i)
      CHECK(history[i - 1].authored_at <= history[i].authored_at);
    CHECK(util::read_file((out / "history" / "linear.jsonl").string()) ==
          util::read_file((out / "history" / "linear-2.jsonl").string()));
  }

  TEST_CASE("unknown manifest category is rejected") {
    TempDir tmp;
    auto manifest = ingest::parse_manifest("/nowhere category=spaceship\n");
    CHECK_THROWS_AS(ingest::run_ingest(manifest, {.out_dir = tmp.path(), .min_commits = 1, .jobs = 1,
                                                  .count_merges = true}),
                    ManifestMalformed);
  }
}
