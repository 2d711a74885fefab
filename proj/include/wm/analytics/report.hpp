#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wm/analytics/stats.hpp"
#include "wm/ingest/types.hpp"
#include "wm/weakness/weakness.hpp"

namespace wm::analytics {

inline constexpr double kBytesPerGb = 1e9;

// Weakness record as read back from weaknesses.jsonl.
struct WeaknessView {
  std::string id;
  std::string project_id;
  std::string cwe_id;
  std::vector<weakness::Fix> fixes;
  std::optional<Timestamp> t0;
  std::optional<Timestamp> t1;
  Timestamp t2 = 0;
  Timestamp t3 = 0;
  weakness::LifecycleWindows windows;
  std::vector<std::string> files;
  std::vector<std::string> wcc_hashes;  // ascending by time
  std::vector<std::string> wcc_messages;
  std::string introduction_phase = "unknown";
  // Levels of the first-WCC author, absent without a chain.
  std::optional<std::string> wl_commit_level;
  std::optional<std::string> wl_code_level;
  std::optional<std::string> exp_level;
};

struct ProjectView {
  std::string id;
  std::string category;
  std::string project_class;
  std::uint64_t size_bytes = 0;
  std::size_t n_com = 0;
};

struct WeaknessFile {
  std::vector<ProjectView> projects;
  std::map<int, std::size_t> commits_per_year;
  nlohmann::json funnel;
  std::vector<WeaknessView> weaknesses;
};

// Throws ArtifactMalformed when the first record is not the meta record or a
// later record is not a weakness.
WeaknessFile parse_weakness_file(const std::vector<nlohmann::json>& records);
WeaknessFile load_weakness_file(const std::string& path);

struct CweCount {
  std::string cwe_id;
  std::size_t count = 0;
};

// Descending by count, then ascending id.
std::vector<CweCount> cwe_distribution(const std::vector<WeaknessView>& weaknesses);

double density(std::size_t weaknesses, double size_gb);

struct DensityRow {
  std::string category;
  double size_gb = 0.0;
  std::size_t count = 0;
  double density = 0.0;
  bool empty_category = false;  // no bytes in the category; density forced to 0
};

// One row per project category present in `projects`, in category order.
std::vector<DensityRow> density_table(const std::vector<ProjectView>& projects,
                                      const std::vector<WeaknessView>& weaknesses);

double ratio_permille(std::size_t weaknesses, std::size_t commits);

enum class YearKey { t1, t2 };

struct TrendRow {
  int year = 0;
  std::size_t commits = 0;
  std::size_t weaknesses = 0;
  double ratio_permille = 0.0;
};

// Weaknesses without T1 fall back to T2 under YearKey::t1.
std::vector<TrendRow> annual_trend(const std::map<int, std::size_t>& commits_per_year,
                                   const std::vector<WeaknessView>& weaknesses,
                                   YearKey key = YearKey::t1);

struct TopCweRow {
  std::string category;
  std::size_t rank = 0;
  std::string cwe_id;
  std::size_t count = 0;
};

std::vector<TopCweRow> top_cwe_by_category(const std::vector<ProjectView>& projects,
                                           const std::vector<WeaknessView>& weaknesses,
                                           std::size_t top_n = 3);

enum class FixKind { additions_only, deletions_only, both, none };

FixKind classify_fix(const weakness::Fix& fix);
std::string_view to_string(FixKind kind);

struct FixStats {
  std::size_t additions_only = 0;
  std::size_t deletions_only = 0;
  std::size_t both = 0;
  std::size_t none = 0;
  FiveNumber lines_changed;
  FiveNumber files_changed;
};

FixStats fix_change_stats(const std::vector<weakness::Fix>& fixes);

struct Library {
  std::string name;
  std::vector<std::string> prefixes;
};

// Lines of `<library> <prefix>...`; '#' comments.
std::vector<Library> parse_libraries(std::string_view text);

// True when `path` starts with `prefix` or contains "/" + prefix.
bool path_in_library(std::string_view path, const Library& library);

struct LibraryRow {
  std::string library;
  std::string project_id;
  std::size_t affected_files = 0;
  std::size_t weaknesses = 0;
  std::size_t first_wccs = 0;
};

struct LibraryTable {
  std::vector<LibraryRow> rows;
  // Weaknesses touching no library file.
  std::size_t unattributed = 0;
};

LibraryTable library_attribution(const std::vector<WeaknessView>& weaknesses,
                                 const std::vector<Library>& libraries);

using GoalLexicon = std::map<std::string, std::vector<std::string>>;

inline const std::vector<std::string> kGoals = {"new_feature", "enhancement", "refactoring",
                                                "bug_fixing"};

GoalLexicon parse_goal_lexicon(std::string_view text);

// Every goal whose lexicon matches the message.
std::vector<std::string> tag_goals(std::string_view message, const GoalLexicon& lexicon);

// Count per goal over the messages; every goal of `lexicon` appears.
std::map<std::string, std::size_t> goal_counts(const std::vector<std::string>& messages,
                                               const GoalLexicon& lexicon);

enum class GroupBy { cwe, category };

struct DistributionRow {
  std::string group;
  std::string window;  // insertion, latency, fixing, lifetime
  FiveNumber summary;
};

struct DistributionPoint {
  std::string group;
  std::string window;
  std::string weakness_id;
  double days = 0.0;
};

// Windows missing for untraced weaknesses are left out.
std::vector<DistributionPoint> window_points(const std::vector<ProjectView>& projects,
                                             const std::vector<WeaknessView>& weaknesses,
                                             GroupBy group_by);
std::vector<DistributionRow> window_distributions(const std::vector<DistributionPoint>& points);

struct ReportOptions {
  GroupBy group_by = GroupBy::cwe;
  YearKey year_key = YearKey::t1;
  std::vector<Library> libraries;
  GoalLexicon goals;
};

struct ConservationCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct ReportBundle {
  std::vector<CweCount> cwe_distribution;
  std::vector<DensityRow> density_table;
  std::vector<TrendRow> annual_trend;
  std::vector<TopCweRow> top_cwe_by_category;
  FixStats fix_stats;
  LibraryTable library_table;
  std::map<std::string, std::size_t> goal_counts;
  std::vector<DistributionPoint> window_points;
  std::vector<DistributionRow> window_distributions;
  std::map<std::string, std::map<std::string, std::size_t>> developer_levels;
  std::map<std::string, std::size_t> introduction_phases;
  std::vector<ConservationCheck> checks;
};

ReportBundle build_report(const WeaknessFile& file, const ReportOptions& options);

// Writes one CSV per table plus report.json into `out_dir`.
void write_report(const ReportBundle& bundle, const std::string& out_dir);

nlohmann::json to_json(const ReportBundle& bundle);

}  // namespace wm::analytics
