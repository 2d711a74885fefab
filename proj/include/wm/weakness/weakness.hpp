#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wm/ingest/types.hpp"
#include "wm/szz/szz.hpp"

namespace wm::weakness {

struct Fix {
  std::string hash;
  Timestamp authored_at = 0;
  std::string cwe_id;
  std::vector<std::string> files;
  std::uint32_t lines_added = 0;
  std::uint32_t lines_deleted = 0;

  bool operator==(const Fix&) const = default;
};

Fix make_fix(const ingest::CommitRecord& commit, std::string cwe_id);

struct Weakness {
  std::string id;
  std::string project_id;
  std::string cwe_id;
  // Ascending by time, then hash.
  std::vector<Fix> fixes;
  // Chain of the latest fix; absent when that fix could not be traced.
  std::optional<szz::WccChain> chain;
  std::optional<szz::UntraceableReason> untraced_reason;
  std::optional<Timestamp> t0;
  std::optional<Timestamp> t1;
  Timestamp t2 = 0;
  Timestamp t3 = 0;
  std::set<std::string> files;

  bool operator==(const Weakness&) const = default;
};

struct WfcInput {
  std::string project_id;
  Fix fix;
  szz::WccChain chain;
};

Weakness make_singleton(const WfcInput& input);

// Recomputes id, cwe, chain-derived points and files from `fixes` and
// `chain`. t1 is the latest WCC at or before t2.
void refresh(Weakness& w);

// Same project, both traced, one WCC set contains the other, and the same
// earliest WCC.
bool mergeable(const Weakness& a, const Weakness& b);

// Merges mergeable weaknesses transitively until nothing changes. The merged
// weakness keeps the chain and CWE of its latest fix. Output is sorted by
// (project, t2, id) and does not depend on input order.
std::vector<Weakness> merge_weaknesses(std::vector<Weakness> weaknesses);

std::vector<Weakness> deduplicate(const std::vector<WfcInput>& inputs);

// Windows in 86,400-second days. Windows that need the chain are absent when
// the weakness has none.
struct LifecycleWindows {
  std::optional<double> t01;
  std::optional<double> t12;
  double t23 = 0.0;
  std::optional<double> t13;
};

LifecycleWindows lifecycle(const Weakness& w);

enum class Level { low, medium, high };
enum class ExpLevel { newcomer, medium, expert };

// low < 0.25 <= medium <= 0.75 < high
Level workload_level(double ratio);
ExpLevel experience_level(double ratio);

std::string_view to_string(Level level);
std::string_view to_string(ExpLevel level);

inline constexpr double kWorkloadWindowDays = 30.0;

struct Workload {
  double wl_commit = 0.0;
  double wl_code = 0.0;
  // Set when the window held no commits (resp. no changed lines) and the
  // ratio was defined as 0.
  bool no_commits = false;
  bool no_lines = false;
};

// Author's share of commits and changed lines among all commits authored in
// [at - 30 days, at]. `history` must be sorted by authored_at.
Workload workload(std::string_view author, Timestamp at,
                  const std::vector<ingest::CommitRecord>& history);

enum class ExpMode { sum, max };

// (at - first activity of author) over the sum (or max) of every author's
// tenure up to `at`, clipped to [0, 1]. Throws UnknownAuthor when the author
// has no commit at or before `at`.
double experience(std::string_view author, Timestamp at,
                  const std::vector<ingest::CommitRecord>& history, ExpMode mode = ExpMode::sum);

struct DeveloperStatus {
  std::string author_id;
  double wl_commit = 0.0;
  Level wl_commit_level = Level::low;
  double wl_code = 0.0;
  Level wl_code_level = Level::low;
  double exp = 0.0;
  ExpLevel exp_level = ExpLevel::newcomer;
};

DeveloperStatus developer_status(std::string_view author, Timestamp at,
                                 const std::vector<ingest::CommitRecord>& history,
                                 ExpMode mode = ExpMode::sum);

enum class IntroductionPhase { creation, maintenance, both, unknown };

std::string_view to_string(IntroductionPhase phase);

// Path -> time the file was first added, following renames.
std::map<std::string, Timestamp> file_creation_times(
    const std::vector<ingest::CommitRecord>& history);

// Looks at the files of the first WCC: created there, modified there, or a
// mix. Unknown without a chain or when a file's creation time is missing.
IntroductionPhase introduction_phase(const Weakness& w,
                                     const std::map<std::string, Timestamp>& creation_times);

struct WeaknessSummary {
  std::size_t wfcs = 0;
  std::size_t weaknesses = 0;
  std::size_t merged_wfcs = 0;
  std::size_t untraced = 0;
  std::size_t multi_fix = 0;
};

struct WeaknessOptions {
  std::string ingest_dir;
  std::string filter_dir;  // optional; only used for the funnel counts
  std::string trace_dir;
  std::string out_dir;
  ExpMode exp_mode = ExpMode::sum;
};

// Stage 6. Reads <trace>/chains.jsonl plus the project histories and writes
// <out>/weaknesses.jsonl: one `meta` record followed by one `weakness` record
// per deduplicated weakness.
WeaknessSummary run_weaknesses(const WeaknessOptions& options);

void to_json(nlohmann::json& j, const Fix& f);
void from_json(const nlohmann::json& j, Fix& f);
void to_json(nlohmann::json& j, const LifecycleWindows& w);
void to_json(nlohmann::json& j, const DeveloperStatus& d);

}  // namespace wm::weakness
