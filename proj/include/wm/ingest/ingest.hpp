#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wm/ingest/types.hpp"

namespace wm::ingest {

inline constexpr double kDaysPerMonth = 30.44;
// Active-duration floor used by compute_project_stats: one day, in months.
inline constexpr double kMinActiveMonths = 1.0 / kDaysPerMonth;

struct Candidate {
  std::string clone_url;
  std::size_t commit_count = 0;
  bool accessible = false;
  // Optional metadata carried over into the ProjectRecord.
  std::string id;
  std::string local_path;
  Category category = Category::utility;
  std::string primary_language;
  std::uint64_t size_bytes = 0;
  std::uint32_t author_count = 1;
};

struct Selection {
  std::vector<ProjectRecord> projects;
  std::size_t inaccessible = 0;
  std::size_t too_few_commits = 0;
};

// Keeps accessible candidates with at least `min_commits` commits, in input
// order.
Selection select_projects(const std::vector<Candidate>& candidates, std::size_t min_commits);

// Full history of a local repository: every commit reachable from any ref,
// sorted by authored_at (ties keep topological order). Throws
// RepositoryUnreadable for absent, corrupt or empty repositories.
std::vector<CommitRecord> extract_commits(const ProjectRecord& project);

// Throws EmptyHistory when `commits` is empty. Merge commits are counted
// unless `count_merges` is false.
ProjectStats compute_project_stats(const std::vector<CommitRecord>& commits,
                                   bool count_merges = true);

struct ManifestEntry {
  std::string source;  // clone URL or local path
  std::map<std::string, std::string> attributes;  // key=value tokens after the source
};

// One entry per line; '#' starts a comment. Optional `key=value` tokens may
// follow the source (category, id, language).
std::vector<ManifestEntry> parse_manifest(const std::string& text);

struct IngestOptions {
  std::filesystem::path out_dir;
  std::size_t min_commits = 100;
  std::size_t jobs = 1;
  bool count_merges = true;
};

struct IngestSummary {
  std::size_t candidates = 0;
  std::size_t selected = 0;
  std::size_t inaccessible = 0;
  std::size_t too_few_commits = 0;
  std::size_t skipped_unreadable = 0;
  std::size_t commits = 0;
};

// Stage 1 + 2: resolves (cloning when the source is not a local directory)
// every manifest entry, selects projects, and writes
//   <out>/projects.jsonl         one ProjectRecord + ProjectStats per line
//   <out>/history/<id>.jsonl     one CommitRecord per line
IngestSummary run_ingest(const std::vector<ManifestEntry>& manifest, const IngestOptions& options);

struct ProjectEntry {
  ProjectRecord project;
  ProjectStats stats;
};

std::vector<ProjectEntry> read_projects(const std::filesystem::path& ingest_dir);
std::vector<CommitRecord> read_history(const std::filesystem::path& ingest_dir,
                                       const std::string& project_id);
void write_history(const std::filesystem::path& path, const std::vector<CommitRecord>& commits);

// Language guess from file extensions weighted by blob size.
std::string guess_language(const std::vector<std::pair<std::string, std::uint64_t>>& blobs);

}  // namespace wm::ingest
