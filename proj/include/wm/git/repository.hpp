#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wm/ingest/types.hpp"
#include "wm/util/process.hpp"

namespace wm::git {

// Parses `git diff`/`git log -p` patch text produced with -U0. Renames,
// binary markers, mode-only changes and quoted paths are handled; context
// lines are not expected.
std::vector<ingest::FileChange> parse_unified_diff(std::string_view patch);

// Canonical author key: lowercased email, or lowercased name when the email
// is blank.
std::string canonical_author(std::string_view name, std::string_view email);

struct BlameLine {
  std::string commit;
  Timestamp authored_at = 0;
  std::string source_path;  // path of the line at `commit`
  std::uint32_t final_line = 0;
  bool boundary = false;
};

// Parses `git blame --line-porcelain` output.
std::vector<BlameLine> parse_line_porcelain(std::string_view text);

struct LineRange {
  std::uint32_t first = 0;
  std::uint32_t last = 0;
};

// Read-only handle on one local repository (bare or non-bare). Each call
// spawns its own git process, so one handle may serve several threads.
class Repository {
 public:
  explicit Repository(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  // True when `git rev-parse` accepts the path as a repository.
  bool is_repository() const;

  // Every commit reachable from any ref, with per-file changes against the
  // single parent (merge commits carry no changes). Order: git topo order.
  // Throws RepositoryUnreadable for absent, corrupt or empty repositories.
  std::vector<ingest::CommitRecord> read_all_commits() const;

  std::size_t count_commits(bool include_merges) const;

  // Changes from `base` to `target`; empty base diffs against the empty tree.
  std::vector<ingest::FileChange> diff(const std::string& base,
                                       const std::string& target) const;

  std::vector<std::string> parents_of(const std::string& commit) const;

  // Line attribution at `revision` for the given 1-based ranges of `path`.
  std::vector<BlameLine> blame(const std::string& revision, const std::string& path,
                               const std::vector<LineRange>& ranges) const;

  // (path, size in bytes) for every blob in the tree at `revision`.
  std::vector<std::pair<std::string, std::uint64_t>> tree_blobs(
      const std::string& revision) const;

  // Default branch tip; falls back to the newest ref tip.
  std::string head_commit() const;

  util::ProcessResult run(std::vector<std::string> args) const;

 private:
  std::filesystem::path path_;
};

}  // namespace wm::git
