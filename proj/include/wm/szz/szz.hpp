#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wm/git/repository.hpp"
#include "wm/ingest/types.hpp"

namespace wm::szz {

enum class UntraceableReason { pure_addition, binary_only, attribution_failed };

std::string_view to_string(UntraceableReason reason);

struct Wcc {
  std::string hash;
  Timestamp authored_at = 0;
  // Paths, as named at this commit, whose lines the fix removed.
  std::vector<std::string> files;

  bool operator==(const Wcc&) const = default;
};

struct FileError {
  std::string path;
  std::string message;

  bool operator==(const FileError&) const = default;
};

struct WccChain {
  std::string wfc_hash;
  // Ascending by authored_at, then hash; no duplicates.
  std::vector<Wcc> wccs;
  bool traced = false;
  std::optional<UntraceableReason> untraceable_reason;
  std::vector<FileError> errors;

  std::set<std::string> hashes() const;
  bool operator==(const WccChain&) const = default;
};

struct TraceOptions {
  // Files with these extensions are never traced (case-insensitive).
  std::vector<std::string> ignore_extensions{".meta"};
};

bool is_ignored(std::string_view path, const TraceOptions& options);

// Attributes the non-blank lines `wfc` removes relative to its first parent to
// the commits that last touched them at the parent revision. Only commits
// authored strictly before the fix are kept. Never throws for git failures:
// they are recorded in `errors`.
WccChain trace(const ingest::CommitRecord& wfc, const git::Repository& repo,
               const TraceOptions& options = {});

// trace() for each fix on up to `workers` threads; output is in input order.
std::vector<WccChain> trace_all(const std::vector<ingest::CommitRecord>& wfcs,
                                const git::Repository& repo, std::size_t workers,
                                const TraceOptions& options = {});

struct TraceSummary {
  std::size_t wfcs = 0;
  std::size_t traced = 0;
  std::size_t pure_addition = 0;
  std::size_t binary_only = 0;
  std::size_t attribution_failed = 0;
  // Distinct (project, commit) pairs over all chains.
  std::size_t wccs = 0;
};

struct TraceRunOptions {
  std::string classify_dir;
  std::string out_dir;
  std::size_t jobs = 1;
  TraceOptions trace;
};

// Stage 5. Reads the assigned commits from <classify>/assignments.jsonl and
// writes <out>/chains.jsonl, one record per fix.
TraceSummary run_trace(const TraceRunOptions& options);

void to_json(nlohmann::json& j, const Wcc& w);
void from_json(const nlohmann::json& j, Wcc& w);
void to_json(nlohmann::json& j, const WccChain& c);
void from_json(const nlohmann::json& j, WccChain& c);

}  // namespace wm::szz
