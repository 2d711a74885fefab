#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wm {

// UTC seconds since the epoch.
using Timestamp = std::int64_t;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr int kHistorySchemaVersion = 1;

bool is_commit_hash(std::string_view s);

// Calendar year (UTC) of a timestamp.
int utc_year(Timestamp t);

}  // namespace wm

namespace wm::ingest {

enum class Category {
  game,
  module,
  utility,
  sdk,
  plugin,
  tutorial,
  dev_framework,
  driver,
  graphics_engine,
};

enum class ProjectClass { application, development_tool };

ProjectClass class_of(Category category);
std::string_view to_string(Category category);
std::string_view to_string(ProjectClass project_class);
std::optional<Category> parse_category(std::string_view name);
const std::vector<Category>& all_categories();

struct ProjectRecord {
  std::string id;
  std::string clone_url;
  std::string local_path;
  Category category = Category::utility;
  std::string primary_language;
  std::uint64_t size_bytes = 0;
  std::uint32_t author_count = 1;

  ProjectClass project_class() const { return class_of(category); }
};

enum class ChangeType { added, modified, deleted, renamed };

struct Hunk {
  std::uint32_t old_start = 0;
  std::uint32_t old_len = 0;
  std::uint32_t new_start = 0;
  std::uint32_t new_len = 0;
  std::vector<std::string> deleted_line_texts;
  std::vector<std::string> added_line_texts;
};

struct FileChange {
  std::string path;
  // Pre-image path; differs from `path` only for renames.
  std::string old_path;
  ChangeType change_type = ChangeType::modified;
  std::uint32_t lines_added = 0;
  std::uint32_t lines_deleted = 0;
  bool binary = false;
  std::vector<Hunk> hunks;
};

struct CommitRecord {
  std::string hash;
  std::string author_id;
  Timestamp authored_at = 0;
  std::string message;
  std::vector<std::string> parents;
  std::vector<FileChange> changes;

  bool is_merge() const { return parents.size() > 1; }
  std::uint64_t lines_changed() const;
};

struct ProjectStats {
  std::int64_t d_act_days = 0;
  double d_act_months = 0.0;
  std::int64_t n_com = 0;
  double f_com = 0.0;
  // True when the active duration fell below one day and the floor was used.
  bool floor_applied = false;
};

void to_json(nlohmann::json& j, const ProjectRecord& p);
void from_json(const nlohmann::json& j, ProjectRecord& p);
void to_json(nlohmann::json& j, const Hunk& h);
void from_json(const nlohmann::json& j, Hunk& h);
void to_json(nlohmann::json& j, const FileChange& f);
void from_json(const nlohmann::json& j, FileChange& f);
void to_json(nlohmann::json& j, const CommitRecord& c);
void from_json(const nlohmann::json& j, CommitRecord& c);
void to_json(nlohmann::json& j, const ProjectStats& s);
void from_json(const nlohmann::json& j, ProjectStats& s);

NLOHMANN_JSON_SERIALIZE_ENUM(ChangeType, {
                                             {ChangeType::added, "added"},
                                             {ChangeType::modified, "modified"},
                                             {ChangeType::deleted, "deleted"},
                                             {ChangeType::renamed, "renamed"},
                                         })

}  // namespace wm::ingest
