#include "wm/ingest/types.hpp"

#include <array>
#include <ctime>
#include <utility>

#include "wm/error.hpp"

namespace wm {

bool is_commit_hash(std::string_view s) {
  if (s.size() != 40) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

int utc_year(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  return tm.tm_year + 1900;
}

}  // namespace wm

namespace wm::ingest {

namespace {

constexpr std::array<std::pair<Category, std::string_view>, 9> kCategoryNames{{
    {Category::game, "game"},
    {Category::module, "module"},
    {Category::utility, "utility"},
    {Category::sdk, "sdk"},
    {Category::plugin, "plugin"},
    {Category::tutorial, "tutorial"},
    {Category::dev_framework, "dev_framework"},
    {Category::driver, "driver"},
    {Category::graphics_engine, "graphics_engine"},
}};

}  // namespace

ProjectClass class_of(Category category) {
  switch (category) {
    case Category::game:
    case Category::module:
    case Category::utility:
      return ProjectClass::application;
    default:
      return ProjectClass::development_tool;
  }
}

std::string_view to_string(Category category) {
  for (const auto& [c, name] : kCategoryNames)
    if (c == category) return name;
  return "utility";
}

std::string_view to_string(ProjectClass project_class) {
  return project_class == ProjectClass::application ? "application" : "development_tool";
}

std::optional<Category> parse_category(std::string_view name) {
  for (const auto& [c, n] : kCategoryNames)
    if (n == name) return c;
  return std::nullopt;
}

const std::vector<Category>& all_categories() {
  static const std::vector<Category> all = [] {
    std::vector<Category> v;
    for (const auto& [c, _] : kCategoryNames) v.push_back(c);
    return v;
  }();
  return all;
}

std::uint64_t CommitRecord::lines_changed() const {
  std::uint64_t total = 0;
  for (const auto& c : changes) total += c.lines_added + c.lines_deleted;
  return total;
}

void to_json(nlohmann::json& j, const ProjectRecord& p) {
  j = {{"id", p.id},
       {"clone_url", p.clone_url},
       {"local_path", p.local_path},
       {"category", to_string(p.category)},
       {"class", to_string(p.project_class())},
       {"primary_language", p.primary_language},
       {"size_bytes", p.size_bytes},
       {"author_count", p.author_count}};
}

void from_json(const nlohmann::json& j, ProjectRecord& p) {
  j.at("id").get_to(p.id);
  j.at("clone_url").get_to(p.clone_url);
  j.at("local_path").get_to(p.local_path);
  auto category = parse_category(j.at("category").get<std::string>());
  if (!category) throw ArtifactMalformed("unknown project category in record " + p.id);
  p.category = *category;
  j.at("primary_language").get_to(p.primary_language);
  j.at("size_bytes").get_to(p.size_bytes);
  j.at("author_count").get_to(p.author_count);
}

void to_json(nlohmann::json& j, const Hunk& h) {
  j = {{"old_start", h.old_start},
       {"old_len", h.old_len},
       {"new_start", h.new_start},
       {"new_len", h.new_len},
       {"deleted_line_texts", h.deleted_line_texts},
       {"added_line_texts", h.added_line_texts}};
}

void from_json(const nlohmann::json& j, Hunk& h) {
  j.at("old_start").get_to(h.old_start);
  j.at("old_len").get_to(h.old_len);
  j.at("new_start").get_to(h.new_start);
  j.at("new_len").get_to(h.new_len);
  j.at("deleted_line_texts").get_to(h.deleted_line_texts);
  h.added_line_texts = j.value("added_line_texts", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const FileChange& f) {
  j = {{"path", f.path},
       {"old_path", f.old_path},
       {"change_type", f.change_type},
       {"lines_added", f.lines_added},
       {"lines_deleted", f.lines_deleted},
       {"binary", f.binary},
       {"hunks", f.hunks}};
}

void from_json(const nlohmann::json& j, FileChange& f) {
  j.at("path").get_to(f.path);
  f.old_path = j.value("old_path", f.path);
  j.at("change_type").get_to(f.change_type);
  j.at("lines_added").get_to(f.lines_added);
  j.at("lines_deleted").get_to(f.lines_deleted);
  f.binary = j.value("binary", false);
  j.at("hunks").get_to(f.hunks);
}

void to_json(nlohmann::json& j, const CommitRecord& c) {
  j = {{"hash", c.hash},
       {"author_id", c.author_id},
       {"authored_at", c.authored_at},
       {"message", c.message},
       {"parents", c.parents},
       {"changes", c.changes}};
}

void from_json(const nlohmann::json& j, CommitRecord& c) {
  j.at("hash").get_to(c.hash);
  if (!is_commit_hash(c.hash)) throw ArtifactMalformed("bad commit hash '" + c.hash + "'");
  j.at("author_id").get_to(c.author_id);
  j.at("authored_at").get_to(c.authored_at);
  j.at("message").get_to(c.message);
  j.at("parents").get_to(c.parents);
  j.at("changes").get_to(c.changes);
}

void to_json(nlohmann::json& j, const ProjectStats& s) {
  j = {{"d_act_days", s.d_act_days},
       {"d_act_months", s.d_act_months},
       {"n_com", s.n_com},
       {"f_com", s.f_com},
       {"floor_applied", s.floor_applied}};
}

void from_json(const nlohmann::json& j, ProjectStats& s) {
  j.at("d_act_days").get_to(s.d_act_days);
  j.at("d_act_months").get_to(s.d_act_months);
  j.at("n_com").get_to(s.n_com);
  j.at("f_com").get_to(s.f_com);
  s.floor_applied = j.value("floor_applied", false);
}

}  // namespace wm::ingest
