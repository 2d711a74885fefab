#include "wm/ingest/ingest.hpp"

#include <cctype>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wm/error.hpp"
#include "wm/git/repository.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/parallel.hpp"
#include "wm/util/text.hpp"

namespace wm::ingest {

namespace fs = std::filesystem;

Selection select_projects(const std::vector<Candidate>& candidates, std::size_t min_commits) {
  if (min_commits < 1) throw InvalidArgument("min_commits must be at least 1");
  Selection selection;
  for (const auto& c : candidates) {
    if (!c.accessible) {
      ++selection.inaccessible;
      continue;
    }
    if (c.commit_count < min_commits) {
      ++selection.too_few_commits;
      continue;
    }
    ProjectRecord p;
    p.id = c.id;
    p.clone_url = c.clone_url;
    p.local_path = c.local_path;
    p.category = c.category;
    p.primary_language = c.primary_language;
    p.size_bytes = c.size_bytes;
    p.author_count = std::max<std::uint32_t>(1, c.author_count);
    selection.projects.push_back(std::move(p));
  }
  return selection;
}

std::vector<CommitRecord> extract_commits(const ProjectRecord& project) {
  git::Repository repo(project.local_path);
  auto commits = repo.read_all_commits();
  std::stable_sort(commits.begin(), commits.end(),
                   [](const CommitRecord& a, const CommitRecord& b) {
                     return a.authored_at < b.authored_at;
                   });
  return commits;
}

ProjectStats compute_project_stats(const std::vector<CommitRecord>& commits, bool count_merges) {
  if (commits.empty()) throw EmptyHistory("cannot compute project stats of an empty history");
  auto [lo, hi] = std::minmax_element(
      commits.begin(), commits.end(),
      [](const CommitRecord& a, const CommitRecord& b) { return a.authored_at < b.authored_at; });
  const double span_days = static_cast<double>(hi->authored_at - lo->authored_at) / kSecondsPerDay;

  ProjectStats s;
  s.d_act_days = static_cast<std::int64_t>(std::floor(span_days));
  s.d_act_months = span_days / kDaysPerMonth;
  s.n_com = static_cast<std::int64_t>(
      count_merges ? commits.size()
                   : std::count_if(commits.begin(), commits.end(),
                                   [](const CommitRecord& c) { return !c.is_merge(); }));
  s.floor_applied = s.d_act_months < kMinActiveMonths;
  s.f_com = static_cast<double>(s.n_com) / std::max(s.d_act_months, kMinActiveMonths);
  return s;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> entries;
  for (const auto& raw : util::split_lines(text)) {
    std::string line = raw;
    // '#' starts a comment only at the line start or after whitespace, so C# survives.
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    line = util::trim(line);
    if (line.empty()) continue;
    std::istringstream in(line);
    ManifestEntry e;
    in >> e.source;
    std::string token;
    while (in >> token) {
      auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ManifestMalformed("expected key=value after source, got '" + token + "'");
      e.attributes[token.substr(0, eq)] = token.substr(eq + 1);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string guess_language(const std::vector<std::pair<std::string, std::uint64_t>>& blobs) {
  static const std::map<std::string, std::string> kByExtension = {
      {".cs", "C#"},         {".cpp", "C++"},      {".cc", "C++"},       {".cxx", "C++"},
      {".hpp", "C++"},       {".h", "C/C++"},      {".c", "C"},          {".js", "JavaScript"},
      {".ts", "TypeScript"}, {".py", "Python"},    {".java", "Java"},    {".kt", "Kotlin"},
      {".swift", "Swift"},   {".go", "Go"},        {".rs", "Rust"},      {".gd", "GDScript"},
      {".shader", "ShaderLab"}, {".hlsl", "HLSL"}, {".glsl", "GLSL"},    {".lua", "Lua"},
      {".html", "HTML"},     {".m", "Objective-C"}, {".mm", "Objective-C++"},
  };
  std::map<std::string, std::uint64_t> weight;
  for (const auto& [path, size] : blobs) {
    auto dot = path.rfind('.');
    if (dot == std::string::npos || path.find('/', dot) != std::string::npos) continue;
    auto it = kByExtension.find(util::to_lower(path.substr(dot)));
    if (it != kByExtension.end()) weight[it->second] += size;
  }
  std::string best;
  std::uint64_t best_weight = 0;
  for (const auto& [lang, w] : weight)
    if (w > best_weight) best = lang, best_weight = w;
  return best.empty() ? "unknown" : best;
}

namespace {

std::string derive_id(const std::string& source) {
  std::string s = source;
  while (!s.empty() && (s.back() == '/' || s.back() == '\\')) s.pop_back();
  auto slash = s.find_last_of("/:\\");
  std::string base = slash == std::string::npos ? s : s.substr(slash + 1);
  if (util::ends_with(base, ".git")) base.resize(base.size() - 4);
  std::string id;
  for (char c : base)
    id += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return id.empty() ? "project" : id;
}

Candidate resolve(const ManifestEntry& entry, const std::string& id, const IngestOptions& options) {
  Candidate c;
  c.id = id;
  c.clone_url = entry.source;
  if (auto it = entry.attributes.find("category"); it != entry.attributes.end()) {
    auto category = parse_category(it->second);
    if (!category) throw ManifestMalformed("unknown category '" + it->second + "'");
    c.category = *category;
  } else {
    spdlog::warn("project {}: no category given, defaulting to utility", id);
  }

  fs::path local = entry.source;
  if (fs::is_directory(local)) {
    c.local_path = fs::absolute(local).lexically_normal().string();
  } else {
    fs::path target = options.out_dir / "repos" / (id + ".git");
    if (!fs::exists(target)) {
      fs::create_directories(target.parent_path());
      auto r = util::run_process({"git", "clone", "--quiet", "--mirror", entry.source, target.string()},
                                 {.cwd = {}, .env = {{"GIT_TERMINAL_PROMPT", "0"}}, .stdin_data = {}});
      if (!r.ok()) {
        spdlog::warn("project {}: clone of {} failed: {}", id, entry.source, util::trim(r.err));
        fs::remove_all(target);
        return c;
      }
    }
    c.local_path = target.string();
  }

  git::Repository repo(c.local_path);
  if (!repo.is_repository()) return c;
  try {
    c.commit_count = repo.count_commits(options.count_merges);
    if (c.commit_count == 0) {
      c.accessible = true;
      return c;
    }
    auto blobs = repo.tree_blobs(repo.head_commit());
    for (const auto& [_, size] : blobs) c.size_bytes += size;
    c.primary_language = entry.attributes.count("language") ? entry.attributes.at("language")
                                                            : guess_language(blobs);
    c.accessible = true;
  } catch (const RepositoryUnreadable& e) {
    spdlog::warn("project {}: {}", id, e.what());
  }
  return c;
}

}  // namespace

IngestSummary run_ingest(const std::vector<ManifestEntry>& manifest, const IngestOptions& options) {
  IngestSummary summary;
  summary.candidates = manifest.size();
  fs::create_directories(options.out_dir / "history");

  std::vector<std::string> ids;
  std::set<std::string> used;
  for (const auto& e : manifest) {
    std::string base = e.attributes.count("id") ? e.attributes.at("id") : derive_id(e.source);
    std::string id = base;
    for (int n = 2; used.count(id); ++n) id = fmt::format("{}-{}", base, n);
    used.insert(id);
    ids.push_back(id);
  }

  auto candidates = util::parallel_map<Candidate>(manifest.size(), options.jobs, [&](size_t i) {
    return resolve(manifest[i], ids[i], options);
  });
  auto selection = select_projects(candidates, options.min_commits);
  summary.inaccessible = selection.inaccessible;
  summary.too_few_commits = selection.too_few_commits;

  struct Extracted {
    std::optional<ProjectEntry> entry;
    std::size_t commits = 0;
  };
  auto extracted = util::parallel_map<Extracted>(
      selection.projects.size(), options.jobs, [&](size_t i) -> Extracted {
        ProjectRecord project = selection.projects[i];
        try {
          auto commits = extract_commits(project);
          std::set<std::string> authors;
          for (const auto& c : commits) authors.insert(c.author_id);
          project.author_count = static_cast<std::uint32_t>(std::max<std::size_t>(1, authors.size()));
          auto stats = compute_project_stats(commits, options.count_merges);
          write_history(options.out_dir / "history" / (project.id + ".jsonl"), commits);
          return {ProjectEntry{project, stats}, commits.size()};
        } catch (const RepositoryUnreadable& e) {
          spdlog::warn("skipping project {}: {}", project.id, e.what());
          return {};
        }
      });

  std::vector<util::Json> records;
  for (auto& x : extracted) {
    if (!x.entry) {
      ++summary.skipped_unreadable;
      continue;
    }
    util::Json j = x.entry->project;
    j["stats"] = x.entry->stats;
    j["schema_version"] = kHistorySchemaVersion;
    records.push_back(std::move(j));
    ++summary.selected;
    summary.commits += x.commits;
  }
  util::write_jsonl((options.out_dir / "projects.jsonl").string(), records);
  return summary;
}

std::vector<ProjectEntry> read_projects(const fs::path& ingest_dir) {
  std::vector<ProjectEntry> out;
  for (const auto& j : util::read_jsonl((ingest_dir / "projects.jsonl").string())) {
    ProjectEntry e;
    e.project = j.get<ProjectRecord>();
    e.stats = j.at("stats").get<ProjectStats>();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CommitRecord> read_history(const fs::path& ingest_dir, const std::string& project_id) {
  std::vector<CommitRecord> out;
  for (const auto& j : util::read_jsonl((ingest_dir / "history" / (project_id + ".jsonl")).string()))
    out.push_back(j.get<CommitRecord>());
  return out;
}

void write_history(const fs::path& path, const std::vector<CommitRecord>& commits) {
  std::vector<util::Json> lines;
  lines.reserve(commits.size());
  for (const auto& c : commits) {
    util::Json j = c;
    j["schema_version"] = kHistorySchemaVersion;
    lines.push_back(std::move(j));
  }
  util::write_jsonl(path.string(), lines);
}

}  // namespace wm::ingest
