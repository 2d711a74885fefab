#include "wm/git/repository.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/util/text.hpp"

namespace wm::git {

namespace {

using ingest::ChangeType;
using ingest::FileChange;
using ingest::Hunk;

std::string unquote_c_style(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::string(s);
  std::string out;
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c != '\\' || i + 2 >= s.size()) {
      out += c;
      continue;
    }
    char n = s[++i];
    switch (n) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'a': out += '\a'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'v': out += '\v'; break;
      case '\\': out += '\\'; break;
      case '"': out += '"'; break;
      default:
        if (n >= '0' && n <= '7' && i + 2 < s.size()) {
          int value = (n - '0') * 64 + (s[i + 1] - '0') * 8 + (s[i + 2] - '0');
          out += static_cast<char>(value);
          i += 2;
        } else {
          out += n;
        }
    }
  }
  return out;
}

// Strips the a/ or b/ prefix from a diff header path; nullopt-like empty for
// /dev/null.
std::string header_path(std::string_view raw) {
  std::string_view s = raw;
  while (!s.empty() && (s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  std::string p = unquote_c_style(s);
  if (p == "/dev/null") return {};
  if (p.size() > 2 && (util::starts_with(p, "a/") || util::starts_with(p, "b/")))
    return p.substr(2);
  return p;
}

// "diff --git a/X b/Y": recovers X and Y when the header is all we have.
std::pair<std::string, std::string> paths_from_git_header(std::string_view rest) {
  if (!rest.empty() && rest.front() == '"') {
    size_t end = 1;
    while (end < rest.size() && !(rest[end] == '"' && rest[end - 1] != '\\')) ++end;
    std::string a = header_path(rest.substr(0, end + 1));
    std::string_view tail = rest.substr(std::min(rest.size(), end + 2));
    return {a, header_path(tail)};
  }
  if (rest.size() % 2 == 1) {
    size_t half = rest.size() / 2;
    std::string_view a = rest.substr(0, half), b = rest.substr(half + 1);
    if (util::starts_with(a, "a/") && util::starts_with(b, "b/") &&
        a.substr(2) == b.substr(2))
      return {std::string(a.substr(2)), std::string(b.substr(2))};
  }
  size_t split = rest.find(" b/");
  if (split == std::string_view::npos) return {header_path(rest), header_path(rest)};
  return {header_path(rest.substr(0, split)), header_path(rest.substr(split + 1))};
}

bool parse_range(std::string_view s, std::uint32_t& start, std::uint32_t& len) {
  size_t comma = s.find(',');
  std::string_view a = s.substr(0, comma);
  auto r = std::from_chars(a.data(), a.data() + a.size(), start);
  if (r.ec != std::errc()) return false;
  len = 1;
  if (comma != std::string_view::npos) {
    std::string_view b = s.substr(comma + 1);
    r = std::from_chars(b.data(), b.data() + b.size(), len);
    if (r.ec != std::errc()) return false;
  }
  return true;
}

bool parse_hunk_header(std::string_view line, Hunk& hunk) {
  // @@ -a[,b] +c[,d] @@
  if (!util::starts_with(line, "@@ -")) return false;
  size_t plus = line.find(" +", 4);
  if (plus == std::string_view::npos) return false;
  size_t end = line.find(' ', plus + 2);
  if (end == std::string_view::npos) end = line.size();
  return parse_range(line.substr(4, plus - 4), hunk.old_start, hunk.old_len) &&
         parse_range(line.substr(plus + 2, end - plus - 2), hunk.new_start, hunk.new_len);
}

void finish_file(std::vector<FileChange>& files, std::optional<FileChange>& current) {
  if (!current) return;
  if (current->path.empty()) current->path = current->old_path;
  if (current->old_path.empty()) current->old_path = current->path;
  if (current->change_type == ChangeType::modified && current->old_path != current->path)
    current->change_type = ChangeType::renamed;
  files.push_back(std::move(*current));
  current.reset();
}

}  // namespace

std::vector<FileChange> parse_unified_diff(std::string_view patch) {
  std::vector<FileChange> files;
  std::optional<FileChange> current;
  std::uint32_t old_left = 0, new_left = 0;

  for (const auto& line : util::split_lines(patch)) {
    if (current && (old_left > 0 || new_left > 0)) {
      Hunk& h = current->hunks.back();
      if (old_left > 0 && !line.empty() && line[0] == '-') {
        h.deleted_line_texts.push_back(line.substr(1));
        ++current->lines_deleted;
        --old_left;
        continue;
      }
      if (new_left > 0 && !line.empty() && line[0] == '+') {
        h.added_line_texts.push_back(line.substr(1));
        ++current->lines_added;
        --new_left;
        continue;
      }
      if (!line.empty() && line[0] == '\\') continue;
      if (!line.empty() && line[0] == ' ') {
        // Context line (diff produced without -U0).
        if (old_left) --old_left;
        if (new_left) --new_left;
        continue;
      }
      old_left = new_left = 0;
    }

    if (util::starts_with(line, "diff --git ")) {
      finish_file(files, current);
      current.emplace();
      auto [a, b] = paths_from_git_header(std::string_view(line).substr(11));
      current->old_path = a;
      current->path = b;
      continue;
    }
    if (!current) continue;

    if (util::starts_with(line, "@@ ")) {
      Hunk h;
      if (!parse_hunk_header(line, h)) continue;
      old_left = h.old_len;
      new_left = h.new_len;
      current->hunks.push_back(std::move(h));
    } else if (line.empty() || line[0] == '\\') {
      continue;
    } else if (util::starts_with(line, "new file mode")) {
      current->change_type = ChangeType::added;
    } else if (util::starts_with(line, "deleted file mode")) {
      current->change_type = ChangeType::deleted;
    } else if (util::starts_with(line, "rename from ")) {
      current->old_path = unquote_c_style(std::string_view(line).substr(12));
      current->change_type = ChangeType::renamed;
    } else if (util::starts_with(line, "rename to ")) {
      current->path = unquote_c_style(std::string_view(line).substr(10));
      current->change_type = ChangeType::renamed;
    } else if (util::starts_with(line, "copy to ")) {
      current->path = unquote_c_style(std::string_view(line).substr(8));
      current->change_type = ChangeType::added;
    } else if (util::starts_with(line, "Binary files ") ||
               util::starts_with(line, "GIT binary patch")) {
      current->binary = true;
    } else if (util::starts_with(line, "--- ")) {
      std::string p = header_path(std::string_view(line).substr(4));
      if (p.empty()) current->change_type = ChangeType::added;
      else current->old_path = p;
    } else if (util::starts_with(line, "+++ ")) {
      std::string p = header_path(std::string_view(line).substr(4));
      if (p.empty()) current->change_type = ChangeType::deleted;
      else current->path = p;
    }
  }
  finish_file(files, current);
  return files;
}

std::string canonical_author(std::string_view name, std::string_view email) {
  std::string key = util::to_lower(util::trim(email));
  if (key.empty()) key = util::to_lower(util::trim(name));
  return key;
}

std::vector<BlameLine> parse_line_porcelain(std::string_view text) {
  std::vector<BlameLine> lines;
  std::optional<BlameLine> current;
  for (const auto& line : util::split_lines(text)) {
    if (!line.empty() && line[0] == '\t') {
      if (current) lines.push_back(std::move(*current));
      current.reset();
      continue;
    }
    if (!current) {
      auto parts = util::split(line, ' ');
      if (parts.size() < 3 || !is_commit_hash(parts[0])) continue;
      current.emplace();
      current->commit = parts[0];
      current->final_line = static_cast<std::uint32_t>(std::strtoul(parts[2].c_str(), nullptr, 10));
      continue;
    }
    if (util::starts_with(line, "author-time ")) {
      current->authored_at = std::strtoll(line.c_str() + 12, nullptr, 10);
    } else if (util::starts_with(line, "filename ")) {
      current->source_path = unquote_c_style(std::string_view(line).substr(9));
    } else if (line == "boundary") {
      current->boundary = true;
    }
  }
  return lines;
}

Repository::Repository(std::filesystem::path path) : path_(std::move(path)) {}

util::ProcessResult Repository::run(std::vector<std::string> args) const {
  std::vector<std::string> argv = {"git", "-C", path_.string(), "-c", "core.quotePath=false",
                                   "-c", "diff.renameLimit=4000"};
  argv.insert(argv.end(), std::make_move_iterator(args.begin()),
              std::make_move_iterator(args.end()));
  util::ProcessOptions options;
  // Keep user configuration (pagers, color, external diff drivers) out.
  options.env = {{"GIT_CONFIG_NOSYSTEM", "1"}, {"GIT_PAGER", "cat"}, {"LC_ALL", "C"}};
  return util::run_process(argv, options);
}

bool Repository::is_repository() const {
  if (!std::filesystem::exists(path_)) return false;
  return run({"rev-parse", "--git-dir"}).ok();
}

std::vector<ingest::CommitRecord> Repository::read_all_commits() const {
  if (!is_repository())
    throw RepositoryUnreadable(fmt::format("'{}' is not a git repository", path_.string()));
  auto result = run({"log", "--all", "--topo-order", "--reverse", "--no-color", "--no-ext-diff",
                     "--no-textconv", "-M", "-U0", "-p",
                     "--format=%x00%H%x00%P%x00%an%x00%ae%x00%at%x00%B%x00"});
  if (!result.ok())
    throw RepositoryUnreadable(fmt::format("git log failed in '{}': {}", path_.string(),
                                           util::trim(result.err)));

  std::vector<std::string_view> tokens;
  std::string_view out = result.out;
  size_t start = 0;
  for (;;) {
    size_t pos = out.find('\0', start);
    if (pos == std::string_view::npos) {
      tokens.push_back(out.substr(start));
      break;
    }
    tokens.push_back(out.substr(start, pos - start));
    start = pos + 1;
  }
  // tokens: "", then per commit: H, P, an, ae, at, B, patch
  std::vector<ingest::CommitRecord> commits;
  for (size_t i = 1; i + 5 < tokens.size(); i += 7) {
    ingest::CommitRecord c;
    c.hash = std::string(tokens[i]);
    if (!is_commit_hash(c.hash))
      throw RepositoryUnreadable(fmt::format("unexpected git log output in '{}'", path_.string()));
    for (auto& p : util::split(tokens[i + 1], ' '))
      if (!p.empty()) c.parents.push_back(p);
    c.author_id = canonical_author(tokens[i + 2], tokens[i + 3]);
    c.authored_at = std::strtoll(std::string(tokens[i + 4]).c_str(), nullptr, 10);
    std::string message(tokens[i + 5]);
    while (!message.empty() && (message.back() == '\n' || message.back() == '\r'))
      message.pop_back();
    c.message = std::move(message);
    if (i + 6 < tokens.size()) c.changes = parse_unified_diff(tokens[i + 6]);
    commits.push_back(std::move(c));
  }
  if (commits.empty())
    throw RepositoryUnreadable(fmt::format("repository '{}' has no commits", path_.string()));
  return commits;
}

std::size_t Repository::count_commits(bool include_merges) const {
  std::vector<std::string> args = {"rev-list", "--all", "--count"};
  if (!include_merges) args.push_back("--no-merges");
  auto r = run(args);
  if (!r.ok()) throw RepositoryUnreadable("git rev-list failed in " + path_.string());
  return std::strtoull(r.out.c_str(), nullptr, 10);
}

std::vector<FileChange> Repository::diff(const std::string& base,
                                         const std::string& target) const {
  std::vector<std::string> args = {"diff", "--no-color", "--no-ext-diff", "--no-textconv",
                                   "-M", "-U0"};
  if (base.empty()) {
    // Root commit: compare against the empty tree.
    args.push_back("4b825dc642cb6eb9a060e54bf8d69288fbee4904");
  } else {
    args.push_back(base);
  }
  args.push_back(target);
  auto r = run(args);
  if (!r.ok())
    throw AttributionFailed(fmt::format("git diff {}..{} failed: {}", base, target,
                                        util::trim(r.err)));
  return parse_unified_diff(r.out);
}

std::vector<std::string> Repository::parents_of(const std::string& commit) const {
  auto r = run({"rev-list", "--parents", "-n", "1", commit});
  if (!r.ok()) throw AttributionFailed("unknown commit " + commit);
  auto parts = util::split(util::trim(r.out), ' ');
  return {parts.begin() + 1, parts.end()};
}

std::vector<BlameLine> Repository::blame(const std::string& revision, const std::string& path,
                                         const std::vector<LineRange>& ranges) const {
  if (ranges.empty()) return {};
  std::vector<std::string> args = {"blame", "--line-porcelain"};
  for (const auto& r : ranges) args.push_back(fmt::format("-L{},{}", r.first, r.last));
  args.push_back(revision);
  args.push_back("--");
  args.push_back(path);
  auto r = run(args);
  if (!r.ok())
    throw AttributionFailed(fmt::format("git blame {} -- {} failed: {}", revision, path,
                                        util::trim(r.err)));
  return parse_line_porcelain(r.out);
}

std::vector<std::pair<std::string, std::uint64_t>> Repository::tree_blobs(
    const std::string& revision) const {
  auto r = run({"ls-tree", "-r", "-l", "-z", revision});
  if (!r.ok()) throw RepositoryUnreadable("git ls-tree failed in " + path_.string());
  std::vector<std::pair<std::string, std::uint64_t>> blobs;
  for (const auto& entry : util::split(r.out, '\0')) {
    // <mode> SP <type> SP <object> SP+ <size> TAB <path>
    size_t tab = entry.find('\t');
    if (tab == std::string::npos) continue;
    auto fields = util::split(util::normalize_spaces(entry.substr(0, tab)), ' ');
    if (fields.size() < 4 || fields[1] != "blob") continue;
    blobs.emplace_back(entry.substr(tab + 1), std::strtoull(fields[3].c_str(), nullptr, 10));
  }
  return blobs;
}

std::string Repository::head_commit() const {
  auto r = run({"rev-parse", "--verify", "-q", "HEAD^{commit}"});
  if (r.ok()) return util::trim(r.out);
  r = run({"for-each-ref", "--sort=-committerdate", "--count=1", "--format=%(objectname)"});
  if (r.ok() && !util::trim(r.out).empty()) return util::trim(r.out);
  throw RepositoryUnreadable("repository '" + path_.string() + "' has no commits");
}

}  // namespace wm::git
