#include "wm/weakness/weakness.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "wm/error.hpp"

namespace wm::weakness {

namespace {

bool fix_before(const Fix& a, const Fix& b) {
  return a.authored_at != b.authored_at ? a.authored_at < b.authored_at : a.hash < b.hash;
}

bool canonical_before(const Weakness& a, const Weakness& b) {
  if (a.project_id != b.project_id) return a.project_id < b.project_id;
  if (a.t2 != b.t2) return a.t2 < b.t2;
  return a.id < b.id;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

Weakness merge_group(const std::vector<const Weakness*>& members) {
  Weakness merged;
  merged.project_id = members.front()->project_id;
  for (const auto* m : members) merged.fixes.insert(merged.fixes.end(), m->fixes.begin(), m->fixes.end());
  std::sort(merged.fixes.begin(), merged.fixes.end(), fix_before);
  merged.fixes.erase(std::unique(merged.fixes.begin(), merged.fixes.end(),
                                 [](const Fix& a, const Fix& b) { return a.hash == b.hash; }),
                     merged.fixes.end());
  const std::string& latest = merged.fixes.back().hash;
  for (const auto* m : members) {
    if (m->fixes.back().hash == latest) {
      merged.chain = m->chain;
      merged.untraced_reason = m->untraced_reason;
    }
  }
  refresh(merged);
  return merged;
}

}  // namespace

Fix make_fix(const ingest::CommitRecord& commit, std::string cwe_id) {
  Fix f;
  f.hash = commit.hash;
  f.authored_at = commit.authored_at;
  f.cwe_id = std::move(cwe_id);
  for (const auto& c : commit.changes) {
    f.files.push_back(c.path);
    f.lines_added += c.lines_added;
    f.lines_deleted += c.lines_deleted;
  }
  std::sort(f.files.begin(), f.files.end());
  f.files.erase(std::unique(f.files.begin(), f.files.end()), f.files.end());
  return f;
}

Weakness make_singleton(const WfcInput& input) {
  Weakness w;
  w.project_id = input.project_id;
  w.fixes = {input.fix};
  if (input.chain.traced && !input.chain.wccs.empty()) {
    w.chain = input.chain;
  } else {
    w.untraced_reason = input.chain.untraceable_reason.value_or(szz::UntraceableReason::attribution_failed);
  }
  refresh(w);
  return w;
}

void refresh(Weakness& w) {
  if (w.fixes.empty()) throw InvalidArgument("weakness without fixes");
  std::sort(w.fixes.begin(), w.fixes.end(), fix_before);
  w.id = w.project_id + ":" + w.fixes.back().hash;
  w.cwe_id = w.fixes.back().cwe_id;
  w.t2 = w.fixes.front().authored_at;
  w.t3 = w.fixes.back().authored_at;
  w.t0.reset();
  w.t1.reset();
  w.files.clear();
  for (const auto& f : w.fixes) w.files.insert(f.files.begin(), f.files.end());
  if (w.chain && w.chain->wccs.empty()) {
    w.untraced_reason = w.chain->untraceable_reason.value_or(szz::UntraceableReason::attribution_failed);
    w.chain.reset();
  }
  if (!w.chain) return;

  w.untraced_reason.reset();
  const auto& wccs = w.chain->wccs;
  w.t0 = wccs.front().authored_at;
  w.t1 = w.t0;
  for (const auto& c : wccs) {
    if (c.authored_at <= w.t2) w.t1 = std::max(*w.t1, c.authored_at);
    w.files.insert(c.files.begin(), c.files.end());
  }
}

bool mergeable(const Weakness& a, const Weakness& b) {
  if (a.project_id != b.project_id || !a.chain || !b.chain) return false;
  if (a.chain->wccs.front().hash != b.chain->wccs.front().hash) return false;
  const auto sa = a.chain->hashes();
  const auto sb = b.chain->hashes();
  return std::includes(sa.begin(), sa.end(), sb.begin(), sb.end()) ||
         std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
}

std::vector<Weakness> merge_weaknesses(std::vector<Weakness> weaknesses) {
  std::sort(weaknesses.begin(), weaknesses.end(), canonical_before);
  for (;;) {
    const std::size_t n = weaknesses.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n && weaknesses[j].project_id == weaknesses[i].project_id; ++j) {
        if (!mergeable(weaknesses[i], weaknesses[j])) continue;
        auto ri = find_root(parent, i), rj = find_root(parent, j);
        if (ri != rj) {
          parent[std::max(ri, rj)] = std::min(ri, rj);
          changed = true;
        }
      }
    }
    if (!changed) return weaknesses;

    std::map<std::size_t, std::vector<const Weakness*>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find_root(parent, i)].push_back(&weaknesses[i]);
    std::vector<Weakness> next;
    next.reserve(groups.size());
    for (const auto& [_, members] : groups)
      next.push_back(members.size() == 1 ? *members.front() : merge_group(members));
    std::sort(next.begin(), next.end(), canonical_before);
    weaknesses = std::move(next);
  }
}

std::vector<Weakness> deduplicate(const std::vector<WfcInput>& inputs) {
  std::vector<Weakness> singletons;
  singletons.reserve(inputs.size());
  for (const auto& in : inputs) singletons.push_back(make_singleton(in));
  return merge_weaknesses(std::move(singletons));
}

LifecycleWindows lifecycle(const Weakness& w) {
  auto days = [](Timestamp from, Timestamp to) {
    return static_cast<double>(to - from) / kSecondsPerDay;
  };
  LifecycleWindows out;
  out.t23 = days(w.t2, w.t3);
  if (w.t0 && w.t1) {
    out.t01 = days(*w.t0, *w.t1);
    out.t12 = days(*w.t1, w.t2);
    out.t13 = days(*w.t1, w.t3);
  }
  return out;
}

Level workload_level(double ratio) {
  if (ratio < 0.25) return Level::low;
  if (ratio <= 0.75) return Level::medium;
  return Level::high;
}

ExpLevel experience_level(double ratio) {
  if (ratio < 0.25) return ExpLevel::newcomer;
  if (ratio <= 0.75) return ExpLevel::medium;
  return ExpLevel::expert;
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::low: return "low";
    case Level::medium: return "medium";
    case Level::high: return "high";
  }
  return "low";
}

std::string_view to_string(ExpLevel level) {
  switch (level) {
    case ExpLevel::newcomer: return "newcomer";
    case ExpLevel::medium: return "medium";
    case ExpLevel::expert: return "expert";
  }
  return "newcomer";
}

Workload workload(std::string_view author, Timestamp at,
                  const std::vector<ingest::CommitRecord>& history) {
  const Timestamp from = at - static_cast<Timestamp>(kWorkloadWindowDays * kSecondsPerDay);
  auto it = std::lower_bound(history.begin(), history.end(), from,
                             [](const ingest::CommitRecord& c, Timestamp t) { return c.authored_at < t; });
  std::uint64_t commits = 0, mine = 0, lines = 0, my_lines = 0;
  for (; it != history.end() && it->authored_at <= at; ++it) {
    const auto changed = it->lines_changed();
    ++commits;
    lines += changed;
    if (it->author_id == author) {
      ++mine;
      my_lines += changed;
    }
  }
  Workload w;
  w.no_commits = commits == 0;
  w.no_lines = lines == 0;
  w.wl_commit = commits ? static_cast<double>(mine) / static_cast<double>(commits) : 0.0;
  w.wl_code = lines ? static_cast<double>(my_lines) / static_cast<double>(lines) : 0.0;
  return w;
}

double experience(std::string_view author, Timestamp at,
                  const std::vector<ingest::CommitRecord>& history, ExpMode mode) {
  struct Span {
    Timestamp first = 0;
    Timestamp last = 0;
  };
  std::unordered_map<std::string, Span> spans;
  for (const auto& c : history) {
    if (c.authored_at > at) continue;
    auto [it, fresh] = spans.try_emplace(c.author_id, Span{c.authored_at, c.authored_at});
    if (!fresh) {
      it->second.first = std::min(it->second.first, c.authored_at);
      it->second.last = std::max(it->second.last, c.authored_at);
    }
  }
  auto self = spans.find(std::string(author));
  if (self == spans.end())
    throw UnknownAuthor(fmt::format("author '{}' has no commit at or before {}", author, at));

  double denominator = 0.0;
  for (const auto& [_, s] : spans) {
    const double tenure = static_cast<double>(s.last - s.first);
    denominator = mode == ExpMode::sum ? denominator + tenure : std::max(denominator, tenure);
  }
  const double numerator = static_cast<double>(at - self->second.first);
  if (denominator <= 0.0) return 0.0;
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

DeveloperStatus developer_status(std::string_view author, Timestamp at,
                                 const std::vector<ingest::CommitRecord>& history, ExpMode mode) {
  DeveloperStatus d;
  d.author_id = std::string(author);
  auto wl = workload(author, at, history);
  d.wl_commit = wl.wl_commit;
  d.wl_commit_level = workload_level(wl.wl_commit);
  d.wl_code = wl.wl_code;
  d.wl_code_level = workload_level(wl.wl_code);
  d.exp = experience(author, at, history, mode);
  d.exp_level = experience_level(d.exp);
  return d;
}

std::string_view to_string(IntroductionPhase phase) {
  switch (phase) {
    case IntroductionPhase::creation: return "creation";
    case IntroductionPhase::maintenance: return "maintenance";
    case IntroductionPhase::both: return "both";
    case IntroductionPhase::unknown: return "unknown";
  }
  return "unknown";
}

std::map<std::string, Timestamp> file_creation_times(
    const std::vector<ingest::CommitRecord>& history) {
  std::map<std::string, Timestamp> created;
  for (const auto& c : history) {
    for (const auto& f : c.changes) {
      if (f.change_type == ingest::ChangeType::added) {
        created.try_emplace(f.path, c.authored_at);
      } else if (f.change_type == ingest::ChangeType::renamed) {
        if (auto it = created.find(f.old_path); it != created.end())
          created.try_emplace(f.path, it->second);
      }
    }
  }
  return created;
}

IntroductionPhase introduction_phase(const Weakness& w,
                                     const std::map<std::string, Timestamp>& creation_times) {
  if (!w.chain || w.chain->wccs.empty()) return IntroductionPhase::unknown;
  const auto& first = w.chain->wccs.front();
  if (first.files.empty()) return IntroductionPhase::unknown;
  std::size_t created = 0;
  for (const auto& path : first.files) {
    auto it = creation_times.find(path);
    if (it == creation_times.end()) return IntroductionPhase::unknown;
    if (it->second == first.authored_at) ++created;
  }
  if (created == first.files.size()) return IntroductionPhase::creation;
  if (created == 0) return IntroductionPhase::maintenance;
  return IntroductionPhase::both;
}

void to_json(nlohmann::json& j, const Fix& f) {
  j = {{"hash", f.hash},
       {"authored_at", f.authored_at},
       {"cwe_id", f.cwe_id},
       {"files", f.files},
       {"lines_added", f.lines_added},
       {"lines_deleted", f.lines_deleted}};
}

void from_json(const nlohmann::json& j, Fix& f) {
  j.at("hash").get_to(f.hash);
  j.at("authored_at").get_to(f.authored_at);
  j.at("cwe_id").get_to(f.cwe_id);
  j.at("files").get_to(f.files);
  j.at("lines_added").get_to(f.lines_added);
  j.at("lines_deleted").get_to(f.lines_deleted);
}

void to_json(nlohmann::json& j, const LifecycleWindows& w) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  j = {{"t01", opt(w.t01)}, {"t12", opt(w.t12)}, {"t23", w.t23}, {"t13", opt(w.t13)}};
}

void to_json(nlohmann::json& j, const DeveloperStatus& d) {
  j = {{"author_id", d.author_id},
       {"wl_commit", d.wl_commit},
       {"wl_commit_level", to_string(d.wl_commit_level)},
       {"wl_code", d.wl_code},
       {"wl_code_level", to_string(d.wl_code_level)},
       {"exp", d.exp},
       {"exp_level", to_string(d.exp_level)}};
}

}  // namespace wm::weakness
