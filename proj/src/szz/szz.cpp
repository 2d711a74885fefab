#include "wm/szz/szz.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/parallel.hpp"
#include "wm/util/text.hpp"

namespace wm::szz {

namespace {

// Consecutive line numbers collapse into one blame range.
std::vector<git::LineRange> to_ranges(const std::vector<std::uint32_t>& lines) {
  std::vector<git::LineRange> ranges;
  for (auto n : lines) {
    if (!ranges.empty() && ranges.back().last + 1 == n) ranges.back().last = n;
    else ranges.push_back({n, n});
  }
  return ranges;
}

std::vector<std::uint32_t> removed_lines(const ingest::FileChange& change) {
  std::vector<std::uint32_t> lines;
  for (const auto& h : change.hunks) {
    for (std::uint32_t k = 0; k < h.old_len; ++k) {
      if (k < h.deleted_line_texts.size() && util::trim(h.deleted_line_texts[k]).empty()) continue;
      lines.push_back(h.old_start + k);
    }
  }
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  return lines;
}

}  // namespace

std::string_view to_string(UntraceableReason reason) {
  switch (reason) {
    case UntraceableReason::pure_addition: return "pure_addition";
    case UntraceableReason::binary_only: return "binary_only";
    case UntraceableReason::attribution_failed: return "attribution_failed";
  }
  return "attribution_failed";
}

std::set<std::string> WccChain::hashes() const {
  std::set<std::string> out;
  for (const auto& w : wccs) out.insert(w.hash);
  return out;
}

bool is_ignored(std::string_view path, const TraceOptions& options) {
  const std::string lower = util::to_lower(path);
  for (const auto& ext : options.ignore_extensions)
    if (!ext.empty() && util::ends_with(lower, util::to_lower(ext))) return true;
  return false;
}

WccChain trace(const ingest::CommitRecord& wfc, const git::Repository& repo,
               const TraceOptions& options) {
  WccChain chain;
  chain.wfc_hash = wfc.hash;

  const std::string parent = wfc.parents.empty() ? std::string() : wfc.parents.front();
  if (parent.empty()) {
    chain.untraceable_reason = UntraceableReason::pure_addition;
    return chain;
  }

  std::vector<ingest::FileChange> changes;
  try {
    changes = repo.diff(parent, wfc.hash);
  } catch (const AttributionFailed& e) {
    chain.errors.push_back({"", e.what()});
    chain.untraceable_reason = UntraceableReason::attribution_failed;
    return chain;
  }

  std::map<std::string, Wcc> found;
  std::size_t considered = 0, binary = 0, with_removals = 0;
  for (const auto& change : changes) {
    if (is_ignored(change.path, options) || is_ignored(change.old_path, options)) continue;
    ++considered;
    if (change.binary) {
      ++binary;
      continue;
    }
    if (change.change_type == ingest::ChangeType::added) continue;
    auto lines = removed_lines(change);
    if (lines.empty()) continue;
    ++with_removals;

    std::vector<git::BlameLine> blamed;
    try {
      blamed = repo.blame(parent, change.old_path, to_ranges(lines));
    } catch (const AttributionFailed& e) {
      chain.errors.push_back({change.old_path, e.what()});
      continue;
    }
    for (const auto& b : blamed) {
      if (b.commit == wfc.hash || b.authored_at >= wfc.authored_at) continue;
      auto& w = found[b.commit];
      w.hash = b.commit;
      w.authored_at = b.authored_at;
      if (std::find(w.files.begin(), w.files.end(), b.source_path) == w.files.end())
        w.files.push_back(b.source_path);
    }
  }

  for (auto& [_, w] : found) {
    std::sort(w.files.begin(), w.files.end());
    chain.wccs.push_back(std::move(w));
  }
  std::sort(chain.wccs.begin(), chain.wccs.end(), [](const Wcc& a, const Wcc& b) {
    return a.authored_at != b.authored_at ? a.authored_at < b.authored_at : a.hash < b.hash;
  });
  chain.traced = !chain.wccs.empty();
  if (!chain.traced) {
    if (with_removals > 0) chain.untraceable_reason = UntraceableReason::attribution_failed;
    else if (considered > 0 && binary == considered) chain.untraceable_reason = UntraceableReason::binary_only;
    else chain.untraceable_reason = UntraceableReason::pure_addition;
  }
  return chain;
}

std::vector<WccChain> trace_all(const std::vector<ingest::CommitRecord>& wfcs,
                                const git::Repository& repo, std::size_t workers,
                                const TraceOptions& options) {
  if (workers < 1) throw InvalidArgument("trace_all needs at least one worker");
  return util::parallel_map<WccChain>(wfcs.size(), workers,
                                      [&](std::size_t i) { return trace(wfcs[i], repo, options); });
}

TraceSummary run_trace(const TraceRunOptions& options) {
  std::vector<util::Json> assigned;
  for (auto& a : util::read_jsonl(options.classify_dir + "/assignments.jsonl"))
    if (a.at("decision") == "assigned") assigned.push_back(std::move(a));

  std::vector<ingest::CommitRecord> commits;
  commits.reserve(assigned.size());
  for (const auto& a : assigned) commits.push_back(a.at("commit").get<ingest::CommitRecord>());

  auto chains = util::parallel_map<WccChain>(assigned.size(), options.jobs, [&](std::size_t i) {
    git::Repository repo(assigned[i].at("local_path").get<std::string>());
    return trace(commits[i], repo, options.trace);
  });

  TraceSummary summary;
  std::set<std::pair<std::string, std::string>> distinct;
  std::vector<util::Json> lines;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& c = chains[i];
    ++summary.wfcs;
    if (c.traced) ++summary.traced;
    if (c.untraceable_reason == UntraceableReason::pure_addition) ++summary.pure_addition;
    if (c.untraceable_reason == UntraceableReason::binary_only) ++summary.binary_only;
    if (c.untraceable_reason == UntraceableReason::attribution_failed) ++summary.attribution_failed;
    const auto project = assigned[i].at("project_id").get<std::string>();
    for (const auto& w : c.wccs) distinct.emplace(project, w.hash);
    lines.push_back({{"schema_version", kHistorySchemaVersion},
                     {"project_id", project},
                     {"local_path", assigned[i].at("local_path")},
                     {"cwe_id", assigned[i].at("cwe_id")},
                     {"commit", assigned[i].at("commit")},
                     {"chain", c}});
  }
  summary.wccs = distinct.size();
  util::write_jsonl(options.out_dir + "/chains.jsonl", lines);
  return summary;
}

void to_json(nlohmann::json& j, const Wcc& w) {
  j = {{"hash", w.hash}, {"authored_at", w.authored_at}, {"files", w.files}};
}

void from_json(const nlohmann::json& j, Wcc& w) {
  j.at("hash").get_to(w.hash);
  j.at("authored_at").get_to(w.authored_at);
  j.at("files").get_to(w.files);
}

void to_json(nlohmann::json& j, const WccChain& c) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : c.errors) errors.push_back({{"path", e.path}, {"message", e.message}});
  j = {{"wfc_hash", c.wfc_hash},
       {"wccs", c.wccs},
       {"traced", c.traced},
       {"untraceable_reason",
        c.untraceable_reason ? nlohmann::json(to_string(*c.untraceable_reason)) : nlohmann::json()},
       {"errors", errors}};
}

void from_json(const nlohmann::json& j, WccChain& c) {
  j.at("wfc_hash").get_to(c.wfc_hash);
  j.at("wccs").get_to(c.wccs);
  j.at("traced").get_to(c.traced);
  c.untraceable_reason.reset();
  const auto& r = j.at("untraceable_reason");
  if (!r.is_null()) {
    const auto s = r.get<std::string>();
    if (s == "pure_addition") c.untraceable_reason = UntraceableReason::pure_addition;
    else if (s == "binary_only") c.untraceable_reason = UntraceableReason::binary_only;
    else if (s == "attribution_failed") c.untraceable_reason = UntraceableReason::attribution_failed;
    else throw ArtifactMalformed("unknown untraceable reason '" + s + "'");
  }
  c.errors.clear();
  for (const auto& e : j.at("errors"))
    c.errors.push_back({e.at("path").get<std::string>(), e.at("message").get<std::string>()});
}

}  // namespace wm::szz
