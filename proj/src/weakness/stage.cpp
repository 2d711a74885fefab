#include <filesystem>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "wm/error.hpp"
#include "wm/ingest/ingest.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/weakness/weakness.hpp"

namespace wm::weakness {

namespace {

using util::Json;

struct ProjectData {
  std::vector<ingest::CommitRecord> history;
  std::unordered_map<std::string, std::size_t> by_hash;
  std::map<std::string, Timestamp> creation_times;
};

Json opt_time(const std::optional<Timestamp>& t) { return t ? Json(*t) : Json(); }

Json chain_json(const Weakness& w, const ProjectData& data, ExpMode mode) {
  if (!w.chain) return Json();
  Json wccs = Json::array();
  for (const auto& c : w.chain->wccs) {
    Json entry = c;
    auto it = data.by_hash.find(c.hash);
    if (it != data.by_hash.end()) {
      const auto& commit = data.history[it->second];
      entry["message"] = commit.message;
      entry["author_id"] = commit.author_id;
      entry["developer"] = developer_status(commit.author_id, c.authored_at, data.history, mode);
      Json types = Json::object();
      for (const auto& f : commit.changes) types[f.path] = f.change_type;
      entry["change_types"] = types;
    } else {
      spdlog::warn("WCC {} of {} is missing from the project history", c.hash, w.id);
      entry["message"] = Json();
      entry["author_id"] = Json();
      entry["developer"] = Json();
      entry["change_types"] = Json::object();
    }
    wccs.push_back(std::move(entry));
  }
  Json j = *w.chain;
  j["wccs"] = std::move(wccs);
  return j;
}

}  // namespace

WeaknessSummary run_weaknesses(const WeaknessOptions& options) {
  auto projects = ingest::read_projects(options.ingest_dir);
  std::map<std::string, ProjectData> data;
  std::map<std::string, std::size_t> commits_per_year;
  std::size_t total_commits = 0;
  Json project_rows = Json::array();
  for (const auto& entry : projects) {
    auto& d = data[entry.project.id];
    d.history = ingest::read_history(options.ingest_dir, entry.project.id);
    for (std::size_t i = 0; i < d.history.size(); ++i) {
      d.by_hash.emplace(d.history[i].hash, i);
      ++commits_per_year[std::to_string(utc_year(d.history[i].authored_at))];
    }
    d.creation_times = file_creation_times(d.history);
    total_commits += d.history.size();
    Json row = entry.project;
    row["stats"] = entry.stats;
    project_rows.push_back(std::move(row));
  }

  std::vector<WfcInput> inputs;
  std::set<std::pair<std::string, std::string>> distinct_wccs;
  for (const auto& rec : util::read_jsonl(options.trace_dir + "/chains.jsonl")) {
    WfcInput in;
    in.project_id = rec.at("project_id").get<std::string>();
    if (!data.count(in.project_id))
      throw ArtifactMalformed("chains.jsonl refers to unknown project '" + in.project_id + "'");
    in.fix = make_fix(rec.at("commit").get<ingest::CommitRecord>(), rec.at("cwe_id").get<std::string>());
    in.chain = rec.at("chain").get<szz::WccChain>();
    for (const auto& w : in.chain.wccs) distinct_wccs.emplace(in.project_id, w.hash);
    inputs.push_back(std::move(in));
  }

  auto weaknesses = deduplicate(inputs);

  WeaknessSummary summary;
  summary.wfcs = inputs.size();
  summary.weaknesses = weaknesses.size();
  for (const auto& w : weaknesses) {
    summary.merged_wfcs += w.fixes.size() - 1;
    if (!w.chain) ++summary.untraced;
    if (w.fixes.size() > 1) ++summary.multi_fix;
  }

  std::optional<std::size_t> security_commits;
  if (!options.filter_dir.empty()) {
    auto path = options.filter_dir + "/security_commits.jsonl";
    if (std::filesystem::exists(path)) security_commits = util::read_jsonl(path).size();
  }

  std::vector<Json> lines;
  lines.push_back({{"record", "meta"},
                   {"schema_version", kHistorySchemaVersion},
                   {"projects", project_rows},
                   {"commits_per_year", commits_per_year},
                   {"exp_mode", options.exp_mode == ExpMode::sum ? "sum" : "max"},
                   {"funnel",
                    {{"projects", projects.size()},
                     {"commits", total_commits},
                     {"security_commits", security_commits ? Json(*security_commits) : Json()},
                     {"wfcs", summary.wfcs},
                     {"wccs", distinct_wccs.size()},
                     {"weaknesses", summary.weaknesses},
                     {"merged_wfcs", summary.merged_wfcs},
                     {"untraced", summary.untraced}}}});

  for (const auto& w : weaknesses) {
    const auto& d = data.at(w.project_id);
    Json developer;
    if (w.chain) {
      const auto& first = w.chain->wccs.front();
      if (auto it = d.by_hash.find(first.hash); it != d.by_hash.end())
        developer = developer_status(d.history[it->second].author_id, first.authored_at, d.history,
                                     options.exp_mode);
    }
    lines.push_back(
        {{"record", "weakness"},
         {"schema_version", kHistorySchemaVersion},
         {"id", w.id},
         {"project_id", w.project_id},
         {"cwe_id", w.cwe_id},
         {"fixes", w.fixes},
         {"chain", chain_json(w, d, options.exp_mode)},
         {"untraced_reason", w.untraced_reason ? Json(szz::to_string(*w.untraced_reason)) : Json()},
         {"t0", opt_time(w.t0)},
         {"t1", opt_time(w.t1)},
         {"t2", w.t2},
         {"t3", w.t3},
         {"windows", lifecycle(w)},
         {"files", w.files},
         {"introduction_phase", to_string(introduction_phase(w, d.creation_times))},
         {"developer", developer}});
  }
  util::write_jsonl(options.out_dir + "/weaknesses.jsonl", lines);
  return summary;
}

}  // namespace wm::weakness
