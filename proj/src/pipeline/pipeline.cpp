#include "wm/pipeline/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wm/analytics/report.hpp"
#include "wm/cwe/catalog.hpp"
#include "wm/error.hpp"
#include "wm/ingest/ingest.hpp"
#include "wm/secfilter/secfilter.hpp"
#include "wm/semvec/provider.hpp"
#include "wm/szz/szz.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/text.hpp"
#include "wm/weakness/weakness.hpp"
#include "wm/wfc/wfc.hpp"

namespace wm::pipeline {

namespace fs = std::filesystem;
using util::Json;

namespace {

constexpr const char* kMarker = ".done";

using Key = std::pair<std::string, std::string>;  // (project, commit)

std::vector<Json> read_if_exists(const std::string& path) {
  if (!fs::exists(path)) return {};
  return util::read_jsonl(path);
}

void clear_stage(const std::string& dir) {
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename() != "repos") fs::remove_all(entry.path());
}

Json run_ingest_stage(const PipelineConfig& c, const StagePaths& paths) {
  const auto& out = paths.ingest;
  auto manifest = ingest::parse_manifest(util::read_file(c.manifest));
  auto s = ingest::run_ingest(manifest, {.out_dir = out,
                                         .min_commits = c.min_commits,
                                         .jobs = c.jobs,
                                         .count_merges = c.count_merges});
  return {{"candidates", s.candidates},
          {"selected", s.selected},
          {"inaccessible", s.inaccessible},
          {"too_few_commits", s.too_few_commits},
          {"skipped_unreadable", s.skipped_unreadable},
          {"commits", s.commits},
          {"count_merges", c.count_merges},
          {"min_commits", c.min_commits}};
}

Json run_filter_stage(const PipelineConfig& c, const StagePaths& paths) {
  secfilter::FilterOptions o;
  o.ingest_dir = paths.ingest;
  o.out_dir = paths.filter;
  o.lexicon = c.lexicon.empty() ? secfilter::KeywordLexicon{} : secfilter::load_lexicon(c.lexicon);
  o.classifier_cmd = c.classifier_cmd;
  o.threshold = c.threshold;
  auto s = secfilter::run_filter(o);
  return {{"commits", s.commits},
          {"keyword_matches", s.keyword_matches},
          {"classifier_positives", s.classifier_positives},
          {"security_commits", s.security_commits},
          {"classifier_configured", c.classifier_cmd.has_value()},
          {"degraded", s.degraded},
          {"degraded_reason", s.degraded_reason},
          {"threshold", c.threshold}};
}

Json run_classify_stage(const PipelineConfig& c, const StagePaths& paths) {
  auto stopwords = cwe::load_stopwords(c.stopwords);
  auto catalog = cwe::load_catalog(c.catalog, stopwords);
  auto table = semvec::to_word_table(semvec::load_exchange(c.word_vectors));

  std::vector<std::unique_ptr<semvec::EmbeddingProvider>> owned;
  owned.push_back(std::make_unique<semvec::TfidfProvider>("tfidf-word2vec", catalog, stopwords,
                                                          std::move(table), c.log_base));
  for (const auto& path : c.exchange) owned.push_back(semvec::load_exchange_file(path));
  std::vector<const semvec::EmbeddingProvider*> providers;
  Json provider_ids = Json::array();
  for (const auto& p : owned) {
    providers.push_back(p.get());
    provider_ids.push_back(p->id());
  }

  wfc::Classifier classifier(catalog, providers, c.vote_k);
  auto s = wfc::run_classify(classifier, {.filter_dir = paths.filter,
                                          .out_dir = paths.classify,
                                          .jobs = c.jobs});
  return {{"security_commits", s.security_commits},
          {"assigned", s.assigned},
          {"needs_review", s.needs_review},
          {"rejected", s.rejected},
          {"providers", provider_ids},
          {"vote_k", c.vote_k},
          {"catalog_size", catalog.size()},
          {"catalog_snapshot", catalog.snapshot()},
          {"catalog_warnings", catalog.warnings()},
          {"tf_denominator", "category_token_count"},
          {"idf_log_base", c.log_base == semvec::LogBase::log10 ? 10 : 2}};
}

Json run_trace_stage(const PipelineConfig& c, const StagePaths& paths) {
  szz::TraceRunOptions o;
  o.classify_dir = paths.classify;
  o.out_dir = paths.trace;
  o.jobs = c.jobs;
  o.trace.ignore_extensions = c.ignore_ext;
  auto s = szz::run_trace(o);
  return {{"wfcs", s.wfcs},
          {"traced", s.traced},
          {"pure_addition", s.pure_addition},
          {"binary_only", s.binary_only},
          {"attribution_failed", s.attribution_failed},
          {"wccs", s.wccs}};
}

Json run_weaknesses_stage(const PipelineConfig& c, const StagePaths& paths) {
  weakness::WeaknessOptions o;
  o.ingest_dir = paths.ingest;
  o.filter_dir = paths.filter;
  o.trace_dir = paths.trace;
  o.out_dir = paths.weaknesses;
  o.exp_mode = c.exp_mode;
  auto s = weakness::run_weaknesses(o);
  return {{"wfcs", s.wfcs},
          {"weaknesses", s.weaknesses},
          {"merged_wfcs", s.merged_wfcs},
          {"untraced", s.untraced},
          {"multi_fix", s.multi_fix}};
}

Json run_report_stage(const PipelineConfig& c, const StagePaths& paths) {
  // Accepts the weaknesses stage directory or the file itself.
  const auto input = fs::is_regular_file(paths.weaknesses) ? paths.weaknesses
                                                           : paths.weaknesses + "/weaknesses.jsonl";
  auto file = analytics::load_weakness_file(input);
  analytics::ReportOptions o;
  o.group_by = c.group_by;
  o.year_key = c.year_key;
  if (!c.libraries.empty()) o.libraries = analytics::parse_libraries(util::read_file(c.libraries));
  if (!c.goals.empty()) o.goals = analytics::parse_goal_lexicon(util::read_file(c.goals));
  auto bundle = analytics::build_report(file, o);
  analytics::write_report(bundle, paths.report);
  bool ok = true;
  for (const auto& check : bundle.checks) ok = ok && check.ok;
  return {{"weaknesses", file.weaknesses.size()}, {"conservation_ok", ok}};
}

}  // namespace

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::ingest,   Stage::filter,     Stage::classify,
                                            Stage::trace,    Stage::weaknesses, Stage::report};
  return stages;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::filter: return "filter";
    case Stage::classify: return "classify";
    case Stage::trace: return "trace";
    case Stage::weaknesses: return "weaknesses";
    case Stage::report: return "report";
  }
  return "ingest";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (auto s : all_stages())
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string stage_dir(const std::string& workspace, Stage stage) {
  const auto index = static_cast<int>(stage) + 1;
  return fmt::format("{}/{:02d}_{}", workspace, index, to_string(stage));
}

Funnel compute_funnel(const std::string& workspace) {
  Funnel f;
  const auto ingest_dir = stage_dir(workspace, Stage::ingest);
  if (fs::exists(ingest_dir + "/projects.jsonl")) {
    auto projects = ingest::read_projects(ingest_dir);
    f.projects = projects.size();
    for (const auto& p : projects) f.commits += ingest::read_history(ingest_dir, p.project.id).size();
  }
  f.security_commits =
      read_if_exists(stage_dir(workspace, Stage::filter) + "/security_commits.jsonl").size();
  for (const auto& a : read_if_exists(stage_dir(workspace, Stage::classify) + "/assignments.jsonl"))
    if (a.at("decision") == "assigned") ++f.wfcs;
  std::set<Key> wccs;
  for (const auto& c : read_if_exists(stage_dir(workspace, Stage::trace) + "/chains.jsonl"))
    for (const auto& w : c.at("chain").at("wccs"))
      wccs.emplace(c.at("project_id").get<std::string>(), w.at("hash").get<std::string>());
  f.wccs = wccs.size();
  auto weaknesses = read_if_exists(stage_dir(workspace, Stage::weaknesses) + "/weaknesses.jsonl");
  f.weaknesses = weaknesses.empty() ? 0 : weaknesses.size() - 1;
  return f;
}

Json to_json(const Funnel& f) {
  return {{"projects", f.projects},   {"commits", f.commits}, {"security_commits", f.security_commits},
          {"wfcs", f.wfcs},           {"wccs", f.wccs},       {"weaknesses", f.weaknesses}};
}

StagePaths StagePaths::for_workspace(const std::string& workspace) {
  return {stage_dir(workspace, Stage::ingest),     stage_dir(workspace, Stage::filter),
          stage_dir(workspace, Stage::classify),   stage_dir(workspace, Stage::trace),
          stage_dir(workspace, Stage::weaknesses), stage_dir(workspace, Stage::report)};
}

const std::string& StagePaths::at(Stage stage) const {
  switch (stage) {
    case Stage::ingest: return ingest;
    case Stage::filter: return filter;
    case Stage::classify: return classify;
    case Stage::trace: return trace;
    case Stage::weaknesses: return weaknesses;
    case Stage::report: return report;
  }
  return ingest;
}

void validate_stage(const PipelineConfig& c, Stage stage) {
  auto require_file = [](const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigInvalid(key + " is not set");
    if (!fs::is_regular_file(path)) throw ConfigInvalid(fmt::format("{} '{}' does not exist", key, path));
  };
  auto optional_file = [&](const std::string& key, const std::string& path) {
    if (!path.empty()) require_file(key, path);
  };
  if (c.jobs < 1) throw ConfigInvalid("jobs must be at least 1");
  switch (stage) {
    case Stage::ingest:
      require_file("manifest", c.manifest);
      if (c.min_commits < 1) throw ConfigInvalid("min_commits must be at least 1");
      break;
    case Stage::filter:
      optional_file("lexicon", c.lexicon);
      if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw ConfigInvalid("threshold must lie in [0, 1]");
      break;
    case Stage::classify: {
      require_file("catalog", c.catalog);
      require_file("stopwords", c.stopwords);
      require_file("word_vectors", c.word_vectors);
      for (const auto& e : c.exchange) require_file("exchange", e);
      const int providers = 1 + static_cast<int>(c.exchange.size());
      if (providers > kMaxProviders)
        throw ConfigInvalid(fmt::format("at most {} exchange files are supported", kMaxProviders - 1));
      if (c.vote_k < 1 || c.vote_k > providers)
        throw ConfigInvalid(fmt::format("vote_k {} outside [1, {}]", c.vote_k, providers));
      break;
    }
    case Stage::trace:
    case Stage::weaknesses: break;
    case Stage::report:
      optional_file("libraries", c.libraries);
      optional_file("goals", c.goals);
      break;
  }
}

Json run_stage(Stage stage, const PipelineConfig& config) {
  return run_stage(stage, config, StagePaths::for_workspace(config.workspace));
}

Json run_stage(Stage stage, const PipelineConfig& config, const StagePaths& paths) {
  try {
    fs::create_directories(paths.at(stage));
    switch (stage) {
      case Stage::ingest: return run_ingest_stage(config, paths);
      case Stage::filter: return run_filter_stage(config, paths);
      case Stage::classify: return run_classify_stage(config, paths);
      case Stage::trace: return run_trace_stage(config, paths);
      case Stage::weaknesses: return run_weaknesses_stage(config, paths);
      case Stage::report: return run_report_stage(config, paths);
    }
  } catch (const StageFailed&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailed(std::string(to_string(stage)), e.what());
  }
  return {};
}

PipelineSummary run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  validate(config);
  fs::create_directories(config.workspace);

  PipelineSummary summary;
  bool reuse = options.resume;
  for (auto stage : all_stages()) {
    const auto dir = stage_dir(config.workspace, stage);
    const auto marker = dir + "/" + kMarker;
    const auto name = std::string(to_string(stage));
    if (reuse && fs::exists(marker)) {
      spdlog::info("stage {}: complete, skipping", name);
      summary.stages[name] = Json::parse(util::read_file(marker));
      summary.skipped.push_back(stage);
    } else {
      reuse = false;
      spdlog::info("stage {}: running", name);
      clear_stage(dir);
      auto stage_summary = run_stage(stage, config);
      util::write_file_atomic(marker, stage_summary.dump() + "\n");
      summary.stages[name] = std::move(stage_summary);
      summary.ran.push_back(stage);
    }
    if (options.stop_after && *options.stop_after == stage) break;
  }

  summary.funnel = compute_funnel(config.workspace);
  Json out = {{"schema_version", kHistorySchemaVersion},
              {"funnel", to_json(summary.funnel)},
              {"stages", summary.stages}};
  util::write_file_atomic(config.workspace + "/summary.json", out.dump(2) + "\n");
  return summary;
}

bool AuditReport::ok() const {
  for (const auto& c : checks)
    if (!c.ok) return false;
  return !checks.empty();
}

AuditReport audit(const std::string& workspace) {
  AuditReport report;
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  auto missing = [&](const std::string& path) {
    if (fs::exists(path)) return false;
    add("artifact:" + fs::path(path).filename().string(), false, "missing " + path);
    return true;
  };

  const auto ingest_dir = stage_dir(workspace, Stage::ingest);
  const auto sc_path = stage_dir(workspace, Stage::filter) + "/security_commits.jsonl";
  const auto assign_path = stage_dir(workspace, Stage::classify) + "/assignments.jsonl";
  const auto chains_path = stage_dir(workspace, Stage::trace) + "/chains.jsonl";
  const auto weak_path = stage_dir(workspace, Stage::weaknesses) + "/weaknesses.jsonl";
  bool absent = false;
  for (const auto& p : {ingest_dir + "/projects.jsonl", sc_path, assign_path, chains_path, weak_path})
    absent = missing(p) || absent;
  if (absent) return report;

  try {
    std::set<Key> all;
    for (const auto& p : ingest::read_projects(ingest_dir))
      for (const auto& c : ingest::read_history(ingest_dir, p.project.id)) all.emplace(p.project.id, c.hash);

    std::set<Key> sc;
    for (const auto& r : util::read_jsonl(sc_path))
      sc.emplace(r.at("project_id").get<std::string>(), r.at("commit").at("hash").get<std::string>());
    std::size_t outside = 0;
    for (const auto& k : sc) outside += all.count(k) ? 0 : 1;
    add("sc_subset_of_commits", outside == 0,
        fmt::format("{} security commits, {} not in any history", sc.size(), outside));

    std::set<Key> wfc;
    std::size_t assessed_outside = 0;
    for (const auto& r : util::read_jsonl(assign_path)) {
      Key k{r.at("project_id").get<std::string>(), r.at("commit_hash").get<std::string>()};
      if (!sc.count(k)) ++assessed_outside;
      if (r.at("decision") == "assigned") wfc.insert(k);
    }
    outside = 0;
    for (const auto& k : wfc) outside += sc.count(k) ? 0 : 1;
    add("wfc_subset_of_sc", outside == 0 && assessed_outside == 0,
        fmt::format("{} WFCs, {} classified commits outside the security set", wfc.size(),
                    assessed_outside));

    std::set<Key> chained;
    std::size_t temporal = 0;
    for (const auto& r : util::read_jsonl(chains_path)) {
      const auto project = r.at("project_id").get<std::string>();
      const auto& commit = r.at("commit");
      chained.emplace(project, commit.at("hash").get<std::string>());
      const auto at = commit.at("authored_at").get<Timestamp>();
      for (const auto& w : r.at("chain").at("wccs"))
        if (w.at("authored_at").get<Timestamp>() >= at || w.at("hash") == commit.at("hash")) ++temporal;
    }
    add("chains_match_wfcs", chained == wfc,
        fmt::format("{} chains for {} WFCs", chained.size(), wfc.size()));
    add("wcc_precede_fix", temporal == 0, fmt::format("{} WCCs not strictly before their fix", temporal));

    auto records = util::read_jsonl(weak_path);
    std::size_t weaknesses = 0, fixes = 0, foreign = 0, identity = 0;
    std::set<Key> fix_keys;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& w = records[i];
      ++weaknesses;
      const auto project = w.at("project_id").get<std::string>();
      for (const auto& f : w.at("fixes")) {
        ++fixes;
        Key k{project, f.at("hash").get<std::string>()};
        fix_keys.insert(k);
        if (!wfc.count(k)) ++foreign;
      }
      const auto& win = w.at("windows");
      const double t23 = win.at("t23").get<double>();
      bool ok = t23 >= 0.0;
      if (!win.at("t13").is_null()) {
        const double t01 = win.at("t01").get<double>(), t12 = win.at("t12").get<double>(),
                     t13 = win.at("t13").get<double>();
        ok = ok && t01 >= 0.0 && t12 >= 0.0 && t13 >= 0.0 && std::abs(t13 - (t12 + t23)) <= 1e-9;
      }
      if (w.at("fixes").size() == 1) ok = ok && t23 == 0.0;
      if (!ok) ++identity;
    }
    add("fixes_subset_of_wfc", foreign == 0, fmt::format("{} fixes, {} not a WFC", fixes, foreign));
    add("dedup_conservation", fixes == wfc.size() && fix_keys.size() == fixes,
        fmt::format("{} weaknesses + {} merged = {} of {} WFCs", weaknesses, fixes - weaknesses,
                    fixes, wfc.size()));
    add("lifecycle_identities", identity == 0,
        fmt::format("{} weaknesses violate the window identities", identity));
  } catch (const std::exception& e) {
    add("artifacts_readable", false, e.what());
  }
  return report;
}

}  // namespace wm::pipeline
