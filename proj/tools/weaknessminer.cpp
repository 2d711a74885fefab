#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wm/error.hpp"
#include "wm/pipeline/config.hpp"
#include "wm/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wm;
using pipeline::Stage;

namespace {

enum Exit { kOk = 0, kValidation = 2, kStageFailure = 3, kAuditFailure = 4 };

// Flags shared by the stage subcommands. Every flag overrides the value the
// config file (if any) provides.
struct StageFlags {
  std::string config;
  std::string in;
  std::string out;
  std::optional<std::size_t> jobs;

  // ingest
  std::string manifest;
  std::optional<std::size_t> min_commits;
  bool no_merges = false;
  // filter
  std::string lexicon;
  std::optional<std::string> classifier_cmd;
  std::optional<double> threshold;
  // classify
  std::string catalog, stopwords, word_vectors;
  std::vector<std::string> exchange;
  std::optional<int> vote_k;
  std::optional<int> log_base;
  // trace
  std::vector<std::string> ignore_ext;
  // weaknesses
  std::string ingest_dir, filter_dir;
  std::string exp_mode;
  // report
  std::string weaknesses;
  std::string group_by, year_key, libraries, goals;
};

pipeline::PipelineConfig base_config(const std::string& path) {
  if (path.empty()) return {};
  return pipeline::load_config(path, pipeline::wm_environment());
}

pipeline::PipelineConfig apply(pipeline::PipelineConfig c, const StageFlags& f) {
  auto abs = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.manifest.empty()) c.manifest = abs(f.manifest);
  if (f.min_commits) c.min_commits = *f.min_commits;
  if (f.no_merges) c.count_merges = false;
  if (!f.lexicon.empty()) c.lexicon = abs(f.lexicon);
  if (f.classifier_cmd) c.classifier_cmd = *f.classifier_cmd;
  if (f.threshold) c.threshold = *f.threshold;
  if (!f.catalog.empty()) c.catalog = abs(f.catalog);
  if (!f.stopwords.empty()) c.stopwords = abs(f.stopwords);
  if (!f.word_vectors.empty()) c.word_vectors = abs(f.word_vectors);
  if (!f.exchange.empty()) {
    c.exchange.clear();
    for (const auto& e : f.exchange) c.exchange.push_back(abs(e));
  }
  if (f.vote_k) c.vote_k = *f.vote_k;
  if (f.log_base) c.log_base = *f.log_base == 2 ? semvec::LogBase::log2 : semvec::LogBase::log10;
  if (!f.ignore_ext.empty()) c.ignore_ext = f.ignore_ext;
  if (f.exp_mode == "max") c.exp_mode = weakness::ExpMode::max;
  if (f.exp_mode == "sum") c.exp_mode = weakness::ExpMode::sum;
  if (f.group_by == "category") c.group_by = analytics::GroupBy::category;
  if (f.group_by == "cwe") c.group_by = analytics::GroupBy::cwe;
  if (f.year_key == "t1") c.year_key = analytics::YearKey::t1;
  if (f.year_key == "t2") c.year_key = analytics::YearKey::t2;
  if (!f.libraries.empty()) c.libraries = abs(f.libraries);
  if (!f.goals.empty()) c.goals = abs(f.goals);
  return c;
}

// Directories come from the config workspace; --in/--out (and the extra
// inputs of the weaknesses and report stages) replace them.
pipeline::StagePaths resolve_paths(Stage stage, const pipeline::PipelineConfig& c, const StageFlags& f) {
  pipeline::StagePaths paths;
  if (!c.workspace.empty()) paths = pipeline::StagePaths::for_workspace(c.workspace);
  const auto& stages = pipeline::all_stages();
  const auto index = static_cast<std::size_t>(stage);
  auto slot = [&](Stage s) -> std::string& {
    switch (s) {
      case Stage::ingest: return paths.ingest;
      case Stage::filter: return paths.filter;
      case Stage::classify: return paths.classify;
      case Stage::trace: return paths.trace;
      case Stage::weaknesses: return paths.weaknesses;
      case Stage::report: return paths.report;
    }
    return paths.ingest;
  };
  if (!f.in.empty() && index > 0) slot(stages[index - 1]) = f.in;
  if (!f.out.empty()) slot(stage) = f.out;
  if (!f.ingest_dir.empty()) paths.ingest = f.ingest_dir;
  if (!f.filter_dir.empty()) paths.filter = f.filter_dir;
  if (!f.weaknesses.empty()) paths.weaknesses = f.weaknesses;

  if (paths.at(stage).empty()) throw ConfigInvalid("--out (or a config with a workspace) is required");
  if (index > 0 && slot(stages[index - 1]).empty())
    throw ConfigInvalid("input directory missing: pass --in or --config");
  if (stage == Stage::weaknesses && paths.ingest.empty())
    throw ConfigInvalid("weaknesses needs the ingest directory: pass --ingest or --config");
  return paths;
}

void add_stage_flags(CLI::App* cmd, Stage stage, StageFlags& f) {
  cmd->add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  if (stage != Stage::ingest && stage != Stage::report)
    cmd->add_option("--in", f.in, "Previous stage's output directory");
  switch (stage) {
    case Stage::ingest:
      cmd->add_option("--manifest", f.manifest, "Project manifest");
      cmd->add_option("--min-commits", f.min_commits, "Minimum history length");
      cmd->add_flag("--no-merges", f.no_merges, "Exclude merge commits from the count");
      break;
    case Stage::filter:
      cmd->add_option("--lexicon", f.lexicon, "Keyword lexicon");
      cmd->add_option("--classifier-cmd", f.classifier_cmd, "External code-level classifier");
      cmd->add_option("--threshold", f.threshold, "Classifier threshold")->check(CLI::Range(0.0, 1.0));
      break;
    case Stage::classify:
      cmd->add_option("--catalog", f.catalog, "CWE category catalog");
      cmd->add_option("--stopwords", f.stopwords, "Stop word list");
      cmd->add_option("--word-vectors", f.word_vectors, "WVEC1 word vectors for the TF-IDF model");
      cmd->add_option("--exchange", f.exchange, "WVEC1 sentence vectors, one per model");
      cmd->add_option("--vote-k", f.vote_k, "Votes required to assign a category");
      cmd->add_option("--log-base", f.log_base, "IDF logarithm base")->check(CLI::IsMember({2, 10}));
      break;
    case Stage::trace:
      cmd->add_option("--ignore-ext", f.ignore_ext, "File suffixes excluded from tracing");
      break;
    case Stage::weaknesses:
      cmd->add_option("--ingest", f.ingest_dir, "Ingest output directory");
      cmd->add_option("--filter", f.filter_dir, "Filter output directory (funnel counts only)");
      cmd->add_option("--exp-mode", f.exp_mode, "Experience denominator")
          ->check(CLI::IsMember({"sum", "max"}));
      break;
    case Stage::report:
      cmd->add_option("--weaknesses", f.weaknesses, "Weakness file or directory");
      cmd->add_option("--group-by", f.group_by, "Window grouping")->check(CLI::IsMember({"cwe", "category"}));
      cmd->add_option("--year-key", f.year_key, "Year used for the annual trend")
          ->check(CLI::IsMember({"t1", "t2"}));
      cmd->add_option("--libraries", f.libraries, "Library path prefixes");
      cmd->add_option("--goals", f.goals, "Development goal lexicon");
      break;
  }
}

int run_single(Stage stage, const StageFlags& flags) {
  auto config = apply(base_config(flags.config), flags);
  auto paths = resolve_paths(stage, config, flags);
  pipeline::validate_stage(config, stage);
  auto summary = pipeline::run_stage(stage, config, paths);
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int print_audit(const pipeline::AuditReport& report) {
  for (const auto& c : report.checks)
    std::cout << fmt::format("{:<22} {}  {}\n", c.name, c.ok ? "ok" : "FAIL", c.detail);
  std::cout << (report.ok() ? "audit passed\n" : "audit failed\n");
  return report.ok() ? kOk : kAuditFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine security weaknesses from git histories"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  std::map<Stage, StageFlags> stage_flags;
  std::map<Stage, CLI::App*> stage_cmds;
  for (auto stage : pipeline::all_stages()) {
    const std::string name(pipeline::to_string(stage));
    auto* cmd = app.add_subcommand(name, fmt::format("Run the {} stage", name));
    add_stage_flags(cmd, stage, stage_flags[stage]);
    stage_cmds[stage] = cmd;
  }

  std::string run_config;
  bool resume = false;
  std::string stop_after;
  auto* run = app.add_subcommand("run", "Run every stage in order");
  run->add_option("--config", run_config, "INI configuration file")->required()->check(CLI::ExistingFile);
  run->add_flag("--resume", resume, "Skip stages that already completed");
  run->add_option("--stop-after", stop_after, "Last stage to run");

  std::string audit_config, audit_workspace;
  auto* audit = app.add_subcommand("audit", "Check cross-stage conservation of a workspace");
  auto* audit_cfg = audit->add_option("--config", audit_config, "INI configuration file")
                        ->check(CLI::ExistingFile);
  audit->add_option("--workspace", audit_workspace, "Workspace directory")->excludes(audit_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("wm"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    for (auto& [stage, cmd] : stage_cmds)
      if (cmd->parsed()) return run_single(stage, stage_flags[stage]);

    if (run->parsed()) {
      auto config = pipeline::load_config(run_config, pipeline::wm_environment());
      pipeline::RunOptions options;
      options.resume = resume;
      if (!stop_after.empty()) {
        options.stop_after = pipeline::parse_stage(stop_after);
        if (!options.stop_after) throw ConfigInvalid("unknown stage '" + stop_after + "'");
      }
      auto summary = pipeline::run_pipeline(config, options);
      std::cout << pipeline::to_json(summary.funnel).dump(2) << "\n";
      return kOk;
    }

    if (audit->parsed()) {
      std::string ws = audit_workspace;
      if (!audit_config.empty()) ws = pipeline::load_config(audit_config, pipeline::wm_environment()).workspace;
      if (ws.empty()) throw ConfigInvalid("audit needs --workspace or --config");
      return print_audit(pipeline::audit(ws));
    }
  } catch (const ConfigInvalid& e) {
    spdlog::error("{}", e.what());
    return kValidation;
  } catch (const StageFailed& e) {
    spdlog::error("{}", e.what());
    return kStageFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kStageFailure;
  }
  return kOk;
}
