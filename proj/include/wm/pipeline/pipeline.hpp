#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wm/pipeline/config.hpp"

namespace wm::pipeline {

enum class Stage { ingest, filter, classify, trace, weaknesses, report };

const std::vector<Stage>& all_stages();
std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

// <workspace>/01_ingest, 02_filter, ...
std::string stage_dir(const std::string& workspace, Stage stage);

struct Funnel {
  std::size_t projects = 0;
  std::size_t commits = 0;
  std::size_t security_commits = 0;
  std::size_t wfcs = 0;
  std::size_t wccs = 0;
  std::size_t weaknesses = 0;
};

// Counts read back from the artifacts of a completed workspace.
Funnel compute_funnel(const std::string& workspace);

nlohmann::json to_json(const Funnel& funnel);

// Artifact directory of every stage.
struct StagePaths {
  std::string ingest, filter, classify, trace, weaknesses, report;

  static StagePaths for_workspace(const std::string& workspace);
  const std::string& at(Stage stage) const;
};

// Runs one stage from the configuration, reading the previous stage's
// artifacts. Returns the stage summary. Throws StageFailed.
nlohmann::json run_stage(Stage stage, const PipelineConfig& config);
nlohmann::json run_stage(Stage stage, const PipelineConfig& config, const StagePaths& paths);

// Checks only the settings `stage` reads. Throws ConfigInvalid.
void validate_stage(const PipelineConfig& config, Stage stage);

struct RunOptions {
  // Skip stages whose completion marker exists, up to the first one that
  // has to run; every later stage runs again.
  bool resume = false;
  std::optional<Stage> stop_after;
};

struct PipelineSummary {
  Funnel funnel;
  nlohmann::json stages = nlohmann::json::object();
  std::vector<Stage> ran;
  std::vector<Stage> skipped;
};

// Validates the configuration, runs the stages in order and writes
// <workspace>/summary.json. Throws ConfigInvalid before any stage runs, and
// StageFailed when a stage fails (earlier artifacts are kept).
PipelineSummary run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

struct AuditCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool ok() const;
};

// Cross-stage conservation: C_SC within C, C_WFC within C_SC, chains match
// the WFCs, every fix is a WFC, dedup counts add up, and the lifecycle
// identities hold. Missing artifacts fail the corresponding checks.
AuditReport audit(const std::string& workspace);

}  // namespace wm::pipeline
