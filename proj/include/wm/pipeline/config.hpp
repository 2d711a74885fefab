#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wm/analytics/report.hpp"
#include "wm/semvec/semvec.hpp"
#include "wm/weakness/weakness.hpp"

namespace wm::pipeline {

inline constexpr int kMaxProviders = 5;

struct PipelineConfig {
  // [pipeline]
  std::string manifest;
  std::string workspace;
  std::size_t jobs = 1;
  // [ingest]
  std::size_t min_commits = 100;
  bool count_merges = true;
  // [filter]
  std::string lexicon;  // empty: built-in published terms
  std::optional<std::string> classifier_cmd;
  double threshold = 0.5;
  // [classify]
  std::string catalog;
  std::string stopwords;
  std::string word_vectors;
  std::vector<std::string> exchange;  // providers 2..5
  int vote_k = 4;
  semvec::LogBase log_base = semvec::LogBase::log10;
  // [trace]
  std::vector<std::string> ignore_ext{".meta"};
  // [weaknesses]
  weakness::ExpMode exp_mode = weakness::ExpMode::sum;
  // [report]
  analytics::GroupBy group_by = analytics::GroupBy::cwe;
  analytics::YearKey year_key = analytics::YearKey::t1;
  std::string libraries;
  std::string goals;
};

using Environment = std::map<std::string, std::string>;

// Current process environment, restricted to WM_* variables.
Environment wm_environment();

// INI text with [pipeline] [ingest] [filter] [classify] [trace] [weaknesses]
// [report] sections. WM_<SECTION>_<KEY> variables in `env` override file
// values. Relative paths resolve against `base_dir`. Throws ConfigInvalid on
// unknown keys or unparsable values.
PipelineConfig parse_config(const std::string& text, const Environment& env,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::string& path, const Environment& env);

// Throws ConfigInvalid when a referenced file is missing or a value is out of
// range.
void validate(const PipelineConfig& config);

}  // namespace wm::pipeline
