#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wm/ingest/types.hpp"

namespace wm::secfilter {

inline constexpr double kDefaultThreshold = 0.5;

struct KeywordLexicon {
  std::vector<std::string> remedial_terms{"fix", "patch", "resolve"};
  std::vector<std::string> weakness_terms{"vulnerability", "bug", "weakness", "exposure", "threat"};
  std::vector<std::string> type_terms{"sql injection", "xss"};
  std::vector<std::string> exclusion_terms{"merge", "test", "configuration"};

  // Throws LexiconInvalid on upper-case terms or on a term listed both as an
  // inclusion and an exclusion.
  void validate() const;
  std::vector<std::string> inclusion_terms() const;
};

// Sections: [remedial] [weakness] [types] [exclude].
KeywordLexicon parse_lexicon(std::string_view text);
KeywordLexicon load_lexicon(const std::string& path);

struct FilterVerdict {
  std::string commit_hash;
  bool keyword_match = false;
  std::vector<std::string> matched_terms;
  std::vector<std::string> exclusion_hits;
  std::optional<double> classifier_score;
  bool is_security = false;
};

FilterVerdict keyword_filter(std::string_view message, const KeywordLexicon& lexicon);

// is_security = keyword_match OR score >= threshold.
FilterVerdict merge_verdicts(FilterVerdict keyword, std::optional<double> score, double threshold);

// Request line sent to the external code-level classifier.
nlohmann::json classifier_request(const ingest::CommitRecord& commit);

// Renders the commit's changes as unified-diff text (zero context lines).
std::string unified_diff_text(const ingest::CommitRecord& commit);

// Runs an external command that reads one JSON request per stdin line and
// answers `<hash> <score>` per line. Scores are cached by commit hash.
class ExternalClassifier {
 public:
  explicit ExternalClassifier(std::string command);

  // Throws ClassifierUnavailable if the command cannot run, exits non-zero,
  // or answers with something other than a score in [0, 1].
  double invoke(const ingest::CommitRecord& commit);

  // Scores a batch with one process. Commits the command does not answer
  // for are absent from the result.
  std::map<std::string, double> invoke_batch(const std::vector<const ingest::CommitRecord*>& commits);

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  std::mutex cache_mutex_;
  std::map<std::string, double> cache_;
};

struct FilterSummary {
  std::size_t commits = 0;
  std::size_t keyword_matches = 0;
  std::size_t classifier_positives = 0;
  std::size_t security_commits = 0;
  bool degraded = false;  // classifier configured but unavailable
  std::string degraded_reason;
};

struct FilterOptions {
  std::string ingest_dir;
  std::string out_dir;
  KeywordLexicon lexicon;
  std::optional<std::string> classifier_cmd;
  double threshold = kDefaultThreshold;
};

// Stage 3. Writes <out>/verdicts.jsonl (every commit) and
// <out>/security_commits.jsonl (project id, verdict and full commit record
// of each security commit).
FilterSummary run_filter(const FilterOptions& options);

void to_json(nlohmann::json& j, const FilterVerdict& v);
void from_json(const nlohmann::json& j, FilterVerdict& v);

}  // namespace wm::secfilter
