#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wm/cwe/catalog.hpp"
#include "wm/semvec/provider.hpp"

namespace wm::wfc {

inline constexpr int kDefaultVoteK = 4;

struct ModelScore {
  std::string provider_id;
  std::string top_category;
  double top_similarity = 0.0;
  std::map<std::string, double> all_similarities;
};

// Fills top_category/top_similarity from the similarities. Ties go to the
// lexicographically smallest CWE id.
ModelScore make_model_score(std::string provider_id, std::map<std::string, double> similarities);

enum class DecisionKind { assigned, needs_review, rejected };

struct Decision {
  DecisionKind kind = DecisionKind::needs_review;
  std::string cwe_id;  // set only when assigned

  bool operator==(const Decision&) const = default;
};

struct WfcAssignment {
  std::string commit_hash;
  Decision decision;
  std::map<std::string, int> votes;
  std::vector<ModelScore> scores;
  bool gate_passed = false;
  // Why the commit went to review when scoring itself failed.
  std::optional<std::string> review_cause;
};

// True iff some similarity of some model is strictly positive.
bool gate_wfc(const std::vector<ModelScore>& scores);

// Number of models ranking each category first.
std::map<std::string, int> tally(const std::vector<ModelScore>& scores);

// assigned(c) when c is top for at least k models (most votes, then smallest
// id, if several qualify); needs_review otherwise. Throws InvalidArgument
// unless 1 <= k <= scores.size().
Decision vote(const std::vector<ModelScore>& scores, int k);

// Scores commits against a fixed catalog. Category vectors are computed once
// at construction.
class Classifier {
 public:
  // Throws InvalidArgument for an empty provider list or k out of range, and
  // UnknownTextId when a provider lacks a category vector.
  Classifier(const cwe::Catalog& catalog, std::vector<const semvec::EmbeddingProvider*> providers,
             int vote_k = kDefaultVoteK);

  // Propagates UnknownTextId from providers backed by precomputed vectors.
  std::vector<ModelScore> score_commit(std::string_view hash, std::string_view message) const;

  // Never throws UnknownTextId: the commit is sent to review instead.
  WfcAssignment classify(std::string_view hash, std::string_view message) const;

  std::size_t provider_count() const { return providers_.size(); }
  int vote_k() const { return vote_k_; }

 private:
  const cwe::Catalog& catalog_;
  std::vector<const semvec::EmbeddingProvider*> providers_;
  std::vector<std::vector<semvec::SentenceVector>> category_vectors_;
  int vote_k_;
};

struct ClassifySummary {
  std::size_t security_commits = 0;
  std::size_t assigned = 0;
  std::size_t needs_review = 0;
  std::size_t rejected = 0;
};

struct ClassifyOptions {
  std::string filter_dir;
  std::string out_dir;
  std::size_t jobs = 1;
};

// Stage 4. Reads <filter>/security_commits.jsonl and writes
// <out>/assignments.jsonl (every security commit) and
// <out>/review_queue.jsonl (the needs_review subset).
ClassifySummary run_classify(const Classifier& classifier, const ClassifyOptions& options);

std::string_view to_string(DecisionKind kind);

void to_json(nlohmann::json& j, const ModelScore& s);
void from_json(const nlohmann::json& j, ModelScore& s);
void to_json(nlohmann::json& j, const WfcAssignment& a);
void from_json(const nlohmann::json& j, WfcAssignment& a);

}  // namespace wm::wfc
