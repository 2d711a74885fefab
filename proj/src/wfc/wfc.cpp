#include "wm/wfc/wfc.hpp"

#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/ingest/types.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/parallel.hpp"

namespace wm::wfc {

ModelScore make_model_score(std::string provider_id, std::map<std::string, double> similarities) {
  ModelScore s;
  s.provider_id = std::move(provider_id);
  bool first = true;
  // std::map iterates ids in ascending order, so a strict comparison keeps the
  // smallest id on ties.
  for (const auto& [cwe, sim] : similarities) {
    if (first || sim > s.top_similarity) {
      s.top_category = cwe;
      s.top_similarity = sim;
      first = false;
    }
  }
  s.all_similarities = std::move(similarities);
  return s;
}

bool gate_wfc(const std::vector<ModelScore>& scores) {
  for (const auto& s : scores)
    for (const auto& [_, sim] : s.all_similarities)
      if (sim > 0.0) return true;
  return false;
}

std::map<std::string, int> tally(const std::vector<ModelScore>& scores) {
  std::map<std::string, int> votes;
  for (const auto& s : scores)
    if (!s.top_category.empty()) ++votes[s.top_category];
  return votes;
}

Decision vote(const std::vector<ModelScore>& scores, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > scores.size())
    throw InvalidArgument(fmt::format("vote threshold {} outside [1, {}]", k, scores.size()));
  Decision d;
  int best = 0;
  for (const auto& [cwe, n] : tally(scores)) {
    if (n >= k && n > best) {
      best = n;
      d = {DecisionKind::assigned, cwe};
    }
  }
  return d;
}

Classifier::Classifier(const cwe::Catalog& catalog,
                       std::vector<const semvec::EmbeddingProvider*> providers, int vote_k)
    : catalog_(catalog), providers_(std::move(providers)), vote_k_(vote_k) {
  if (providers_.empty()) throw InvalidArgument("at least one embedding provider is required");
  if (vote_k_ < 1 || static_cast<std::size_t>(vote_k_) > providers_.size())
    throw InvalidArgument(
        fmt::format("vote_k {} outside [1, {}]", vote_k_, providers_.size()));
  for (const auto* p : providers_) {
    std::vector<semvec::SentenceVector> vectors;
    vectors.reserve(catalog_.size());
    for (const auto& c : catalog_.categories()) vectors.push_back(p->embed_category(c));
    category_vectors_.push_back(std::move(vectors));
  }
}

std::vector<ModelScore> Classifier::score_commit(std::string_view hash,
                                                 std::string_view message) const {
  std::vector<ModelScore> scores;
  scores.reserve(providers_.size());
  for (std::size_t m = 0; m < providers_.size(); ++m) {
    auto msg = providers_[m]->embed_message(hash, message);
    std::map<std::string, double> sims;
    const auto& cats = catalog_.categories();
    for (std::size_t j = 0; j < cats.size(); ++j)
      sims[cats[j].cwe_id] = semvec::cosine(msg, category_vectors_[m][j]);
    scores.push_back(make_model_score(providers_[m]->id(), std::move(sims)));
  }
  return scores;
}

WfcAssignment Classifier::classify(std::string_view hash, std::string_view message) const {
  WfcAssignment a;
  a.commit_hash = std::string(hash);
  try {
    a.scores = score_commit(hash, message);
  } catch (const UnknownTextId& e) {
    a.decision = {DecisionKind::needs_review, {}};
    a.review_cause = e.what();
    return a;
  }
  a.votes = tally(a.scores);
  a.gate_passed = gate_wfc(a.scores);
  if (!a.gate_passed) {
    a.decision = {DecisionKind::rejected, {}};
    return a;
  }
  a.decision = vote(a.scores, vote_k_);
  return a;
}

ClassifySummary run_classify(const Classifier& classifier, const ClassifyOptions& options) {
  auto input = util::read_jsonl(options.filter_dir + "/security_commits.jsonl");
  auto assignments = util::parallel_map<WfcAssignment>(input.size(), options.jobs, [&](std::size_t i) {
    const auto& commit = input[i].at("commit");
    return classifier.classify(commit.at("hash").get<std::string>(),
                               commit.at("message").get<std::string>());
  });

  ClassifySummary summary;
  std::vector<util::Json> all, review;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& a = assignments[i];
    ++summary.security_commits;
    switch (a.decision.kind) {
      case DecisionKind::assigned: ++summary.assigned; break;
      case DecisionKind::needs_review: ++summary.needs_review; break;
      case DecisionKind::rejected: ++summary.rejected; break;
    }
    util::Json line = a;
    line["project_id"] = input[i].at("project_id");
    line["local_path"] = input[i].at("local_path");
    line["commit"] = input[i].at("commit");
    if (a.decision.kind == DecisionKind::needs_review) review.push_back(line);
    all.push_back(std::move(line));
  }
  util::write_jsonl(options.out_dir + "/assignments.jsonl", all);
  util::write_jsonl(options.out_dir + "/review_queue.jsonl", review);
  return summary;
}

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::assigned: return "assigned";
    case DecisionKind::needs_review: return "needs_review";
    case DecisionKind::rejected: return "rejected";
  }
  return "needs_review";
}

void to_json(nlohmann::json& j, const ModelScore& s) {
  j = {{"provider_id", s.provider_id},
       {"top_category", s.top_category},
       {"top_similarity", s.top_similarity},
       {"all_similarities", s.all_similarities}};
}

void from_json(const nlohmann::json& j, ModelScore& s) {
  j.at("provider_id").get_to(s.provider_id);
  j.at("top_category").get_to(s.top_category);
  j.at("top_similarity").get_to(s.top_similarity);
  j.at("all_similarities").get_to(s.all_similarities);
}

void to_json(nlohmann::json& j, const WfcAssignment& a) {
  j = {{"schema_version", kHistorySchemaVersion},
       {"commit_hash", a.commit_hash},
       {"decision", to_string(a.decision.kind)},
       {"cwe_id", a.decision.kind == DecisionKind::assigned ? nlohmann::json(a.decision.cwe_id)
                                                            : nlohmann::json()},
       {"votes", a.votes},
       {"scores", a.scores},
       {"gate_passed", a.gate_passed},
       {"review_cause", a.review_cause ? nlohmann::json(*a.review_cause) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, WfcAssignment& a) {
  j.at("commit_hash").get_to(a.commit_hash);
  const auto kind = j.at("decision").get<std::string>();
  if (kind == "assigned") a.decision = {DecisionKind::assigned, j.at("cwe_id").get<std::string>()};
  else if (kind == "needs_review") a.decision = {DecisionKind::needs_review, {}};
  else if (kind == "rejected") a.decision = {DecisionKind::rejected, {}};
  else throw ArtifactMalformed("unknown decision '" + kind + "'");
  j.at("votes").get_to(a.votes);
  j.at("scores").get_to(a.scores);
  j.at("gate_passed").get_to(a.gate_passed);
  const auto& cause = j.at("review_cause");
  a.review_cause = cause.is_null() ? std::nullopt : std::optional<std::string>(cause.get<std::string>());
}

}  // namespace wm::wfc
