#include "wm/secfilter/secfilter.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wm/error.hpp"
#include "wm/ingest/ingest.hpp"
#include "wm/util/jsonl.hpp"
#include "wm/util/process.hpp"
#include "wm/util/text.hpp"

namespace wm::secfilter {

void KeywordLexicon::validate() const {
  std::set<std::string> inclusion;
  for (const auto& t : inclusion_terms()) {
    if (t != util::to_lower(t)) throw LexiconInvalid("lexicon term '" + t + "' is not lowercase");
    inclusion.insert(t);
  }
  for (const auto& t : exclusion_terms) {
    if (t != util::to_lower(t)) throw LexiconInvalid("lexicon term '" + t + "' is not lowercase");
    if (inclusion.count(t))
      throw LexiconInvalid("term '" + t + "' is both an inclusion and an exclusion term");
  }
}

std::vector<std::string> KeywordLexicon::inclusion_terms() const {
  std::vector<std::string> all = remedial_terms;
  all.insert(all.end(), weakness_terms.begin(), weakness_terms.end());
  all.insert(all.end(), type_terms.begin(), type_terms.end());
  return all;
}

KeywordLexicon parse_lexicon(std::string_view text) {
  KeywordLexicon lex;
  lex.remedial_terms.clear();
  lex.weakness_terms.clear();
  lex.type_terms.clear();
  lex.exclusion_terms.clear();
  for (auto& section : util::parse_sectioned_list(text)) {
    std::vector<std::string>* target = nullptr;
    if (section.name == "remedial") target = &lex.remedial_terms;
    else if (section.name == "weakness") target = &lex.weakness_terms;
    else if (section.name == "types") target = &lex.type_terms;
    else if (section.name == "exclude") target = &lex.exclusion_terms;
    else throw LexiconInvalid("unknown lexicon section [" + section.name + "]");
    for (auto& e : section.entries) target->push_back(util::normalize_spaces(e));
  }
  lex.validate();
  return lex;
}

KeywordLexicon load_lexicon(const std::string& path) {
  return parse_lexicon(util::read_file(path));
}

FilterVerdict keyword_filter(std::string_view message, const KeywordLexicon& lexicon) {
  FilterVerdict v;
  util::TermMatcher matcher(message);
  auto collect = [&](const std::vector<std::string>& terms, std::vector<std::string>& out) {
    for (const auto& t : terms)
      if (matcher.matches(t) && std::find(out.begin(), out.end(), t) == out.end())
        out.push_back(t);
  };
  collect(lexicon.remedial_terms, v.matched_terms);
  collect(lexicon.weakness_terms, v.matched_terms);
  collect(lexicon.type_terms, v.matched_terms);
  collect(lexicon.exclusion_terms, v.exclusion_hits);
  // Inclusion wins over exclusion; exclusion hits are kept for auditing.
  v.keyword_match = !v.matched_terms.empty();
  v.is_security = v.keyword_match;
  return v;
}

FilterVerdict merge_verdicts(FilterVerdict keyword, std::optional<double> score, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidArgument(fmt::format("classifier threshold {} outside [0, 1]", threshold));
  keyword.classifier_score = score;
  keyword.is_security = keyword.keyword_match || (score && *score >= threshold);
  return keyword;
}

std::string unified_diff_text(const ingest::CommitRecord& commit) {
  std::string out;
  for (const auto& f : commit.changes) {
    out += fmt::format("diff --git a/{} b/{}\n", f.old_path, f.path);
    if (f.binary) {
      out += fmt::format("Binary files a/{} and b/{} differ\n", f.old_path, f.path);
      continue;
    }
    out += f.change_type == ingest::ChangeType::added ? std::string("--- /dev/null\n")
                                                      : fmt::format("--- a/{}\n", f.old_path);
    out += f.change_type == ingest::ChangeType::deleted ? std::string("+++ /dev/null\n")
                                                        : fmt::format("+++ b/{}\n", f.path);
    for (const auto& h : f.hunks) {
      out += fmt::format("@@ -{},{} +{},{} @@\n", h.old_start, h.old_len, h.new_start, h.new_len);
      for (const auto& l : h.deleted_line_texts) out += "-" + l + "\n";
      for (const auto& l : h.added_line_texts) out += "+" + l + "\n";
    }
  }
  return out;
}

nlohmann::json classifier_request(const ingest::CommitRecord& commit) {
  std::vector<std::string> files, change_types;
  for (const auto& f : commit.changes) {
    files.push_back(f.path);
    change_types.push_back(nlohmann::json(f.change_type).get<std::string>());
  }
  return {{"hash", commit.hash},
          {"message", commit.message},
          {"files", files},
          {"change_types", change_types},
          {"diff", unified_diff_text(commit)}};
}

ExternalClassifier::ExternalClassifier(std::string command) : command_(std::move(command)) {}

double ExternalClassifier::invoke(const ingest::CommitRecord& commit) {
  auto scores = invoke_batch({&commit});
  auto it = scores.find(commit.hash);
  if (it == scores.end())
    throw ClassifierUnavailable("classifier gave no score for " + commit.hash);
  return it->second;
}

std::map<std::string, double> ExternalClassifier::invoke_batch(
    const std::vector<const ingest::CommitRecord*>& commits) {
  std::map<std::string, double> scores;
  std::string input;
  {
    std::lock_guard lock(cache_mutex_);
    for (const auto* c : commits) {
      if (auto it = cache_.find(c->hash); it != cache_.end()) {
        scores[c->hash] = it->second;
        continue;
      }
      input += classifier_request(*c).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      input += '\n';
    }
  }
  if (input.empty()) return scores;

  auto r = util::run_shell(command_, {.cwd = {}, .env = {}, .stdin_data = input});
  if (!r.spawned) throw ClassifierUnavailable("classifier command not found: " + command_);
  if (r.exit_code != 0)
    throw ClassifierUnavailable(fmt::format("classifier exited with {}: {}", r.exit_code,
                                            util::trim(r.err)));

  std::map<std::string, double> fresh;
  for (const auto& raw : util::split_lines(r.out)) {
    std::string line = util::trim(raw);
    if (line.empty()) continue;
    auto space = line.find_first_of(" \t");
    if (space == std::string::npos)
      throw ClassifierUnavailable("malformed classifier output line: " + line);
    std::string hash = line.substr(0, space);
    std::string value = util::trim(line.substr(space + 1));
    double score = 0.0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), score);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !(score >= 0.0) ||
        !(score <= 1.0))
      throw ClassifierUnavailable("classifier score out of range: " + line);
    fresh[hash] = score;
  }
  std::lock_guard lock(cache_mutex_);
  for (const auto& [hash, score] : fresh) {
    cache_[hash] = score;
    scores[hash] = score;
  }
  return scores;
}

void to_json(nlohmann::json& j, const FilterVerdict& v) {
  j = {{"commit_hash", v.commit_hash},
       {"keyword_match", v.keyword_match},
       {"matched_terms", v.matched_terms},
       {"exclusion_hits", v.exclusion_hits},
       {"classifier_score", v.classifier_score ? nlohmann::json(*v.classifier_score) : nlohmann::json()},
       {"is_security", v.is_security}};
}

void from_json(const nlohmann::json& j, FilterVerdict& v) {
  j.at("commit_hash").get_to(v.commit_hash);
  j.at("keyword_match").get_to(v.keyword_match);
  j.at("matched_terms").get_to(v.matched_terms);
  j.at("exclusion_hits").get_to(v.exclusion_hits);
  const auto& s = j.at("classifier_score");
  v.classifier_score = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
  j.at("is_security").get_to(v.is_security);
}

FilterSummary run_filter(const FilterOptions& options) {
  options.lexicon.validate();
  FilterSummary summary;
  std::optional<ExternalClassifier> classifier;
  if (options.classifier_cmd && !options.classifier_cmd->empty())
    classifier.emplace(*options.classifier_cmd);

  std::vector<util::Json> verdict_lines, sc_lines;
  for (const auto& entry : ingest::read_projects(options.ingest_dir)) {
    auto history = ingest::read_history(options.ingest_dir, entry.project.id);

    std::map<std::string, double> scores;
    if (classifier && !summary.degraded) {
      std::vector<const ingest::CommitRecord*> batch;
      for (const auto& c : history) batch.push_back(&c);
      try {
        scores = classifier->invoke_batch(batch);
      } catch (const ClassifierUnavailable& e) {
        spdlog::warn("classifier unavailable, continuing keyword-only: {}", e.what());
        summary.degraded = true;
        summary.degraded_reason = e.what();
        scores.clear();
      }
    }

    for (const auto& commit : history) {
      auto verdict = keyword_filter(commit.message, options.lexicon);
      verdict.commit_hash = commit.hash;
      std::optional<double> score;
      if (auto it = scores.find(commit.hash); it != scores.end()) score = it->second;
      verdict = merge_verdicts(std::move(verdict), score, options.threshold);

      ++summary.commits;
      if (verdict.keyword_match) ++summary.keyword_matches;
      if (score && *score >= options.threshold) ++summary.classifier_positives;

      util::Json line = verdict;
      line["project_id"] = entry.project.id;
      verdict_lines.push_back(line);
      if (verdict.is_security) {
        ++summary.security_commits;
        sc_lines.push_back({{"project_id", entry.project.id},
                            {"local_path", entry.project.local_path},
                            {"verdict", verdict},
                            {"commit", commit}});
      }
    }
  }
  util::write_jsonl(options.out_dir + "/verdicts.jsonl", verdict_lines);
  util::write_jsonl(options.out_dir + "/security_commits.jsonl", sc_lines);
  return summary;
}

}  // namespace wm::secfilter
