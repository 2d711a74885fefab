#include "wm/semvec/semvec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "wm/error.hpp"

namespace wm::semvec {

CorpusStats CorpusStats::from_documents(const std::vector<Document>& documents,
                                        std::optional<std::size_t> category_count) {
  CorpusStats stats;
  for (const auto& [id, tokens] : documents) {
    auto& counts = stats.term_counts_[id];
    for (const auto& t : tokens) ++counts[t];
    stats.lengths_[id] += tokens.size();
  }
  for (const auto& [id, counts] : stats.term_counts_)
    for (const auto& [word, n] : counts)
      if (n > 0) ++stats.doc_freq_[word];
  stats.category_count_ = category_count.value_or(stats.term_counts_.size());
  return stats;
}

CorpusStats CorpusStats::from_catalog(const cwe::Catalog& catalog,
                                      std::optional<std::size_t> category_count) {
  std::vector<Document> docs;
  for (const auto& c : catalog.categories()) docs.emplace_back(c.cwe_id, c.tokens);
  return from_documents(docs, category_count);
}

std::uint32_t CorpusStats::count(std::string_view word, std::string_view category) const {
  auto it = term_counts_.find(category);
  if (it == term_counts_.end()) throw UnknownCategory("unknown category '" + std::string(category) + "'");
  auto w = it->second.find(std::string(word));
  return w == it->second.end() ? 0 : w->second;
}

std::uint32_t CorpusStats::doc_freq(std::string_view word) const {
  auto it = doc_freq_.find(word);
  return it == doc_freq_.end() ? 0 : it->second;
}

std::uint64_t CorpusStats::category_length(std::string_view category) const {
  auto it = lengths_.find(category);
  if (it == lengths_.end()) throw UnknownCategory("unknown category '" + std::string(category) + "'");
  return it->second;
}

bool CorpusStats::has_category(std::string_view category) const {
  return term_counts_.find(category) != term_counts_.end();
}

double compute_tf(std::string_view word, std::string_view category, const CorpusStats& stats) {
  const std::uint64_t total = stats.category_length(category);
  if (total == 0) return 0.0;
  return static_cast<double>(stats.count(word, category)) / static_cast<double>(total);
}

double compute_idf(std::string_view word, const CorpusStats& stats, LogBase base) {
  const double ratio = static_cast<double>(stats.category_count()) /
                       (1.0 + static_cast<double>(stats.doc_freq(word)));
  return base == LogBase::log10 ? std::log10(ratio) : std::log2(ratio);
}

double compute_tfidf(std::string_view word, std::string_view category, const CorpusStats& stats,
                     LogBase base) {
  return compute_tf(word, category, stats) * compute_idf(word, stats, base);
}

std::map<std::string, double> category_weights(std::string_view category, const CorpusStats& stats,
                                               LogBase base) {
  auto it = stats.term_counts().find(category);
  if (it == stats.term_counts().end())
    throw UnknownCategory("unknown category '" + std::string(category) + "'");
  std::map<std::string, double> weights;
  for (const auto& [word, _] : it->second) weights[word] = compute_tfidf(word, category, stats, base);
  return weights;
}

std::map<std::string, double> message_weights(const std::vector<std::string>& tokens,
                                              const CorpusStats& stats, LogBase base) {
  std::map<std::string, std::uint32_t> counts;
  for (const auto& t : tokens) ++counts[t];
  std::map<std::string, double> weights;
  if (tokens.empty()) return weights;
  const double total = static_cast<double>(tokens.size());
  for (const auto& [word, n] : counts)
    weights[word] = (static_cast<double>(n) / total) * compute_idf(word, stats, base);
  return weights;
}

SentenceVector sentence_vector(const std::vector<std::string>& tokens,
                               const std::map<std::string, double>& weights,
                               const WordVectorTable& table, std::string source_id) {
  SentenceVector out;
  out.source_id = std::move(source_id);
  out.values.assign(table.dimension, 0.0);

  std::set<std::string> distinct(tokens.begin(), tokens.end());
  double weight_sum = 0.0;
  bool any = false;
  std::vector<double> acc(table.dimension, 0.0);
  for (const auto& word : distinct) {
    auto w = weights.find(word);
    auto v = table.vectors.find(word);
    if (w == weights.end() || v == table.vectors.end()) continue;
    if (v->second.size() != table.dimension)
      throw DimensionMismatch(fmt::format("word vector for '{}' has {} components, table has {}",
                                          word, v->second.size(), table.dimension));
    any = true;
    weight_sum += w->second;
    for (std::size_t k = 0; k < table.dimension; ++k) acc[k] += w->second * v->second[k];
  }
  if (!any || weight_sum == 0.0) return out;

  for (std::size_t k = 0; k < table.dimension; ++k) acc[k] /= weight_sum;
  for (double x : acc)
    if (!std::isfinite(x)) return out;
  out.values = std::move(acc);
  out.covered = true;
  return out;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw DimensionMismatch(fmt::format("cosine of vectors with {} and {} components", u.size(), v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace wm::semvec
