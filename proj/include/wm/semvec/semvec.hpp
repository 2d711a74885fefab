#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wm/cwe/catalog.hpp"

namespace wm::semvec {

enum class LogBase { log10, log2 };

// Word statistics over the category descriptions.
class CorpusStats {
 public:
  using Document = std::pair<std::string, std::vector<std::string>>;

  // `category_count` defaults to the number of documents.
  static CorpusStats from_documents(const std::vector<Document>& documents,
                                    std::optional<std::size_t> category_count = std::nullopt);
  static CorpusStats from_catalog(const cwe::Catalog& catalog,
                                  std::optional<std::size_t> category_count = std::nullopt);

  using TermCounts = std::map<std::string, std::map<std::string, std::uint32_t>, std::less<>>;

  const TermCounts& term_counts() const { return term_counts_; }
  std::uint32_t count(std::string_view word, std::string_view category) const;
  std::uint32_t doc_freq(std::string_view word) const;
  // Total token count of the category. Throws UnknownCategory.
  std::uint64_t category_length(std::string_view category) const;
  std::size_t category_count() const { return category_count_; }
  bool has_category(std::string_view category) const;

 private:
  TermCounts term_counts_;
  std::map<std::string, std::uint64_t, std::less<>> lengths_;
  std::map<std::string, std::uint32_t, std::less<>> doc_freq_;
  std::size_t category_count_ = 0;
};

// n(word, category) / total tokens of category. Throws UnknownCategory.
double compute_tf(std::string_view word, std::string_view category, const CorpusStats& stats);

// log(category_count / (1 + doc_freq(word))); negative when a word occurs in
// every category.
double compute_idf(std::string_view word, const CorpusStats& stats, LogBase base = LogBase::log10);

double compute_tfidf(std::string_view word, std::string_view category, const CorpusStats& stats,
                     LogBase base = LogBase::log10);

// TF-IDF weight of every distinct word of a category description.
std::map<std::string, double> category_weights(std::string_view category, const CorpusStats& stats,
                                               LogBase base = LogBase::log10);

// Message weights: term frequency within the message times the corpus IDF.
std::map<std::string, double> message_weights(const std::vector<std::string>& tokens,
                                              const CorpusStats& stats,
                                              LogBase base = LogBase::log10);

struct WordVectorTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

struct SentenceVector {
  std::vector<double> values;
  std::string source_id;
  // False when no token had both a weight and a word vector, or the weights
  // summed to zero; `values` is then the zero vector.
  bool covered = false;
};

// Weighted mean of the word vectors of the distinct tokens present in both
// `weights` and `table`.
SentenceVector sentence_vector(const std::vector<std::string>& tokens,
                               const std::map<std::string, double>& weights,
                               const WordVectorTable& table, std::string source_id = {});

// Cosine similarity; 0 when either vector has zero norm. Throws
// DimensionMismatch.
double cosine(const std::vector<double>& u, const std::vector<double>& v);
inline double cosine(const SentenceVector& u, const SentenceVector& v) {
  return cosine(u.values, v.values);
}

}  // namespace wm::semvec
