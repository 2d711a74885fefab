#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wm/cwe/catalog.hpp"
#include "wm/semvec/exchange.hpp"
#include "wm/semvec/semvec.hpp"

namespace wm::semvec {

// One sentence-embedding model. Implementations are immutable after
// construction and safe to share between threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const std::string& id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual SentenceVector embed_category(const cwe::CweCategory& category) const = 0;
  // `text_id` is the commit hash; providers backed by precomputed vectors
  // ignore `text` and throw UnknownTextId for ids they do not hold.
  virtual SentenceVector embed_message(std::string_view text_id, std::string_view text) const = 0;
};

// TF-IDF weighted average of word vectors, computed in process.
class TfidfProvider final : public EmbeddingProvider {
 public:
  TfidfProvider(std::string id, const cwe::Catalog& catalog, cwe::StopWords stopwords,
                WordVectorTable table, LogBase base = LogBase::log10);

  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return table_.dimension; }
  SentenceVector embed_category(const cwe::CweCategory& category) const override;
  SentenceVector embed_message(std::string_view text_id, std::string_view text) const override;

  const CorpusStats& stats() const { return stats_; }

 private:
  std::string id_;
  cwe::StopWords stopwords_;
  WordVectorTable table_;
  CorpusStats stats_;
  LogBase base_;
};

// Serves vectors stored in a WVEC1 file, keyed by CWE id or commit hash.
class ExchangeProvider final : public EmbeddingProvider {
 public:
  ExchangeProvider(std::string id, const ExchangeFile& file);

  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  SentenceVector embed_category(const cwe::CweCategory& category) const override;
  SentenceVector embed_message(std::string_view text_id, std::string_view text) const override;

  bool contains(std::string_view text_id) const;

 private:
  SentenceVector lookup(std::string_view text_id) const;

  std::string id_;
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Provider id defaults to the file name without its extension.
std::unique_ptr<ExchangeProvider> load_exchange_file(const std::string& path,
                                                     std::string provider_id = {});

}  // namespace wm::semvec
