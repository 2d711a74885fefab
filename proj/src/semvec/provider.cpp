#include "wm/semvec/provider.hpp"

#include <cmath>
#include <filesystem>

#include "wm/error.hpp"

namespace wm::semvec {

TfidfProvider::TfidfProvider(std::string id, const cwe::Catalog& catalog, cwe::StopWords stopwords,
                             WordVectorTable table, LogBase base)
    : id_(std::move(id)),
      stopwords_(std::move(stopwords)),
      table_(std::move(table)),
      stats_(CorpusStats::from_catalog(catalog)),
      base_(base) {
  if (table_.dimension == 0) throw DimensionMismatch("word vector table has dimension 0");
}

SentenceVector TfidfProvider::embed_category(const cwe::CweCategory& category) const {
  return sentence_vector(category.tokens, category_weights(category.cwe_id, stats_, base_), table_,
                         category.cwe_id);
}

SentenceVector TfidfProvider::embed_message(std::string_view text_id, std::string_view text) const {
  auto tokens = cwe::preprocess(text, stopwords_);
  return sentence_vector(tokens, message_weights(tokens, stats_, base_), table_, std::string(text_id));
}

ExchangeProvider::ExchangeProvider(std::string id, const ExchangeFile& file)
    : id_(std::move(id)), dimension_(file.dimension) {
  vectors_.reserve(file.records.size());
  for (const auto& [key, values] : file.records) vectors_.emplace(key, values);
}

SentenceVector ExchangeProvider::lookup(std::string_view text_id) const {
  auto it = vectors_.find(std::string(text_id));
  if (it == vectors_.end())
    throw UnknownTextId("provider '" + id_ + "' has no vector for '" + std::string(text_id) + "'");
  SentenceVector v;
  v.values = it->second;
  v.source_id = it->first;
  v.covered = false;
  for (double x : v.values)
    if (x != 0.0) v.covered = true;
  return v;
}

SentenceVector ExchangeProvider::embed_category(const cwe::CweCategory& category) const {
  return lookup(category.cwe_id);
}

SentenceVector ExchangeProvider::embed_message(std::string_view text_id, std::string_view) const {
  return lookup(text_id);
}

bool ExchangeProvider::contains(std::string_view text_id) const {
  return vectors_.count(std::string(text_id)) > 0;
}

std::unique_ptr<ExchangeProvider> load_exchange_file(const std::string& path,
                                                     std::string provider_id) {
  if (provider_id.empty()) provider_id = std::filesystem::path(path).stem().string();
  return std::make_unique<ExchangeProvider>(std::move(provider_id), load_exchange(path));
}

}  // namespace wm::semvec
