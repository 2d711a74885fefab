#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wm::cwe {

inline constexpr std::size_t kExpectedCategoryCount = 40;

using StopWords = std::set<std::string>;

// Lowercases, turns ASCII punctuation into separators, splits on whitespace
// and drops stop words.
std::vector<std::string> preprocess(std::string_view text, const StopWords& stopwords);

StopWords parse_stopwords(std::string_view text);
StopWords load_stopwords(const std::string& path);

struct CweCategory {
  std::string cwe_id;
  std::string name;
  std::string description;
  std::vector<std::string> tokens;
};

class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<CweCategory> categories, std::string snapshot);

  const std::vector<CweCategory>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  const std::string& snapshot() const { return snapshot_; }

  // Throws UnknownCweId.
  const CweCategory& at(std::string_view cwe_id) const;
  bool contains(std::string_view cwe_id) const;

  // Non-empty when the catalog does not hold exactly 40 categories.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<CweCategory> categories_;
  std::string snapshot_;
  std::vector<std::string> warnings_;
};

// JSON lines, one `{"id","name","description"}` object per category; an
// optional `{"snapshot": "..."}` line records the CWE release the text was
// taken from. Throws CatalogMalformed on missing fields, duplicate ids or a
// category whose description is empty after preprocessing.
Catalog parse_catalog(std::string_view text, const StopWords& stopwords);
Catalog load_catalog(const std::string& path, const StopWords& stopwords);

}  // namespace wm::cwe
