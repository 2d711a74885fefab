#include "wm/cwe/catalog.hpp"

#include <cctype>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "wm/error.hpp"
#include "wm/util/text.hpp"

namespace wm::cwe {

std::vector<std::string> preprocess(std::string_view text, const StopWords& stopwords) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c) || std::isspace(c)) cleaned.push_back(' ');
    else cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  for (auto& t : util::split(cleaned, ' '))
    if (!t.empty() && !stopwords.count(t)) tokens.push_back(std::move(t));
  return tokens;
}

StopWords parse_stopwords(std::string_view text) {
  StopWords words;
  for (const auto& line : util::split_lines(text)) {
    std::string w = util::trim(line);
    if (w.empty() || w[0] == '#') continue;
    words.insert(util::to_lower(w));
  }
  return words;
}

StopWords load_stopwords(const std::string& path) { return parse_stopwords(util::read_file(path)); }

Catalog::Catalog(std::vector<CweCategory> categories, std::string snapshot)
    : categories_(std::move(categories)), snapshot_(std::move(snapshot)) {
  if (categories_.size() != kExpectedCategoryCount)
    warnings_.push_back(fmt::format("CatalogSizeMismatch: {} categories loaded, expected {}",
                                    categories_.size(), kExpectedCategoryCount));
}

const CweCategory& Catalog::at(std::string_view cwe_id) const {
  for (const auto& c : categories_)
    if (c.cwe_id == cwe_id) return c;
  throw UnknownCweId("unknown CWE id '" + std::string(cwe_id) + "'");
}

bool Catalog::contains(std::string_view cwe_id) const {
  for (const auto& c : categories_)
    if (c.cwe_id == cwe_id) return true;
  return false;
}

Catalog parse_catalog(std::string_view text, const StopWords& stopwords) {
  std::vector<CweCategory> categories;
  std::string snapshot;
  std::set<std::string> seen;
  size_t line_no = 0;
  for (const auto& line : util::split_lines(text)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CatalogMalformed(fmt::format("line {}: {}", line_no, e.what()));
    }
    if (j.contains("snapshot") && !j.contains("id")) {
      snapshot = j["snapshot"].get<std::string>();
      continue;
    }
    for (const char* field : {"id", "name", "description"})
      if (!j.contains(field) || !j[field].is_string())
        throw CatalogMalformed(fmt::format("line {}: missing field '{}'", line_no, field));
    CweCategory c;
    c.cwe_id = j["id"].get<std::string>();
    c.name = j["name"].get<std::string>();
    c.description = j["description"].get<std::string>();
    if (!seen.insert(c.cwe_id).second)
      throw CatalogMalformed(fmt::format("line {}: duplicate id {}", line_no, c.cwe_id));
    c.tokens = preprocess(c.description, stopwords);
    if (c.tokens.empty())
      throw CatalogMalformed(fmt::format("line {}: {} has no tokens after preprocessing", line_no,
                                         c.cwe_id));
    categories.push_back(std::move(c));
  }
  Catalog catalog(std::move(categories), std::move(snapshot));
  for (const auto& w : catalog.warnings()) spdlog::warn("{}", w);
  return catalog;
}

Catalog load_catalog(const std::string& path, const StopWords& stopwords) {
  return parse_catalog(util::read_file(path), stopwords);
}

}  // namespace wm::cwe
