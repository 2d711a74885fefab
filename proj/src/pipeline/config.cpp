#include "wm/pipeline/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/util/text.hpp"

extern char** environ;

namespace wm::pipeline {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"pipeline", {"manifest", "workspace", "jobs"}},
      {"ingest", {"min_commits", "count_merges"}},
      {"filter", {"lexicon", "classifier_cmd", "threshold"}},
      {"classify", {"catalog", "stopwords", "word_vectors", "exchange", "vote_k", "log_base"}},
      {"trace", {"ignore_ext"}},
      {"weaknesses", {"exp_mode"}},
      {"report", {"group_by", "year_key", "libraries", "goals"}},
  };
  return keys;
}

std::string env_name(const std::string& section, const std::string& key) {
  std::string name = "WM_" + section + "_" + key;
  for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigInvalid(fmt::format("{}: '{}' is not a number", key, value));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto v = util::to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigInvalid(fmt::format("{}: '{}' is not a boolean", key, value));
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& item : util::split(value, ',')) {
    auto t = util::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return value;
  std::filesystem::path p(value);
  return p.is_absolute() ? p.lexically_normal().string() : (base / p).lexically_normal().string();
}

}  // namespace

Environment wm_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    auto eq = entry.find('=');
    if (eq == std::string_view::npos || !util::starts_with(entry, "WM_")) continue;
    env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return env;
}

PipelineConfig parse_config(const std::string& text, const Environment& env,
                            const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigInvalid(std::string("config: ") + e.what());
  }

  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    auto known = known_keys().find(section);
    if (known == known_keys().end())
      throw ConfigInvalid("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key))
        throw ConfigInvalid(fmt::format("config: unknown key '{}' in [{}]", key, section));
      values[section + "." + key] = util::trim(value.data());
    }
  }
  for (const auto& [section, keys] : known_keys())
    for (const auto& key : keys)
      if (auto it = env.find(env_name(section, key)); it != env.end())
        values[section + "." + key] = util::trim(it->second);

  PipelineConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  if (auto v = get("pipeline.manifest")) c.manifest = resolve(base_dir, *v);
  if (auto v = get("pipeline.workspace")) c.workspace = resolve(base_dir, *v);
  if (auto v = get("pipeline.jobs")) c.jobs = parse_number<std::size_t>("jobs", *v);
  if (auto v = get("ingest.min_commits")) c.min_commits = parse_number<std::size_t>("min_commits", *v);
  if (auto v = get("ingest.count_merges")) c.count_merges = parse_bool("count_merges", *v);
  if (auto v = get("filter.lexicon")) c.lexicon = resolve(base_dir, *v);
  if (auto v = get("filter.classifier_cmd"); v && !v->empty()) c.classifier_cmd = *v;
  if (auto v = get("filter.threshold")) c.threshold = parse_number<double>("threshold", *v);
  if (auto v = get("classify.catalog")) c.catalog = resolve(base_dir, *v);
  if (auto v = get("classify.stopwords")) c.stopwords = resolve(base_dir, *v);
  if (auto v = get("classify.word_vectors")) c.word_vectors = resolve(base_dir, *v);
  if (auto v = get("classify.exchange")) {
    c.exchange.clear();
    for (const auto& p : parse_list(*v)) c.exchange.push_back(resolve(base_dir, p));
  }
  if (auto v = get("classify.vote_k")) c.vote_k = parse_number<int>("vote_k", *v);
  if (auto v = get("classify.log_base")) {
    if (*v == "10") c.log_base = semvec::LogBase::log10;
    else if (*v == "2") c.log_base = semvec::LogBase::log2;
    else throw ConfigInvalid("log_base must be 10 or 2");
  }
  if (auto v = get("trace.ignore_ext")) c.ignore_ext = parse_list(*v);
  if (auto v = get("weaknesses.exp_mode")) {
    if (*v == "sum") c.exp_mode = weakness::ExpMode::sum;
    else if (*v == "max") c.exp_mode = weakness::ExpMode::max;
    else throw ConfigInvalid("exp_mode must be sum or max");
  }
  if (auto v = get("report.group_by")) {
    if (*v == "cwe") c.group_by = analytics::GroupBy::cwe;
    else if (*v == "category") c.group_by = analytics::GroupBy::category;
    else throw ConfigInvalid("group_by must be cwe or category");
  }
  if (auto v = get("report.year_key")) {
    if (*v == "t1") c.year_key = analytics::YearKey::t1;
    else if (*v == "t2") c.year_key = analytics::YearKey::t2;
    else throw ConfigInvalid("year_key must be t1 or t2");
  }
  if (auto v = get("report.libraries")) c.libraries = resolve(base_dir, *v);
  if (auto v = get("report.goals")) c.goals = resolve(base_dir, *v);
  return c;
}

PipelineConfig load_config(const std::string& path, const Environment& env) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigInvalid("cannot read config '" + path + "': " + e.what());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(text, env, base);
}

void validate(const PipelineConfig& c) {
  auto require_file = [](const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigInvalid(key + " is not set");
    if (!std::filesystem::is_regular_file(path))
      throw ConfigInvalid(fmt::format("{} '{}' does not exist", key, path));
  };
  auto optional_file = [&](const std::string& key, const std::string& path) {
    if (!path.empty()) require_file(key, path);
  };
  require_file("manifest", c.manifest);
  if (c.workspace.empty()) throw ConfigInvalid("workspace is not set");
  require_file("catalog", c.catalog);
  require_file("stopwords", c.stopwords);
  require_file("word_vectors", c.word_vectors);
  for (const auto& e : c.exchange) require_file("exchange", e);
  optional_file("lexicon", c.lexicon);
  optional_file("libraries", c.libraries);
  optional_file("goals", c.goals);

  if (c.jobs < 1) throw ConfigInvalid("jobs must be at least 1");
  if (c.min_commits < 1) throw ConfigInvalid("min_commits must be at least 1");
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw ConfigInvalid("threshold must lie in [0, 1]");
  const int providers = 1 + static_cast<int>(c.exchange.size());
  if (providers > kMaxProviders)
    throw ConfigInvalid(fmt::format("at most {} exchange files are supported", kMaxProviders - 1));
  if (c.vote_k < 1 || c.vote_k > providers)
    throw ConfigInvalid(fmt::format("vote_k {} outside [1, {}] for {} providers", c.vote_k, providers,
                                    providers));
}

}  // namespace wm::pipeline
