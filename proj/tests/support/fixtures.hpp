#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wm/cwe/catalog.hpp"
#include "wm/ingest/types.hpp"
#include "wm/semvec/exchange.hpp"
#include "wm/szz/szz.hpp"

namespace wm::fixtures {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "wm");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Author {
  std::string name;
  std::string email;
};

inline const Author kAlice{"Alice Liddell", "Alice@Example.org"};
inline const Author kBob{"Bob Stone", "bob@example.org"};
inline const Author kCarol{"Carol Reyes", "carol@example.org"};
inline const Author kDave{"Dave Okafor", "dave@example.org"};

// 2019-01-01T00:00:00Z
inline constexpr Timestamp kEpoch = 1546300800;
inline constexpr Timestamp kDay = 86400;

// Scripted git history with fixed authors and clock.
class RepoBuilder {
 public:
  explicit RepoBuilder(fs::path dir);

  const fs::path& path() const { return dir_; }

  void write_lines(const std::string& path, const std::vector<std::string>& lines);
  void write_bytes(const std::string& path, const std::string& bytes);
  // Replaces the line equal to `from` (exactly one must exist).
  void replace_line(const std::string& path, const std::string& from, const std::string& to);
  void append_lines(const std::string& path, const std::vector<std::string>& lines);
  void remove_line(const std::string& path, const std::string& line);
  void move(const std::string& from, const std::string& to);
  void remove(const std::string& path);

  // Stages everything and commits; returns the new hash.
  std::string commit(const std::string& message, const Author& author, Timestamp at);

  void branch(const std::string& name);
  void checkout(const std::string& name);
  // Non-fast-forward merge of `branch` into the current branch.
  std::string merge(const std::string& branch, const std::string& message, const Author& author,
                    Timestamp at);

  std::string git(const std::vector<std::string>& args, const Author* author = nullptr,
                  std::optional<Timestamp> at = std::nullopt);

 private:
  std::vector<std::string> read_lines(const std::string& path) const;

  fs::path dir_;
};

struct ExpectedChain {
  std::string label;
  std::string wfc;
  std::set<std::string> wccs;
  std::optional<szz::UntraceableReason> reason;
};

struct Scenario {
  std::string name;
  fs::path path;
  std::map<std::string, std::string> commits;  // label -> hash
  std::vector<ExpectedChain> expected;
};

Scenario build_linear_multi_author(const fs::path& dir);
Scenario build_pure_addition(const fs::path& dir);
Scenario build_rename(const fs::path& dir);
Scenario build_merge(const fs::path& dir);
Scenario build_whitespace_binary(const fs::path& dir);
// Three fixes whose chains nest: F1 inside F3 with the same earliest WCC,
// F2 inside F3 with a different one.
Scenario build_dedup_topology(const fs::path& dir);
Scenario build_tiny(const fs::path& dir);

// Every scenario above except the tiny one, each in <root>/<name>.
std::vector<Scenario> build_all_scenarios(const fs::path& root);

// Deterministic pseudo-random unit-variance vector for `key`.
std::vector<double> stub_vector(std::string_view key, std::size_t dim, std::uint64_t seed);

semvec::ExchangeFile stub_word_vectors(const std::set<std::string>& words, std::size_t dim,
                                       std::uint64_t seed);

// Bag-of-words sentence vectors: sum of stub word vectors of the
// preprocessed text.
semvec::ExchangeFile stub_sentence_exchange(
    const std::vector<std::pair<std::string, std::string>>& texts, const cwe::StopWords& stopwords,
    std::size_t dim, std::uint64_t seed);

struct CorpusOptions {
  fs::path data_dir;  // shipped catalog, stop words, lexicon, goals, libraries
  std::size_t dim = 64;
  bool classifier_stub = true;
  std::size_t min_commits = 4;
  std::size_t jobs = 1;
  // Independent random stubs rarely agree, so the corpus assigns on any vote.
  int vote_k = 1;
};

struct Corpus {
  fs::path root;
  fs::path config;
  fs::path manifest;
  fs::path workspace;
  std::vector<Scenario> scenarios;
};

// Synthetic repositories plus manifest, config, word vectors, four stub
// exchange files and a stub classifier under `root`.
Corpus build_corpus(const fs::path& root, const CorpusOptions& options);

}  // namespace wm::fixtures
