#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "wm/git/repository.hpp"
#include "wm/util/process.hpp"
#include "wm/util/text.hpp"

namespace wm::fixtures {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> numbered(std::string_view stem, int n) {
  std::vector<std::string> lines;
  for (int i = 1; i <= n; ++i) lines.push_back(fmt::format("  {}_{} = {};", stem, i, i * 7));
  return lines;
}

std::vector<std::string> wrap(std::string_view cls, std::vector<std::string> body) {
  body.insert(body.begin(), fmt::format("class {} {{", cls));
  body.push_back("}");
  return body;
}

}  // namespace

TempDir::TempDir(std::string_view prefix) {
  std::string tmpl = (fs::temp_directory_path() / (std::string(prefix) + "-XXXXXX")).string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RepoBuilder::RepoBuilder(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  git({"init", "-q", "-b", "main"});
}

std::string RepoBuilder::git(const std::vector<std::string>& args, const Author* author,
                             std::optional<Timestamp> at) {
  std::vector<std::string> argv = {"git", "-c", "commit.gpgsign=false", "-c", "core.autocrlf=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  util::ProcessOptions opts;
  opts.cwd = dir_;
  opts.env = {{"GIT_CONFIG_NOSYSTEM", "1"}, {"GIT_CONFIG_GLOBAL", "/dev/null"}, {"LC_ALL", "C"}};
  const Author& who = author ? *author : kAlice;
  opts.env["GIT_AUTHOR_NAME"] = who.name;
  opts.env["GIT_AUTHOR_EMAIL"] = who.email;
  opts.env["GIT_COMMITTER_NAME"] = who.name;
  opts.env["GIT_COMMITTER_EMAIL"] = who.email;
  if (at) {
    const auto date = fmt::format("@{} +0000", *at);
    opts.env["GIT_AUTHOR_DATE"] = date;
    opts.env["GIT_COMMITTER_DATE"] = date;
  }
  auto r = util::run_process(argv, opts);
  if (!r.ok())
    throw std::runtime_error(fmt::format("git {} failed in {}: {}", args.empty() ? "" : args[0],
                                         dir_.string(), r.err));
  return util::trim(r.out);
}

std::vector<std::string> RepoBuilder::read_lines(const std::string& path) const {
  return util::split_lines(util::read_file((dir_ / path).string()));
}

void RepoBuilder::write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& l : lines) content += l + "\n";
  write_bytes(path, content);
}

void RepoBuilder::write_bytes(const std::string& path, const std::string& bytes) {
  fs::create_directories((dir_ / path).parent_path());
  std::ofstream out(dir_ / path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

void RepoBuilder::replace_line(const std::string& path, const std::string& from,
                               const std::string& to) {
  auto lines = read_lines(path);
  int hits = 0;
  for (auto& l : lines)
    if (l == from) {
      l = to;
      ++hits;
    }
  if (hits != 1)
    throw std::runtime_error(fmt::format("{}: expected one line '{}', found {}", path, from, hits));
  write_lines(path, lines);
}

void RepoBuilder::append_lines(const std::string& path, const std::vector<std::string>& extra) {
  auto lines = read_lines(path);
  // Insert before the closing brace so the file stays well formed.
  auto pos = lines.empty() ? lines.end() : lines.end() - 1;
  lines.insert(pos, extra.begin(), extra.end());
  write_lines(path, lines);
}

void RepoBuilder::remove_line(const std::string& path, const std::string& line) {
  auto lines = read_lines(path);
  auto it = std::find(lines.begin(), lines.end(), line);
  if (it == lines.end()) throw std::runtime_error(path + ": no line '" + line + "'");
  lines.erase(it);
  write_lines(path, lines);
}

void RepoBuilder::move(const std::string& from, const std::string& to) {
  fs::create_directories((dir_ / to).parent_path());
  git({"mv", from, to});
}

void RepoBuilder::remove(const std::string& path) { git({"rm", "-q", path}); }

std::string RepoBuilder::commit(const std::string& message, const Author& author, Timestamp at) {
  git({"add", "-A"});
  git({"commit", "-q", "-m", message}, &author, at);
  return git({"rev-parse", "HEAD"});
}

void RepoBuilder::branch(const std::string& name) { git({"branch", name}); }

void RepoBuilder::checkout(const std::string& name) { git({"checkout", "-q", name}); }

std::string RepoBuilder::merge(const std::string& branch, const std::string& message,
                               const Author& author, Timestamp at) {
  git({"merge", "-q", "--no-ff", "-m", message, branch}, &author, at);
  return git({"rev-parse", "HEAD"});
}

Scenario build_linear_multi_author(const fs::path& dir) {
  Scenario s{"linear", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Assets/Player.cs", wrap("Player", {"  int hp = 10;", "  void Move() {}",
                                                    "  void Jump() {}", "  void Shoot() {}"}));
  c["A"] = r.commit("Add player controller", kAlice, kEpoch);
  r.replace_line("Assets/Player.cs", "  void Jump() {}", "  void Jump() { vy = 5; }");
  c["B"] = r.commit("Improve jump handling", kBob, kEpoch + 3 * kDay);
  r.write_lines("Assets/Inventory.cs",
                wrap("Inventory", {"  List<Item> items;", "  void Drop(int i) { items.RemoveAt(i); }"}));
  c["C"] = r.commit("Add inventory system", kCarol, kEpoch + 5 * kDay);
  r.replace_line("Assets/Player.cs", "  void Move() {}", "  void Move() { x += dx; }");
  c["D"] = r.commit("Update movement speed", kAlice, kEpoch + 8 * kDay);
  r.replace_line("Assets/Player.cs", "  int hp = 10;", "  int hp = Clamp(10);");
  r.replace_line("Assets/Player.cs", "  void Jump() { vy = 5; }", "  void Jump() { if (grounded) vy = 5; }");
  c["WFC1"] = r.commit("Fix unchecked input validation of player state", kDave, kEpoch + 12 * kDay);
  r.replace_line("Assets/Inventory.cs", "  void Drop(int i) { items.RemoveAt(i); }",
                 "  void Drop(int i) { if (i < items.Count) items.RemoveAt(i); }");
  c["WFC2"] = r.commit("Fix out of bounds index in inventory drop", kCarol, kEpoch + 15 * kDay);
  r.append_lines("Assets/Player.cs", {"  void Crouch() {}"});
  c["E"] = r.commit("Add crouch move", kBob, kEpoch + 18 * kDay);

  s.expected = {{"WFC1", c["WFC1"], {c["A"], c["B"]}, std::nullopt},
                {"WFC2", c["WFC2"], {c["C"]}, std::nullopt}};
  return s;
}

Scenario build_pure_addition(const fs::path& dir) {
  Scenario s{"additive", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Assets/Door.cs", wrap("Door", {"  bool open;", "  void Toggle() { open = !open; }"}));
  c["A"] = r.commit("Add door trigger", kAlice, kEpoch);
  r.append_lines("Assets/Door.cs", {"  void Lock() { locked = true; }"});
  c["B"] = r.commit("Add lock support", kBob, kEpoch + 2 * kDay);
  r.append_lines("Assets/Door.cs", {"  void Guard() { if (user == null) return; }"});
  c["WFC1"] = r.commit("Fix missing null check exposure in door trigger", kCarol, kEpoch + 6 * kDay);
  r.remove_line("Assets/Door.cs", "  void Lock() { locked = true; }");
  c["WFC2"] = r.commit("Fix privilege issue by removing unguarded lock", kDave, kEpoch + 9 * kDay);

  s.expected = {{"WFC1", c["WFC1"], {}, szz::UntraceableReason::pure_addition},
                {"WFC2", c["WFC2"], {c["B"]}, std::nullopt}};
  return s;
}

Scenario build_rename(const fs::path& dir) {
  Scenario s{"rename", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Net/Socket.cs", wrap("Socket", numbered("sock", 8)));
  c["A"] = r.commit("Add socket wrapper", kAlice, kEpoch);
  r.replace_line("Net/Socket.cs", "  sock_2 = 14;", "  sock_2 = Read(14);");
  c["B"] = r.commit("Improve socket reads", kBob, kEpoch + 4 * kDay);
  r.move("Net/Socket.cs", "Net/Connection.cs");
  c["R"] = r.commit("Rename socket wrapper to connection", kCarol, kEpoch + 7 * kDay);
  r.replace_line("Net/Connection.cs", "  sock_4 = 28;", "  sock_4 = Check(28);");
  c["WFC1"] = r.commit("Fix buffer overflow in connection handshake", kDave, kEpoch + 10 * kDay);
  r.move("Net/Connection.cs", "Net/Transport.cs");
  r.replace_line("Net/Transport.cs", "  sock_2 = Read(14);", "  sock_2 = ReadBounded(14);");
  c["WFC2"] = r.commit("Fix unbounded read vulnerability and rename to transport", kAlice,
                       kEpoch + 14 * kDay);

  s.expected = {{"WFC1", c["WFC1"], {c["A"]}, std::nullopt},
                {"WFC2", c["WFC2"], {c["B"]}, std::nullopt}};
  return s;
}

Scenario build_merge(const fs::path& dir) {
  Scenario s{"merge", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Assets/Cam.cs", wrap("Cam", numbered("cam", 8)));
  c["A"] = r.commit("Add camera rig", kAlice, kEpoch);
  r.branch("feature");
  r.checkout("feature");
  r.replace_line("Assets/Cam.cs", "  cam_2 = 14;", "  cam_2 = Near(14);");
  c["B"] = r.commit("Tune near plane on feature branch", kBob, kEpoch + 2 * kDay);
  r.checkout("main");
  r.replace_line("Assets/Cam.cs", "  cam_6 = 42;", "  cam_6 = Far(42);");
  c["C"] = r.commit("Tune far plane", kCarol, kEpoch + 4 * kDay);
  c["M"] = r.merge("feature", "Fix camera clipping overflow from feature branch", kDave, kEpoch + 6 * kDay);
  r.replace_line("Assets/Cam.cs", "  cam_2 = Near(14);", "  cam_2 = NearClamped(14);");
  r.replace_line("Assets/Cam.cs", "  cam_6 = Far(42);", "  cam_6 = FarClamped(42);");
  c["WFC2"] = r.commit("Fix camera bounds overflow", kAlice, kEpoch + 9 * kDay);

  // The merge is diffed against its first parent (C), where the changed line
  // still comes from A.
  s.expected = {{"M", c["M"], {c["A"]}, std::nullopt},
                {"WFC2", c["WFC2"], {c["B"], c["C"]}, std::nullopt}};
  return s;
}

Scenario build_whitespace_binary(const fs::path& dir) {
  Scenario s{"assets", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Shaders/Blur.cs", {"class Blur {", "  int radius = 3;", "", "  int taps = 9;", "   ",
                                    "  float sigma = 1.5f;", "}"});
  r.write_bytes("Textures/noise.png", std::string("\x89PNG\r\n\x1a\n\0\0\0\rIHDR", 16));
  r.write_lines("Textures/noise.png.meta", {"guid: 1234", "mode: 1"});
  c["A"] = r.commit("Add blur shader and noise texture", kAlice, kEpoch);
  r.replace_line("Shaders/Blur.cs", "  float sigma = 1.5f;", "  float sigma = Sigma();");
  c["B"] = r.commit("Tune blur sigma", kBob, kEpoch + 3 * kDay);
  r.write_lines("Shaders/Blur.cs", {"class Blur {", "  int radius = 3;", "  int taps = 9;",
                                    "  float sigma = SigmaChecked();", "}"});
  r.write_lines("Textures/noise.png.meta", {"guid: 1234", "mode: 2"});
  c["WFC1"] = r.commit("Fix shader buffer overflow", kDave, kEpoch + 6 * kDay);
  r.write_bytes("Textures/noise.png", std::string("\x89PNG\r\n\x1a\n\0\0\0\rIHDX", 16));
  c["WFC2"] = r.commit("Fix texture exposure in noise asset", kCarol, kEpoch + 8 * kDay);

  // Blank and whitespace-only removed lines are not attributed; the .meta
  // change is ignored.
  s.expected = {{"WFC1", c["WFC1"], {c["B"]}, std::nullopt},
                {"WFC2", c["WFC2"], {}, szz::UntraceableReason::binary_only}};
  return s;
}

Scenario build_dedup_topology(const fs::path& dir) {
  Scenario s{"dedup", dir, {}, {}};
  RepoBuilder r(dir);
  auto& c = s.commits;
  r.write_lines("Assets/Grab.cs", wrap("Grab", {"  a1 = 1;", "  a2 = 2;", "  a3 = 3;", "  a4 = 4;"}));
  c["W1"] = r.commit("Add grab interaction", kAlice, kEpoch);
  r.write_lines("Assets/Haptics.cs", wrap("Haptics", {"  b1 = 1;", "  b2 = 2;", "  b3 = 3;"}));
  c["W2"] = r.commit("Add haptics module", kBob, kEpoch + 2 * kDay);
  r.replace_line("Assets/Grab.cs", "  a3 = 3;", "  a3 = 30;");
  r.replace_line("Assets/Grab.cs", "  a4 = 4;", "  a4 = 40;");
  c["W3"] = r.commit("Update grab thresholds", kCarol, kEpoch + 4 * kDay);
  r.replace_line("Assets/Grab.cs", "  a1 = 1;", "  a1 = Lock(1);");
  r.replace_line("Assets/Grab.cs", "  a3 = 30;", "  a3 = Lock(30);");
  c["F1"] = r.commit("Fix race condition in grab synchronization", kDave, kEpoch + 7 * kDay);
  r.replace_line("Assets/Haptics.cs", "  b1 = 1;", "  b1 = Bounded(1);");
  c["F2"] = r.commit("Fix haptics buffer overflow vulnerability", kBob, kEpoch + 9 * kDay);
  r.replace_line("Assets/Grab.cs", "  a2 = 2;", "  a2 = Lock(2);");
  r.replace_line("Assets/Grab.cs", "  a4 = 40;", "  a4 = Lock(40);");
  r.replace_line("Assets/Haptics.cs", "  b2 = 2;", "  b2 = Bounded(2);");
  c["F3"] = r.commit("Fix grab lock race and haptics thread synchronization", kAlice,
                     kEpoch + 12 * kDay);

  s.expected = {{"F1", c["F1"], {c["W1"], c["W3"]}, std::nullopt},
                {"F2", c["F2"], {c["W2"]}, std::nullopt},
                {"F3", c["F3"], {c["W1"], c["W2"], c["W3"]}, std::nullopt}};
  return s;
}

Scenario build_tiny(const fs::path& dir) {
  Scenario s{"tiny", dir, {}, {}};
  RepoBuilder r(dir);
  r.write_lines("README.md", {"# tiny"});
  s.commits["A"] = r.commit("Initial import", kAlice, kEpoch);
  r.write_lines("README.md", {"# tiny", "more"});
  s.commits["B"] = r.commit("Fix typo", kAlice, kEpoch + kDay);
  return s;
}

std::vector<Scenario> build_all_scenarios(const fs::path& root) {
  return {build_linear_multi_author(root / "linear"), build_pure_addition(root / "additive"),
          build_rename(root / "rename"),              build_merge(root / "merge"),
          build_whitespace_binary(root / "assets"),   build_dedup_topology(root / "dedup")};
}

std::vector<double> stub_vector(std::string_view key, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(fnv1a(key) ^ (seed * 0x9e3779b97f4a7c15ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

semvec::ExchangeFile stub_word_vectors(const std::set<std::string>& words, std::size_t dim,
                                       std::uint64_t seed) {
  semvec::ExchangeFile file;
  file.dimension = dim;
  file.comments.push_back(fmt::format("model_revision=stub-words-seed-{}", seed));
  for (const auto& w : words) file.records.emplace_back(w, stub_vector(w, dim, seed));
  return file;
}

semvec::ExchangeFile stub_sentence_exchange(
    const std::vector<std::pair<std::string, std::string>>& texts, const cwe::StopWords& stopwords,
    std::size_t dim, std::uint64_t seed) {
  semvec::ExchangeFile file;
  file.dimension = dim;
  file.comments.push_back(fmt::format("model_revision=stub-bow-seed-{}", seed));
  for (const auto& [id, text] : texts) {
    std::vector<double> sum(dim, 0.0);
    for (const auto& t : cwe::preprocess(text, stopwords)) {
      auto v = stub_vector(t, dim, seed);
      for (std::size_t k = 0; k < dim; ++k) sum[k] += v[k];
    }
    file.records.emplace_back(id, std::move(sum));
  }
  return file;
}

Corpus build_corpus(const fs::path& root, const CorpusOptions& options) {
  Corpus corpus;
  corpus.root = root;
  corpus.workspace = root / "ws";
  fs::create_directories(root / "repos");
  corpus.scenarios = build_all_scenarios(root / "repos");
  auto tiny = build_tiny(root / "repos" / "tiny");

  static const std::map<std::string, std::string> kCategory = {
      {"linear", "game"},   {"additive", "utility"},        {"rename", "sdk"},
      {"merge", "plugin"},  {"assets", "graphics_engine"}, {"dedup", "module"},
      {"tiny", "tutorial"}};
  std::string manifest = "# synthetic corpus\n";
  for (const auto& s : corpus.scenarios)
    manifest += fmt::format("{} id={} category={}\n", s.path.string(), s.name, kCategory.at(s.name));
  manifest += fmt::format("{} id=tiny category=tutorial\n", tiny.path.string());
  manifest += fmt::format("{} id=gone category=game\n", (root / "repos" / "missing").string());
  corpus.manifest = root / "manifest.txt";
  util::write_file_atomic(corpus.manifest.string(), manifest);

  const auto data = options.data_dir;
  auto stopwords = cwe::load_stopwords((data / "stopwords.txt").string());
  auto catalog = cwe::load_catalog((data / "cwe699.jsonl").string(), stopwords);

  std::vector<std::pair<std::string, std::string>> texts;
  std::set<std::string> vocabulary;
  for (const auto& cat : catalog.categories()) {
    texts.emplace_back(cat.cwe_id, cat.description);
    vocabulary.insert(cat.tokens.begin(), cat.tokens.end());
  }
  auto add_repo = [&](const fs::path& path) {
    for (const auto& commit : git::Repository(path).read_all_commits()) {
      texts.emplace_back(commit.hash, commit.message);
      for (auto& t : cwe::preprocess(commit.message, stopwords)) vocabulary.insert(t);
    }
  };
  for (const auto& s : corpus.scenarios) add_repo(s.path);
  add_repo(tiny.path);

  fs::create_directories(root / "vectors");
  semvec::write_exchange((root / "vectors" / "words.wvec").string(),
                         stub_word_vectors(vocabulary, options.dim, 1));
  std::vector<std::string> exchange;
  for (std::uint64_t seed = 2; seed <= 5; ++seed) {
    auto path = root / "vectors" / fmt::format("model{}.wvec", seed);
    semvec::write_exchange(path.string(), stub_sentence_exchange(texts, stopwords, options.dim, seed));
    exchange.push_back(path.string());
  }

  std::string classifier_line;
  if (options.classifier_stub) {
    const auto script = root / "classifier.sh";
    util::write_file_atomic(script.string(),
                            "#!/bin/sh\n"
                            "# Scores 0.9 for requests mentioning \"overflow\", 0.1 otherwise.\n"
                            "while IFS= read -r line; do\n"
                            "  hash=$(printf '%s' \"$line\" | sed -n 's/.*\"hash\":\"\\([0-9a-f]*\\)\".*/\\1/p')\n"
                            "  case \"$line\" in\n"
                            "    *overflow*) echo \"$hash 0.9\" ;;\n"
                            "    *) echo \"$hash 0.1\" ;;\n"
                            "  esac\n"
                            "done\n");
    fs::permissions(script, fs::perms::owner_all, fs::perm_options::add);
    classifier_line = "classifier_cmd = " + script.string() + "\n";
  }

  std::string exchange_list;
  for (const auto& e : exchange) exchange_list += (exchange_list.empty() ? "" : ",") + e;
  const std::string config = fmt::format(
      "[pipeline]\n"
      "manifest = {}\n"
      "workspace = {}\n"
      "jobs = {}\n"
      "\n[ingest]\n"
      "min_commits = {}\n"
      "\n[filter]\n"
      "lexicon = {}\n"
      "{}"
      "threshold = 0.5\n"
      "\n[classify]\n"
      "catalog = {}\n"
      "stopwords = {}\n"
      "word_vectors = {}\n"
      "exchange = {}\n"
      "vote_k = {}\n"
      "\n[trace]\n"
      "ignore_ext = .meta\n"
      "\n[report]\n"
      "libraries = {}\n"
      "goals = {}\n",
      corpus.manifest.string(), corpus.workspace.string(), options.jobs, options.min_commits,
      (data / "lexicon.txt").string(), classifier_line, (data / "cwe699.jsonl").string(),
      (data / "stopwords.txt").string(), (root / "vectors" / "words.wvec").string(), exchange_list, options.vote_k,
      (data / "libraries.txt").string(), (data / "goals.txt").string());
  corpus.config = root / "weaknessminer.ini";
  util::write_file_atomic(corpus.config.string(), config);
  return corpus;
}

}  // namespace wm::fixtures
