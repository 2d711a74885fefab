// Writes the synthetic corpus used by the end-to-end tests: scripted git
// repositories, manifest, stub vectors, stub classifier and config.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic weaknessminer corpus"};
  std::string out;
  std::string data = WM_DATA_DIR;
  wm::fixtures::CorpusOptions options;
  app.add_option("out", out, "Target directory (must not exist)")->required();
  app.add_option("--data", data, "Directory with the shipped catalog and word lists");
  app.add_option("--dim", options.dim, "Stub vector dimension");
  app.add_option("--vote-k", options.vote_k, "vote_k written to the config");
  CLI11_PARSE(app, argc, argv);

  if (std::filesystem::exists(out)) {
    std::cerr << out << " already exists\n";
    return 2;
  }
  options.data_dir = data;
  auto corpus = wm::fixtures::build_corpus(std::filesystem::absolute(out), options);
  std::cout << corpus.config.string() << "\n";
  return 0;
}
