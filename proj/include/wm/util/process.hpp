#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wm::util {

struct ProcessOptions {
  std::filesystem::path cwd;
  // Added to (or replacing entries of) the inherited environment.
  std::map<std::string, std::string> env;
  std::string stdin_data;
};

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool spawned = false;

  bool ok() const { return spawned && exit_code == 0; }
};

// Runs argv[0] (looked up on PATH) without a shell. Never throws on a
// non-zero exit; `spawned` is false when the program could not be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& options = {});

// Runs `command` through /bin/sh -c.
ProcessResult run_shell(const std::string& command,
                        const ProcessOptions& options = {});

}  // namespace wm::util
