#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wm/semvec/semvec.hpp"

namespace wm::semvec {

// WVEC1 text format:
//   WVEC1 dim=<d>
//   <id>\t<v1>,<v2>,...,<vd>
// Values use the shortest decimal that round-trips to the same double. Lines
// starting with '#' are comments (e.g. `# model_revision=...`).
struct ExchangeFile {
  std::size_t dimension = 0;
  std::vector<std::string> comments;
  std::vector<std::pair<std::string, std::vector<double>>> records;
};

// Throws ExchangeMalformed on a bad header, a record of the wrong length, a
// non-finite or unparsable value, or a duplicate id.
ExchangeFile parse_exchange(std::string_view text);
ExchangeFile load_exchange(const std::string& path);

std::string format_exchange(const ExchangeFile& file);
void write_exchange(const std::string& path, const ExchangeFile& file);

std::string format_double(double value);

WordVectorTable to_word_table(const ExchangeFile& file);

}  // namespace wm::semvec
