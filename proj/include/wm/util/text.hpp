#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wm::util {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Lowercased maximal runs of word characters ([A-Za-z0-9_] plus any non-ASCII
// byte, so UTF-8 sequences stay inside their word).
std::vector<std::string> word_tokens(std::string_view text);

// Lowercases and collapses every whitespace run to one space.
std::string normalize_spaces(std::string_view text);

// Case-insensitive term match. Single words match whole tokens only; terms
// containing whitespace match as substrings of the space-normalized text.
class TermMatcher {
 public:
  explicit TermMatcher(std::string_view text);
  bool matches(std::string_view term) const;

 private:
  std::vector<std::string> tokens_;
  std::string normalized_;
};

// Parses files made of `[section]` headers followed by one entry per line.
// Blank lines and lines starting with '#' are ignored. Entries are trimmed.
struct Section {
  std::string name;
  std::vector<std::string> entries;
};
std::vector<Section> parse_sectioned_list(std::string_view text);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace wm::util
