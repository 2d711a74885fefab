#include "wm/util/jsonl.hpp"

#include "wm/error.hpp"
#include "wm/util/text.hpp"

namespace wm::util {

std::vector<Json> read_jsonl(const std::string& path) {
  std::string content = read_file(path);
  std::vector<Json> records;
  size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw ArtifactMalformed(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_jsonl(const std::string& path, const std::vector<Json>& records) {
  std::string content;
  for (const auto& r : records) {
    content += r.dump(-1, ' ', false, Json::error_handler_t::replace);
    content += '\n';
  }
  write_file_atomic(path, content);
}

}  // namespace wm::util
