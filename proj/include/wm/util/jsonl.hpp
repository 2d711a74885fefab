#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wm::util {

using Json = nlohmann::json;

// Line-delimited JSON. Objects serialize with sorted keys, so equal records
// always produce equal bytes.
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& records);

template <typename T>
std::vector<Json> to_json_lines(const std::vector<T>& items) {
  std::vector<Json> out;
  out.reserve(items.size());
  for (const auto& item : items) out.emplace_back(item);
  return out;
}

}  // namespace wm::util
