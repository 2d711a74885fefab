#include "wm/semvec/exchange.hpp"

#include <charconv>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "wm/error.hpp"
#include "wm/util/text.hpp"

namespace wm::semvec {

namespace {

constexpr std::string_view kMagic = "WVEC1";

double parse_value(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ExchangeMalformed(fmt::format("line {}: bad value '{}'", line_no, s));
  if (!std::isfinite(v)) throw ExchangeMalformed(fmt::format("line {}: non-finite value", line_no));
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

ExchangeFile parse_exchange(std::string_view text) {
  ExchangeFile file;
  auto lines = util::split_lines(text);
  std::size_t i = 0;
  // Leading comments are allowed before the header.
  while (i < lines.size() && (lines[i].empty() || lines[i][0] == '#')) {
    if (!lines[i].empty()) file.comments.push_back(util::trim(lines[i].substr(1)));
    ++i;
  }
  if (i == lines.size()) throw ExchangeMalformed("missing WVEC1 header");
  {
    const std::string& header = lines[i];
    const std::string prefix = std::string(kMagic) + " dim=";
    if (!util::starts_with(header, prefix))
      throw ExchangeMalformed("bad header '" + header + "'");
    std::string_view d = std::string_view(header).substr(prefix.size());
    std::size_t dim = 0;
    auto res = std::from_chars(d.data(), d.data() + d.size(), dim);
    if (res.ec != std::errc() || res.ptr != d.data() + d.size() || dim == 0)
      throw ExchangeMalformed("bad dimension in header '" + header + "'");
    file.dimension = dim;
    ++i;
  }

  std::unordered_set<std::string> seen;
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t line_no = i + 1;
    if (line.empty()) continue;
    if (line[0] == '#') {
      file.comments.push_back(util::trim(line.substr(1)));
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ExchangeMalformed(fmt::format("line {}: expected '<id>\\t<values>'", line_no));
    std::string id = line.substr(0, tab);
    if (!seen.insert(id).second)
      throw ExchangeMalformed(fmt::format("line {}: duplicate id '{}'", line_no, id));
    std::vector<double> values;
    values.reserve(file.dimension);
    std::string_view rest = std::string_view(line).substr(tab + 1);
    for (;;) {
      auto comma = rest.find(',');
      values.push_back(parse_value(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (values.size() != file.dimension)
      throw ExchangeMalformed(fmt::format("line {}: '{}' has {} values, header says {}", line_no, id,
                                          values.size(), file.dimension));
    file.records.emplace_back(std::move(id), std::move(values));
  }
  return file;
}

ExchangeFile load_exchange(const std::string& path) {
  try {
    return parse_exchange(util::read_file(path));
  } catch (const ExchangeMalformed& e) {
    throw ExchangeMalformed(path + ": " + e.what());
  }
}

std::string format_exchange(const ExchangeFile& file) {
  std::string out;
  for (const auto& c : file.comments) out += "# " + c + "\n";
  out += fmt::format("{} dim={}\n", kMagic, file.dimension);
  for (const auto& [id, values] : file.records) {
    if (values.size() != file.dimension)
      throw DimensionMismatch(fmt::format("record '{}' has {} values, file dimension is {}", id,
                                          values.size(), file.dimension));
    out += id;
    out += '\t';
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) out += ',';
      out += format_double(values[k]);
    }
    out += '\n';
  }
  return out;
}

void write_exchange(const std::string& path, const ExchangeFile& file) {
  util::write_file_atomic(path, format_exchange(file));
}

WordVectorTable to_word_table(const ExchangeFile& file) {
  WordVectorTable table;
  table.dimension = file.dimension;
  table.vectors.reserve(file.records.size());
  for (const auto& [id, values] : file.records) table.vectors.emplace(id, values);
  return table;
}

}  // namespace wm::semvec
