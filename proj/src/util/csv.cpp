#include "wm/util/csv.hpp"

#include <cmath>

#include <fmt/format.h>

#include "wm/error.hpp"

namespace wm::util {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size())
    throw InvalidArgument(fmt::format("csv row has {} fields, header has {}",
                                      fields.size(), header_.size()));
  rows_.push_back(std::move(fields));
}

std::string CsvWriter::quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvWriter::str() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote(row[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

std::string fixed(double value, int decimals) {
  // Round half away from zero on the decimal value, then print; avoids "-0.00".
  double scale = std::pow(10.0, decimals);
  double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;
  return fmt::format("{:.{}f}", rounded, decimals);
}

}  // namespace wm::util
