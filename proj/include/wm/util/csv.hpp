#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wm::util {

// RFC 4180 writer: CRLF record ends, fields quoted only when they contain a
// comma, quote, CR or LF; embedded quotes are doubled.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

  static std::string quote(std::string_view field);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Fixed-point formatting used by every report table.
std::string fixed(double value, int decimals);

}  // namespace wm::util
