#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace transit::csv {

// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
// quotes; embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

std::string quote_field(std::string_view field);

// Reads a header row and then yields records as column vectors.
class Reader {
 public:
  explicit Reader(std::istream& in);

  const std::vector<std::string>& header() const { return header_; }
  std::optional<std::size_t> column(std::string_view name) const;

  // False at end of input. Blank lines are skipped.
  bool next(std::vector<std::string>& record);
  std::size_t line_number() const { return line_no_; }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_no_ = 0;
};

}  // namespace transit::csv
