#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/core_model.hpp"
#include "transit/csv.hpp"

namespace transit::io {

using ordered_json = nlohmann::ordered_json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keys starting with this prefix carry store bookkeeping, not feed attributes.
inline constexpr char kMetaPrefix = '_';

// Serialises the 17 feed attributes in schema order, followed by any extra
// attributes. With `with_meta`, `_seq` and `_late` are appended.
ordered_json to_json(const RawTuple& t, bool with_meta = false);
std::string to_ndjson_line(const RawTuple& t, bool with_meta = false);

// Lat/lng accept numbers or numeric strings; timestamp accepts epoch seconds or
// ISO-8601. Values that cannot be parsed are left absent. `_seq` in the record
// overrides `default_seq`.
RawTuple raw_from_json(const nlohmann::json& j, std::uint64_t default_seq);
RawTuple raw_from_ndjson_line(std::string_view line, std::uint64_t default_seq);

ordered_json to_json(const ContextTuple& t);
std::string to_ndjson_line(const ContextTuple& t);
ContextTuple context_from_json(const ordered_json& j, std::uint64_t default_seq = 0);

// Streaming reader for NDJSON or CSV feed files (chosen by `.csv` extension).
// Sequence numbers default to the record's position in the file.
class TupleFileReader {
 public:
  explicit TupleFileReader(const std::filesystem::path& path);

  // nullopt at end of file; throws ParseError on a malformed record after
  // advancing past it.
  std::optional<RawTuple> next();
  std::size_t records_read() const { return records_; }

 private:
  std::ifstream in_;
  bool is_csv_ = false;
  std::unique_ptr<csv::Reader> csv_;
  std::size_t records_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<RawTuple> read_tuples(const std::filesystem::path& path);
void write_tuples(const std::filesystem::path& path, const std::vector<RawTuple>& tuples,
                  bool with_meta = false);

std::vector<ContextTuple> read_context(const std::filesystem::path& path);

// Writes `content` atomically enough for tests and CLI use (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace transit::io
