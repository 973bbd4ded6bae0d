#include "transit/tuple_io.hpp"

#include <charconv>
#include <sstream>

namespace transit::io {

namespace {

template <typename Json>
std::optional<double> parse_double(const Json& v) {
  if (v.is_number()) return v.template get<double>();
  if (v.is_string()) {
    const auto& s = v.template get_ref<const std::string&>();
    double out = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return out;
  }
  return std::nullopt;
}

template <typename Json>
std::optional<EpochSeconds> parse_time_value(const Json& v) {
  if (v.is_number_integer()) return v.template get<EpochSeconds>();
  if (v.is_number_float()) {
    const double d = v.template get<double>();
    if (d != static_cast<double>(static_cast<EpochSeconds>(d))) return std::nullopt;
    return static_cast<EpochSeconds>(d);
  }
  if (v.is_string()) return parse_timestamp(v.template get_ref<const std::string&>());
  return std::nullopt;
}

template <typename Json>
std::optional<std::string> text_value(const Json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) return v.template get<std::string>();
  return v.dump();
}

void add_feed_fields(ordered_json& j, const RawTuple& t) {
  for (std::size_t i = 0; i < kDescriptorCount; ++i) {
    if (t.descriptors[i]) j[std::string(kDescriptorNames[i])] = *t.descriptors[i];
  }
  for (const auto& [k, v] : t.extras) j[k] = v;
  if (t.lat) j[std::string(kLatField)] = *t.lat;
  if (t.lng) j[std::string(kLngField)] = *t.lng;
  if (t.timestamp) j[std::string(kTimestampField)] = *t.timestamp;
}

template <typename Json>
RawTuple raw_from_any(const Json& j, std::uint64_t default_seq) {
  if (!j.is_object()) throw ParseError("tuple record is not a JSON object");
  RawTuple t;
  t.seq = default_seq;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    if (key == kLatField) {
      t.lat = parse_double(v);
    } else if (key == kLngField) {
      t.lng = parse_double(v);
    } else if (key == kTimestampField) {
      t.timestamp = parse_time_value(v);
    } else if (auto d = descriptor_index(key)) {
      t.descriptors[*d] = text_value(v);
    } else if (!key.empty() && key.front() == kMetaPrefix) {
      if (key == "_seq" && v.is_number_unsigned()) t.seq = v.template get<std::uint64_t>();
      if (key == "_late" && v.is_boolean()) t.late = v.template get<bool>();
    } else if (auto s = text_value(v)) {
      t.extras.emplace_back(key, *s);
    }
  }
  return t;
}

RawTuple raw_from_csv(const csv::Reader& reader, const std::vector<std::string>& rec,
                      std::uint64_t seq) {
  RawTuple t;
  t.seq = seq;
  const auto& header = reader.header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (i >= rec.size() || rec[i].empty()) continue;
    const std::string& value = rec[i];
    if (name == kLatField) {
      t.lat = parse_double(nlohmann::json(value));
    } else if (name == kLngField) {
      t.lng = parse_double(nlohmann::json(value));
    } else if (name == kTimestampField) {
      t.timestamp = parse_timestamp(value);
    } else if (auto d = descriptor_index(name)) {
      t.descriptors[*d] = value;
    } else if (!name.empty() && name.front() == kMetaPrefix) {
      if (name == "_seq") {
        std::uint64_t s = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
        if (ec == std::errc{}) t.seq = s;
      }
    } else {
      t.extras.emplace_back(name, value);
    }
  }
  return t;
}

}  // namespace

ordered_json to_json(const RawTuple& t, bool with_meta) {
  ordered_json j = ordered_json::object();
  add_feed_fields(j, t);
  if (with_meta) {
    j["_seq"] = t.seq;
    if (t.late) j["_late"] = true;
  }
  return j;
}

std::string to_ndjson_line(const RawTuple& t, bool with_meta) { return to_json(t, with_meta).dump(); }

RawTuple raw_from_json(const nlohmann::json& j, std::uint64_t default_seq) {
  return raw_from_any(j, default_seq);
}

RawTuple raw_from_ndjson_line(std::string_view line, std::uint64_t default_seq) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON record");
  return raw_from_any(j, default_seq);
}

ordered_json to_json(const ContextTuple& t) {
  ordered_json j = ordered_json::object();
  add_feed_fields(j, t.base);
  j["a18_motion"] = std::string(to_string(t.motion));
  j["a19_activity"] = std::string(to_string(t.activity));
  j["a20_street"] = t.street;
  if (t.station) {
    j["a21_station"] = ordered_json{{"station_id", t.station->station_id},
                                    {"direction", std::string(to_string(t.station->direction))}};
  } else {
    j["a21_station"] = nullptr;
  }
  if (t.intersection) {
    j["a22_intersection"] = *t.intersection;
  } else {
    j["a22_intersection"] = nullptr;
  }
  j["a23_event"] = std::string(to_string(t.event));
  switch (t.position.kind) {
    case TripPosition::Kind::origin: j["a24_trip_position"] = "origin"; break;
    case TripPosition::Kind::destination: j["a24_trip_position"] = "destination"; break;
    case TripPosition::Kind::index: j["a24_trip_position"] = t.position.index; break;
  }
  return j;
}

std::string to_ndjson_line(const ContextTuple& t) { return to_json(t).dump(); }

ContextTuple context_from_json(const ordered_json& j, std::uint64_t default_seq) {
  static const char* const kContextKeys[] = {"a18_motion",       "a19_activity",     "a20_street",
                                             "a21_station",      "a22_intersection", "a23_event",
                                             "a24_trip_position"};
  ordered_json base = j;
  for (const char* k : kContextKeys) {
    if (!j.contains(k)) throw ParseError(std::string("context record lacks ") + k);
    base.erase(k);
  }
  ContextTuple c;
  c.base = raw_from_any(base, default_seq);
  c.motion = parse_motion(j.at("a18_motion").get<std::string>());
  c.activity = parse_activity(j.at("a19_activity").get<std::string>());
  c.street = j.at("a20_street").get<std::string>();
  if (const auto& s = j.at("a21_station"); !s.is_null()) {
    c.station = StationTag{s.at("station_id").get<std::string>(),
                           parse_direction(s.at("direction").get<std::string>())};
  }
  if (const auto& x = j.at("a22_intersection"); !x.is_null()) c.intersection = x.get<std::string>();
  c.event = parse_event(j.at("a23_event").get<std::string>());
  const auto& pos = j.at("a24_trip_position");
  if (pos.is_string()) {
    const auto& p = pos.get_ref<const std::string&>();
    if (p == "origin") {
      c.position = TripPosition::origin();
    } else if (p == "destination") {
      c.position = TripPosition::destination();
    } else {
      throw ParseError("bad a24_trip_position: " + p);
    }
  } else {
    c.position = TripPosition::at(pos.get<std::uint32_t>());
  }
  return c;
}

TupleFileReader::TupleFileReader(const std::filesystem::path& path) : in_(path) {
  if (!in_) throw std::runtime_error("cannot open " + path.string());
  is_csv_ = path.extension() == ".csv";
  if (is_csv_) csv_ = std::make_unique<csv::Reader>(in_);
}

std::optional<RawTuple> TupleFileReader::next() {
  if (is_csv_) {
    std::vector<std::string> rec;
    if (!csv_->next(rec)) return std::nullopt;
    return raw_from_csv(*csv_, rec, records_++);
  }
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty() || line == "\r") continue;
    const std::uint64_t seq = records_++;
    try {
      return raw_from_ndjson_line(line, seq);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

std::vector<RawTuple> read_tuples(const std::filesystem::path& path) {
  TupleFileReader reader(path);
  std::vector<RawTuple> out;
  while (auto t = reader.next()) out.push_back(std::move(*t));
  return out;
}

void write_tuples(const std::filesystem::path& path, const std::vector<RawTuple>& tuples,
                  bool with_meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : tuples) out << to_ndjson_line(t, with_meta) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ContextTuple> read_context(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ContextTuple> out;
  std::string line;
  std::uint64_t seq = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed context record");
    out.push_back(context_from_json(j, seq++));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace transit::io
