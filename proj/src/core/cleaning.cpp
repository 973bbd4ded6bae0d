#include "transit/cleaning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace transit::clean {

MissingScan detect_missing(std::span<const RawTuple> trip, EpochSeconds cadence_s) {
  MissingScan scan;
  if (cadence_s <= 0) throw std::invalid_argument("cadence must be positive");
  for (std::size_t i = 1; i < trip.size(); ++i) {
    const EpochSeconds a = trip[i - 1].timestamp.value_or(0);
    const EpochSeconds b = trip[i].timestamp.value_or(0);
    const EpochSeconds dt = b - a;
    // dt > 1.5 cadence, kept in integers
    if (2 * dt <= 3 * cadence_s) continue;
    const auto slots = static_cast<std::size_t>(std::llround(static_cast<double>(dt) / static_cast<double>(cadence_s)));
    const std::size_t missing = slots - 1;
    scan.missing += missing;
    scan.gaps.push_back({a, b, missing});
  }
  return scan;
}

DedupResult dedup(std::vector<RawTuple> trip) {
  std::erase_if(trip, [](const RawTuple& t) { return !t.timestamp; });
  std::sort(trip.begin(), trip.end(), [](const RawTuple& a, const RawTuple& b) {
    return std::tie(*a.timestamp, a.seq) < std::tie(*b.timestamp, b.seq);
  });
  DedupResult out;
  out.tuples.reserve(trip.size());
  for (auto& t : trip) {
    if (!out.tuples.empty() && out.tuples.back().timestamp == t.timestamp) {
      const auto& kept = out.tuples.back();
      ++out.removed;
      if (kept.lat != t.lat || kept.lng != t.lng) ++out.conflicts;
      continue;
    }
    out.tuples.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string fold(std::string_view s) {
  std::string out = collapse_whitespace(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void CanonicalTable::add(std::string attribute, std::string observed, std::string canonical) {
  auto& e = entries_[attribute];
  e.folded[fold(observed)] = canonical;
  e.folded.emplace(fold(canonical), canonical);
  e.exact[std::move(observed)] = canonical;
  e.canonical.insert(std::move(canonical));
}

CanonicalTable CanonicalTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("canonicalization table must be a JSON object");
  CanonicalTable t;
  for (const auto& [attr, map] : j.items()) {
    if (!map.is_object()) throw std::invalid_argument("canonicalization entry for " + attr + " must be an object");
    for (const auto& [observed, canonical] : map.items()) t.add(attr, observed, canonical.get<std::string>());
  }
  return t;
}

CanonicalTable CanonicalTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open canonicalization table " + path.string());
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json CanonicalTable::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [attr, e] : entries_) {
    for (const auto& [observed, canonical] : e.exact) j[attr][observed] = canonical;
  }
  return j;
}

bool CanonicalTable::has_attribute(std::string_view attribute) const { return entries_.find(attribute) != entries_.end(); }

bool CanonicalTable::is_canonical(std::string_view attribute, std::string_view value) const {
  const auto it = entries_.find(attribute);
  return it != entries_.end() && it->second.canonical.count(value) > 0;
}

std::optional<std::string> CanonicalTable::lookup(std::string_view attribute, std::string_view value) const {
  const auto it = entries_.find(attribute);
  if (it == entries_.end()) return std::nullopt;
  const auto& e = it->second;
  if (auto x = e.exact.find(value); x != e.exact.end()) return x->second;
  if (auto f = e.folded.find(fold(value)); f != e.folded.end()) return f->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

enum class ValueKind { identifier, digits, clock, text };

ValueKind kind_of(Descriptor d) {
  switch (d) {
    case Descriptor::vlr_id:
      return ValueKind::digits;
    case Descriptor::trip_start:
    case Descriptor::trip_finish:
      return ValueKind::clock;
    case Descriptor::route_name:
    case Descriptor::route_nickname:
    case Descriptor::bdescription:
      return ValueKind::text;
    default:
      return ValueKind::identifier;
  }
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == ':' || c == '-';
  });
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// HH:MM:SS with HH up to 47 (GTFS service days run past midnight).
bool is_clock(std::string_view s) {
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') return false;
  for (std::size_t i : {0, 1, 3, 4, 6, 7}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int h = (s[0] - '0') * 10 + (s[1] - '0');
  const int m = (s[3] - '0') * 10 + (s[4] - '0');
  const int sec = (s[6] - '0') * 10 + (s[7] - '0');
  return h < 48 && m < 60 && sec < 60;
}

bool is_clean_text(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::iscntrl(static_cast<unsigned char>(c))) return false;
  }
  return collapse_whitespace(s) == s;
}

bool valid(Descriptor d, std::string_view attr, std::string_view v, const CanonicalTable& table) {
  if (v == kNotAvailable) return !is_essential(d);
  if (table.has_attribute(attr)) return table.is_canonical(attr, v);
  switch (kind_of(d)) {
    case ValueKind::identifier:
      return is_identifier(v);
    case ValueKind::digits:
      return is_digits(v);
    case ValueKind::clock:
      return is_clock(v);
    case ValueKind::text:
      return is_clean_text(v);
  }
  return false;
}

std::optional<std::string> standardize(Descriptor d, std::string_view attr, std::string_view v,
                                       const CanonicalTable& table) {
  if (auto c = table.lookup(attr, v)) return c;
  if (table.has_attribute(attr)) return std::nullopt;
  std::string s = collapse_whitespace(v);
  switch (kind_of(d)) {
    case ValueKind::identifier:
      if (is_identifier(s)) return s;
      break;
    case ValueKind::digits:
      if (is_digits(s)) return s;
      break;
    case ValueKind::clock: {
      // H:MM:SS, HH:M:SS and friends
      int parts[3] = {-1, -1, -1};
      int p = 0;
      std::size_t digits = 0;
      bool ok = true;
      for (char c : s) {
        if (c == ':') {
          if (digits == 0 || ++p > 2) ok = false;
          digits = 0;
        } else if (std::isdigit(static_cast<unsigned char>(c)) && digits < 2) {
          parts[p] = (parts[p] < 0 ? 0 : parts[p] * 10) + (c - '0');
          ++digits;
        } else {
          ok = false;
        }
      }
      if (ok && p == 2 && digits > 0) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", parts[0], parts[1], parts[2]);
        if (is_clock(buf)) return std::string(buf);
      }
      break;
    }
    case ValueKind::text:
      if (is_clean_text(s)) return s;
      break;
  }
  return std::nullopt;
}

}  // namespace

bool is_essential(Descriptor d) { return d == kRouteIdField || d == kTripIdField; }

RepairOutcome repair_attributes(RawTuple& t, const CanonicalTable& table) {
  RepairOutcome out;

  // Attributes outside the schema are dropped first.
  out.stripped = t.extras.size();
  t.extras.clear();

  auto reject = [&](std::string why) {
    out.deleted = true;
    out.reason = std::move(why);
    return out;
  };

  if (!t.timestamp) return reject("missing timestamp");
  if (!t.lat || !t.lng) return reject("missing coordinates");
  if (!std::isfinite(*t.lat) || !std::isfinite(*t.lng) || *t.lat < -90.0 || *t.lat > 90.0 || *t.lng < -180.0 ||
      *t.lng > 180.0) {
    return reject("coordinates out of range");
  }

  // Fill missing values and standardize invalid ones.
  for (std::size_t i = 0; i < kDescriptorCount; ++i) {
    const auto d = static_cast<Descriptor>(i);
    const std::string_view attr = kDescriptorNames[i];
    auto& value = t.descriptors[i];
    if (value && !value->empty() && !valid(d, attr, *value, table)) {
      if (auto fixed = standardize(d, attr, *value, table); fixed && valid(d, attr, *fixed, table)) {
        value = std::move(*fixed);
        ++out.standardized;
      } else {
        value.reset();
      }
    }
    if (!value || value->empty()) {
      if (is_essential(d)) return reject("missing or invalid " + std::string(attr));
      value = std::string(kNotAvailable);
      ++out.set_na;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

bool CleanReport::balanced() const {
  return input_total == output_total + duplicates_removed + tuples_deleted + tuples_in_dropped_trips;
}

bool CleanReport::no_corrections() const {
  return duplicates_removed == 0 && duplicate_conflicts == 0 && values_set_na == 0 && tuples_deleted == 0 &&
         attributes_stripped == 0 && values_standardized == 0 && sparse_trips_dropped == 0 &&
         tuples_in_dropped_trips == 0 && input_total == output_total;
}

nlohmann::ordered_json CleanReport::to_json() const {
  return {
      {"input_total", input_total},
      {"output_total", output_total},
      {"trips_in", trips_in},
      {"trips_out", trips_out},
      {"missing_tuples_detected", missing_tuples_detected},
      {"missing_in_dropped_trips", missing_in_dropped_trips},
      {"sparse_trips_dropped", sparse_trips_dropped},
      {"tuples_in_dropped_trips", tuples_in_dropped_trips},
      {"duplicates_removed", duplicates_removed},
      {"duplicate_conflicts", duplicate_conflicts},
      {"values_set_na", values_set_na},
      {"tuples_deleted", tuples_deleted},
      {"attributes_stripped", attributes_stripped},
      {"values_standardized", values_standardized},
  };
}

CleanReport CleanReport::from_json(const nlohmann::json& j) {
  CleanReport r;
  auto get = [&](const char* k, std::size_t& v) { v = j.value(k, std::size_t{0}); };
  get("input_total", r.input_total);
  get("output_total", r.output_total);
  get("trips_in", r.trips_in);
  get("trips_out", r.trips_out);
  get("missing_tuples_detected", r.missing_tuples_detected);
  get("missing_in_dropped_trips", r.missing_in_dropped_trips);
  get("sparse_trips_dropped", r.sparse_trips_dropped);
  get("tuples_in_dropped_trips", r.tuples_in_dropped_trips);
  get("duplicates_removed", r.duplicates_removed);
  get("duplicate_conflicts", r.duplicate_conflicts);
  get("values_set_na", r.values_set_na);
  get("tuples_deleted", r.tuples_deleted);
  get("attributes_stripped", r.attributes_stripped);
  get("values_standardized", r.values_standardized);
  return r;
}

std::vector<RawTuple> CleanResult::flatten() const {
  std::vector<RawTuple> out;
  std::size_t n = 0;
  for (const auto& t : trips) n += t.tuples.size();
  out.reserve(n);
  for (const auto& t : trips) out.insert(out.end(), t.tuples.begin(), t.tuples.end());
  return out;
}

CleanResult clean_dataset(std::vector<RawTuple> input, const CleanConfig& config) {
  CleanResult result;
  auto& rep = result.report;
  rep.input_total = input.size();

  std::map<TripKey, std::vector<RawTuple>> groups;
  for (auto& t : input) {
    const auto outcome = repair_attributes(t, config.canonical);
    rep.attributes_stripped += outcome.stripped;
    if (outcome.deleted) {
      ++rep.tuples_deleted;
      continue;
    }
    rep.values_set_na += outcome.set_na;
    rep.values_standardized += outcome.standardized;
    t.late = false;
    auto key = trip_key_of(t);
    groups[std::move(*key)].push_back(std::move(t));
  }
  rep.trips_in = groups.size();

  for (auto& [key, tuples] : groups) {
    auto d = dedup(std::move(tuples));
    rep.duplicates_removed += d.removed;
    rep.duplicate_conflicts += d.conflicts;
    const auto scan = detect_missing(d.tuples, config.cadence_s);
    rep.missing_tuples_detected += scan.missing;
    if (scan.missing >= config.sparse_trip_threshold) {
      ++rep.sparse_trips_dropped;
      rep.missing_in_dropped_trips += scan.missing;
      rep.tuples_in_dropped_trips += d.tuples.size();
      result.dropped_trips.push_back(key);
      continue;
    }
    rep.output_total += d.tuples.size();
    result.trips.push_back({key, std::move(d.tuples), scan.missing});
  }
  rep.trips_out = result.trips.size();
  return result;
}

}  // namespace transit::clean
