#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/core_model.hpp"

namespace transit::clean {

struct Gap {
  EpochSeconds after = 0;   // timestamp of the tuple before the gap
  EpochSeconds before = 0;  // timestamp of the tuple after the gap
  std::size_t missing = 0;
};

struct MissingScan {
  std::size_t missing = 0;
  std::vector<Gap> gaps;
};

// Counts round(dt / cadence) - 1 missing tuples for every consecutive gap with
// dt > 1.5 cadence. `trip` must be sorted by timestamp.
MissingScan detect_missing(std::span<const RawTuple> trip, EpochSeconds cadence_s = 5);

struct DedupResult {
  std::vector<RawTuple> tuples;  // sorted by timestamp
  std::size_t removed = 0;
  std::size_t conflicts = 0;  // removed tuples whose coordinates differed from the survivor
};

// Keeps one tuple per timestamp: the one with the smallest ingest sequence
// number. Untimed tuples are dropped silently; callers repair first.
DedupResult dedup(std::vector<RawTuple> trip);

// Per-attribute map from observed spellings to canonical values. Lookups try
// the exact observed value first, then a case- and whitespace-insensitive
// match against both observed and canonical spellings.
class CanonicalTable {
 public:
  CanonicalTable() = default;
  static CanonicalTable from_json(const nlohmann::json& j);
  static CanonicalTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  void add(std::string attribute, std::string observed, std::string canonical);

  bool has_attribute(std::string_view attribute) const;
  bool is_canonical(std::string_view attribute, std::string_view value) const;
  std::optional<std::string> lookup(std::string_view attribute, std::string_view value) const;
  bool empty() const { return entries_.empty(); }

 private:
  struct Entry {
    std::map<std::string, std::string, std::less<>> exact;
    std::map<std::string, std::string, std::less<>> folded;
    std::set<std::string, std::less<>> canonical;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

// Lower-cased, trimmed, inner whitespace runs collapsed to one space.
std::string fold(std::string_view s);
// Trimmed, inner whitespace runs collapsed to one space.
std::string collapse_whitespace(std::string_view s);

// True for the attributes the later stages depend on (route id, trip id).
bool is_essential(Descriptor d);

struct RepairOutcome {
  bool deleted = false;
  std::string reason;  // why a tuple was deleted
  std::size_t set_na = 0;
  std::size_t stripped = 0;
  std::size_t standardized = 0;
};

// Repairs one tuple in place: strips attributes outside the schema,
// standardizes values that fail their validator, and replaces missing or
// unstandardizable non-essential values with "N/A". Missing or invalid route
// id, trip id, timestamp or coordinates yield a delete verdict.
RepairOutcome repair_attributes(RawTuple& t, const CanonicalTable& table = {});

struct CleanConfig {
  EpochSeconds cadence_s = 5;
  std::size_t sparse_trip_threshold = 100;  // trips with at least this many missing tuples are dropped
  CanonicalTable canonical;
};

struct CleanReport {
  std::size_t input_total = 0;
  std::size_t output_total = 0;
  std::size_t trips_in = 0;
  std::size_t trips_out = 0;
  std::size_t missing_tuples_detected = 0;  // over every trip, including dropped ones
  std::size_t missing_in_dropped_trips = 0;
  std::size_t sparse_trips_dropped = 0;
  std::size_t tuples_in_dropped_trips = 0;
  std::size_t duplicates_removed = 0;
  std::size_t duplicate_conflicts = 0;
  std::size_t values_set_na = 0;
  std::size_t tuples_deleted = 0;
  std::size_t attributes_stripped = 0;
  std::size_t values_standardized = 0;

  // input - duplicates - deleted - tuples in dropped trips == output
  bool balanced() const;
  // True when cleaning changed nothing: no removals, repairs or drops.
  bool no_corrections() const;

  nlohmann::ordered_json to_json() const;
  static CleanReport from_json(const nlohmann::json& j);
  bool operator==(const CleanReport&) const = default;
};

struct CleanTrip {
  TripKey key;
  std::vector<RawTuple> tuples;  // timestamp-sorted
  std::size_t missing = 0;
};

struct CleanResult {
  std::vector<CleanTrip> trips;  // TripKey order
  std::vector<TripKey> dropped_trips;
  CleanReport report;

  std::vector<RawTuple> flatten() const;
};

// Repair, then dedup per trip, then gap analysis, then the sparse-trip drop.
CleanResult clean_dataset(std::vector<RawTuple> input, const CleanConfig& config = {});

}  // namespace transit::clean
