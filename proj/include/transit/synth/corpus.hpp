#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/cleaning.hpp"
#include "transit/core_model.hpp"
#include "transit/synth/city.hpp"
#include "transit/synth/planner.hpp"

namespace transit::synth {

struct GapInjection {
  std::size_t trip = 0;
  std::size_t position = 0;  // index of the first dropped tuple
  std::size_t length = 0;
};

struct DefectProfile {
  std::uint64_t seed = 1;
  std::size_t duplicates = 0;              // extra copies of clean tuples
  std::size_t conflicting_duplicates = 0;  // copies with shifted coordinates (subset of duplicates)
  std::vector<GapInjection> gaps;
  std::size_t missing_attribute = 0;       // a non-essential descriptor removed
  std::size_t missing_essential = 0;       // route id, trip id, coordinate or timestamp removed
  std::size_t extra_attribute = 0;
  std::size_t corrupt_standardizable = 0;
  std::size_t corrupt_unrepairable = 0;
  double gps_noise_sigma_m = 0.0;
  EpochSeconds arrival_jitter_s = 30;  // arrival order lags event time by up to this much
  std::size_t sparse_threshold = 100;

  // Throws std::invalid_argument on impossible settings.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

// One trip to synthesize: the tuple template, the planned positions and the start time.
struct SyntheticTrip {
  RawTuple templ;
  std::vector<PlannedPoint> points;
  EpochSeconds start = 0;
};

struct DefectRecord {
  std::string kind;
  std::uint64_t seq = 0;   // sequence number of the affected tuple as emitted
  std::string attribute;   // for attribute defects
  std::string trip;        // trip id
  EpochSeconds timestamp = 0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<DefectRecord> defects;
  std::vector<GapInjection> gaps;
  std::vector<TripKey> sparse_trips;
  clean::CleanReport expected;  // tallied from the injection inventory

  nlohmann::ordered_json to_json() const;
};

struct SyntheticStream {
  std::vector<RawTuple> tuples;  // arrival order, seq = arrival index
  GroundTruth truth;
};

// Emits the trips at a 5 s cadence with the profile's defects injected and
// inventoried. Throws std::invalid_argument on a profile that does not fit the
// trips (e.g. more defects than clean tuples).
SyntheticStream generate_synthetic(const City& city, const std::vector<SyntheticTrip>& trips,
                                   const DefectProfile& profile);

// Constant-step trip along a route, bouncing at the ends; `count` tuples.
std::vector<PlannedPoint> constant_step_points(const City& city, std::size_t route, std::size_t count, double step_m);

// Canonicalization table for a city's route names with a few known aliases.
clean::CanonicalTable city_canonical_table(const City& city);

struct FieldRatioConfig {
  std::size_t total = 100000;
  double duplicate_ratio = 38167787.0 / 65097658.0;
  double sparse_ratio = 480000.0 / 65097658.0;
  double standardized_ratio = 6000.0 / 65097658.0;
  std::size_t sparse_trips = 2;
  std::size_t routes = 4;
  std::uint64_t seed = 20190612;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct AcceptanceCorpus {
  CityConfig city_config;
  FieldRatioConfig config;
  std::vector<TripStub> schedule;
  std::vector<RawTuple> tuples;
  GroundTruth truth;
  clean::CanonicalTable canonical;
};

// Trips and defects sized so that duplicates, tuples lost to sparse trips and
// standardizations match the configured ratios of `total`.
AcceptanceCorpus build_acceptance_corpus(const FieldRatioConfig& config);

// Writes corpus.ndjson, truth.json (with seed and config), gtfs/, geometry.geojson
// and canonical.json under `dir`.
void write_corpus(const std::filesystem::path& dir, const AcceptanceCorpus& corpus);

// A random walk for stop/move testing: steps of 0 m, under 15 m or over 15 m,
// none within `exclusion_m` of the threshold by haversine.
std::vector<RawTuple> random_walk_trip(std::mt19937_64& rng, std::size_t count, double threshold_m = 15.0,
                                       double exclusion_m = 0.02);

}  // namespace transit::synth
