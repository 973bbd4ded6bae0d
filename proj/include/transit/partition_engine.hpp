#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/cleaning.hpp"
#include "transit/contextualization.hpp"
#include "transit/core_model.hpp"
#include "transit/reference_data.hpp"

namespace transit::engine {

struct EngineConfig {
  EpochSeconds cadence_s = 5;
  double stop_move_threshold_m = context::kStopMoveThresholdM;
  double zone_radius_m = 30.0;
  double cell_size_m = refdata::RouteBufferGrid::kDefaultCellM;
  double buffer_half_width_m = refdata::RouteBufferGrid::kDefaultHalfWidthM;
  std::size_t sparse_trip_threshold = 100;
  unsigned workers = 1;
  EpochSeconds allowed_lateness_s = 60;
  clean::CanonicalTable canonical;

  // Unknown keys are rejected so that typos do not silently fall back to defaults.
  static EngineConfig from_json(const nlohmann::json& j);
  static EngineConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  clean::CleanConfig clean_config() const;
  refdata::ReferenceParams reference_params() const;
  context::ContextParams context_params() const;
};

// ---------------------------------------------------------------------------
// Map

struct KeyedTuple {
  TripKey key;
  RawTuple tuple;
};

struct Reject {
  RawTuple tuple;
  std::string reason;
};

struct MapOutput {
  std::vector<KeyedTuple> pairs;
  std::vector<Reject> rejects;
};

MapOutput map_phase(std::vector<RawTuple> tuples);

// ---------------------------------------------------------------------------
// Shuffle

struct PartitionJob {
  TripKey key;
  std::vector<RawTuple> tuples;  // ascending timestamp, ties by seq
};

// One job per distinct key, in key order.
std::vector<PartitionJob> shuffle(std::vector<KeyedTuple> pairs);

// ---------------------------------------------------------------------------
// Reduce

struct ActivityCounts {
  std::size_t moves = 0;
  std::size_t stops = 0;
  std::size_t running = 0;
  std::size_t passing = 0;
  std::size_t stopover = 0;
  std::size_t suspension = 0;
  std::size_t wrong_street = 0;

  static ActivityCounts of(const std::vector<ContextTuple>& tuples);
  nlohmann::ordered_json to_json() const;
  bool operator==(const ActivityCounts&) const = default;
};

struct JobResult {
  TripKey key;
  bool ok = false;
  std::string error;
  std::size_t tuples = 0;
  bool degenerate = false;
  ActivityCounts counts;
  std::size_t visits = 0;
  std::string context_ndjson;  // serialized in the worker
  std::string visits_ndjson;
  std::optional<context::TripContext> context;  // kept only on request
};

struct ReduceOptions {
  unsigned workers = 1;
  bool keep_context = false;
};

using TripProcessor = std::function<context::TripContext(const PartitionJob&)>;

// Runs `process` over every job on a fixed pool of workers pulling from a
// shared job counter. Results come back in job order; a throwing job is
// recorded as failed and the others are unaffected.
std::vector<JobResult> reduce_with(const std::vector<PartitionJob>& jobs, const TripProcessor& process,
                                   const ReduceOptions& options);

std::vector<JobResult> reduce_phase(const std::vector<PartitionJob>& jobs, const refdata::ReferenceData& reference,
                                    const ReduceOptions& options, const context::ContextParams& params = {});

// ---------------------------------------------------------------------------
// Pipeline

struct PhaseTiming {
  double clean_s = 0.0;
  double map_s = 0.0;
  double shuffle_s = 0.0;
  double reduce_s = 0.0;
  std::size_t partitions = 0;
  unsigned workers = 1;

  nlohmann::ordered_json to_json() const;
};

struct RunResult {
  clean::CleanResult clean;
  std::vector<Reject> rejects;
  std::vector<JobResult> jobs;
  PhaseTiming timing;
  bool aborted = false;
  std::string error;  // stage-qualified message when aborted

  std::size_t failed_jobs() const;
  // Deterministic part of the run report; timings are added by run_report().
  nlohmann::ordered_json summary() const;
  nlohmann::ordered_json run_report() const;
};

RunResult run_pipeline(std::vector<RawTuple> input, const refdata::ReferenceData& reference,
                       const EngineConfig& config, bool keep_context = false);

// Artifacts written by write_run.
inline constexpr const char* kCleanedFile = "cleaned.ndjson";
inline constexpr const char* kContextFile = "context.ndjson";
inline constexpr const char* kVisitsFile = "visits.ndjson";
inline constexpr const char* kCleanReportFile = "clean_report.json";
inline constexpr const char* kRunReportFile = "run_report.json";

void write_run(const std::filesystem::path& dir, const RunResult& run);

}  // namespace transit::engine
