#include "transit/partition_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include "transit/tuple_io.hpp"

namespace transit::engine {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

EngineConfig EngineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("engine config must be a JSON object");
  EngineConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "cadence_s") c.cadence_s = v.get<EpochSeconds>();
    else if (k == "stop_move_threshold_m") c.stop_move_threshold_m = v.get<double>();
    else if (k == "zone_radius_m") c.zone_radius_m = v.get<double>();
    else if (k == "cell_size_m") c.cell_size_m = v.get<double>();
    else if (k == "buffer_half_width_m") c.buffer_half_width_m = v.get<double>();
    else if (k == "sparse_trip_threshold") c.sparse_trip_threshold = v.get<std::size_t>();
    else if (k == "workers") c.workers = v.get<unsigned>();
    else if (k == "allowed_lateness_s") c.allowed_lateness_s = v.get<EpochSeconds>();
    else if (k == "canonicalization") c.canonical = clean::CanonicalTable::from_json(v);
    else throw std::invalid_argument("unknown config key: " + k);
  }
  if (c.cadence_s <= 0 || !(c.stop_move_threshold_m >= 0.0) || !(c.zone_radius_m > 0.0) ||
      !(c.cell_size_m > 0.0) || !(c.buffer_half_width_m > 0.0) || c.workers == 0) {
    throw std::invalid_argument("engine config has a non-positive threshold or worker count");
  }
  return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return from_json(nlohmann::json::parse(in));
}

nlohmann::ordered_json EngineConfig::to_json() const {
  return {
      {"cadence_s", cadence_s},
      {"stop_move_threshold_m", stop_move_threshold_m},
      {"zone_radius_m", zone_radius_m},
      {"cell_size_m", cell_size_m},
      {"buffer_half_width_m", buffer_half_width_m},
      {"sparse_trip_threshold", sparse_trip_threshold},
      {"workers", workers},
      {"allowed_lateness_s", allowed_lateness_s},
      {"canonicalization", canonical.to_json()},
  };
}

clean::CleanConfig EngineConfig::clean_config() const { return {cadence_s, sparse_trip_threshold, canonical}; }

refdata::ReferenceParams EngineConfig::reference_params() const {
  return {zone_radius_m, cell_size_m, buffer_half_width_m};
}

context::ContextParams EngineConfig::context_params() const { return {stop_move_threshold_m}; }

// ---------------------------------------------------------------------------

MapOutput map_phase(std::vector<RawTuple> tuples) {
  MapOutput out;
  out.pairs.reserve(tuples.size());
  for (auto& t : tuples) {
    if (auto key = trip_key_of(t)) {
      out.pairs.push_back({std::move(*key), std::move(t)});
    } else {
      std::string reason = !t.timestamp ? "missing timestamp" : "missing route or trip id";
      out.rejects.push_back({std::move(t), std::move(reason)});
    }
  }
  return out;
}

std::vector<PartitionJob> shuffle(std::vector<KeyedTuple> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const KeyedTuple& a, const KeyedTuple& b) {
    if (auto c = a.key <=> b.key; c != 0) return c < 0;
    return std::tie(*a.tuple.timestamp, a.tuple.seq) < std::tie(*b.tuple.timestamp, b.tuple.seq);
  });
  std::vector<PartitionJob> jobs;
  for (auto& p : pairs) {
    if (jobs.empty() || jobs.back().key != p.key) jobs.push_back({std::move(p.key), {}});
    jobs.back().tuples.push_back(std::move(p.tuple));
  }
  return jobs;
}

// ---------------------------------------------------------------------------

ActivityCounts ActivityCounts::of(const std::vector<ContextTuple>& tuples) {
  ActivityCounts c;
  for (const auto& t : tuples) {
    (t.motion == MotionLabel::move ? c.moves : c.stops)++;
    switch (t.activity) {
      case ActivityClass::running: ++c.running; break;
      case ActivityClass::passing: ++c.passing; break;
      case ActivityClass::stopover: ++c.stopover; break;
      case ActivityClass::suspension_of_movement: ++c.suspension; break;
    }
    if (t.street == kWrongStreetSegment) ++c.wrong_street;
  }
  return c;
}

nlohmann::ordered_json ActivityCounts::to_json() const {
  return {{"moves", moves},     {"stops", stops},         {"running", running},
          {"passing", passing}, {"stopover", stopover},   {"suspension_of_movement", suspension},
          {"wrong_street_segment", wrong_street}};
}

std::vector<JobResult> reduce_with(const std::vector<PartitionJob>& jobs, const TripProcessor& process,
                                   const ReduceOptions& options) {
  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const auto& job = jobs[i];
      JobResult& r = results[i];
      r.key = job.key;
      r.tuples = job.tuples.size();
      try {
        auto ctx = process(job);
        r.counts = ActivityCounts::of(ctx.tuples);
        r.degenerate = ctx.degenerate;
        r.visits = ctx.visits.size();
        for (const auto& t : ctx.tuples) {
          r.context_ndjson += io::to_ndjson_line(t);
          r.context_ndjson += '\n';
        }
        for (const auto& v : ctx.visits) {
          r.visits_ndjson += context::visit_to_json(job.key, v).dump();
          r.visits_ndjson += '\n';
        }
        if (options.keep_context) r.context = std::move(ctx);
        r.ok = true;
      } catch (const std::exception& e) {
        r = JobResult{};
        r.key = job.key;
        r.tuples = job.tuples.size();
        r.error = e.what();
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(jobs.size())));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  return results;
}

std::vector<JobResult> reduce_phase(const std::vector<PartitionJob>& jobs, const refdata::ReferenceData& reference,
                                    const ReduceOptions& options, const context::ContextParams& params) {
  return reduce_with(
      jobs, [&](const PartitionJob& job) { return context::contextualize_trip(job.tuples, reference, params); },
      options);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json PhaseTiming::to_json() const {
  return {{"clean_s", clean_s},       {"map_s", map_s},           {"shuffle_s", shuffle_s},
          {"reduce_s", reduce_s},     {"partitions", partitions}, {"workers", workers}};
}

std::size_t RunResult::failed_jobs() const {
  return static_cast<std::size_t>(std::count_if(jobs.begin(), jobs.end(), [](const JobResult& j) { return !j.ok; }));
}

nlohmann::ordered_json RunResult::summary() const {
  nlohmann::ordered_json j;
  j["status"] = aborted ? "aborted" : "ok";
  if (aborted) j["error"] = error;
  j["clean_report"] = clean.report.to_json();
  j["partitions"] = jobs.size();
  j["context_tuples"] = 0;
  j["rejects"] = rejects.size();

  std::size_t ctx_tuples = 0;
  std::size_t degenerate = 0;
  auto failed = nlohmann::ordered_json::array();
  auto trips = nlohmann::ordered_json::array();
  for (const auto& r : jobs) {
    if (!r.ok) {
      failed.push_back({{"key", r.key.to_string()}, {"error", r.error}});
      continue;
    }
    ctx_tuples += r.tuples;
    if (r.degenerate) ++degenerate;
    nlohmann::ordered_json t;
    t["route_id"] = r.key.route_id;
    t["trip_id"] = r.key.trip_id;
    t["service_date"] = r.key.service_date.to_string();
    t["tuples"] = r.tuples;
    t["visits"] = r.visits;
    t["activity"] = r.counts.to_json();
    trips.push_back(std::move(t));
  }
  j["context_tuples"] = ctx_tuples;
  j["degenerate_trips"] = degenerate;
  j["failed_jobs"] = std::move(failed);
  auto dropped = nlohmann::ordered_json::array();
  for (const auto& k : clean.dropped_trips) dropped.push_back(k.to_string());
  j["dropped_trips"] = std::move(dropped);
  j["trips"] = std::move(trips);
  return j;
}

nlohmann::ordered_json RunResult::run_report() const {
  auto j = summary();
  j["timing"] = timing.to_json();
  return j;
}

RunResult run_pipeline(std::vector<RawTuple> input, const refdata::ReferenceData& reference,
                       const EngineConfig& config, bool keep_context) {
  RunResult run;
  run.timing.workers = config.workers;
  const char* stage = "clean";
  try {
    auto t0 = Clock::now();
    run.clean = clean::clean_dataset(std::move(input), config.clean_config());
    run.timing.clean_s = seconds_since(t0);

    stage = "map";
    t0 = Clock::now();
    auto mapped = map_phase(run.clean.flatten());
    run.rejects = std::move(mapped.rejects);
    run.timing.map_s = seconds_since(t0);

    stage = "shuffle";
    t0 = Clock::now();
    const auto jobs = shuffle(std::move(mapped.pairs));
    run.timing.shuffle_s = seconds_since(t0);
    run.timing.partitions = jobs.size();

    stage = "reduce";
    t0 = Clock::now();
    run.jobs = reduce_phase(jobs, reference, {config.workers, keep_context}, config.context_params());
    run.timing.reduce_s = seconds_since(t0);
  } catch (const std::exception& e) {
    run.aborted = true;
    run.error = std::string(stage) + ": " + e.what();
  }
  return run;
}

void write_run(const std::filesystem::path& dir, const RunResult& run) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(kCleanedFile);
    for (const auto& trip : run.clean.trips) {
      for (const auto& t : trip.tuples) out << io::to_ndjson_line(t, true) << '\n';
    }
  }
  {
    auto ctx = open(kContextFile);
    auto visits = open(kVisitsFile);
    for (const auto& r : run.jobs) {
      ctx << r.context_ndjson;
      visits << r.visits_ndjson;
    }
  }
  open(kCleanReportFile) << run.clean.report.to_json().dump(2) << '\n';
  open(kRunReportFile) << run.run_report().dump(2) << '\n';
}

}  // namespace transit::engine
