// transitctx: command-line driver for ingestion, cleaning, contextualization
// and reporting.
//
// Exit codes: 0 ok, 1 runtime failure (stage named on stderr), 2 usage error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "transit/cleaning.hpp"
#include "transit/ingestion.hpp"
#include "transit/partition_engine.hpp"
#include "transit/reference_data.hpp"
#include "transit/synth/corpus.hpp"
#include "transit/tuple_io.hpp"

namespace fs = std::filesystem;
using namespace transit;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kStoreEnv = "TRANSIT_STORE";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runtime failure attributed to a pipeline stage.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& msg) : std::runtime_error(msg), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string store_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kStoreEnv); env && *env) return env;
  return {};
}

engine::EngineConfig load_config(const std::string& path, unsigned workers, const std::string& canonical) {
  return in_stage("config", [&] {
    auto cfg = path.empty() ? engine::EngineConfig{} : engine::EngineConfig::load(path);
    if (workers > 0) cfg.workers = workers;
    if (!canonical.empty()) cfg.canonical = clean::CanonicalTable::load(canonical);
    return cfg;
  });
}

std::vector<RawTuple> read_input(const std::string& store, const std::string& in) {
  if (!store.empty() && !in.empty()) throw UsageError("give either --store or --in, not both");
  if (!in.empty()) return in_stage("read", [&] { return io::read_tuples(in); });
  const auto dir = store_or_env(store);
  if (dir.empty()) throw UsageError("no input: pass --store, --in or set " + std::string(kStoreEnv));
  return in_stage("read", [&] {
    if (!fs::exists(fs::path(dir) / ingest::FileTupleStore::kDataFile)) {
      throw std::runtime_error("no tuple store at " + dir);
    }
    return ingest::FileTupleStore(dir).scan_all();
  });
}

refdata::ReferenceData load_reference(const std::string& gtfs, const std::string& geometry,
                                      const engine::EngineConfig& cfg) {
  return in_stage("reference", [&] {
    if (!fs::is_directory(gtfs)) throw refdata::LoadError("GTFS directory not found: " + gtfs);
    return refdata::ReferenceData::load(gtfs, geometry, cfg.reference_params());
  });
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_text(path, content);
}

// ---------------------------------------------------------------------------
// synthetic ingest config

synth::DefectProfile defects_from_json(const nlohmann::json& j) {
  synth::DefectProfile p;
  for (const auto& [k, v] : j.items()) {
    if (k == "seed") p.seed = v.get<std::uint64_t>();
    else if (k == "duplicates") p.duplicates = v.get<std::size_t>();
    else if (k == "conflicting_duplicates") p.conflicting_duplicates = v.get<std::size_t>();
    else if (k == "missing_attribute") p.missing_attribute = v.get<std::size_t>();
    else if (k == "missing_essential") p.missing_essential = v.get<std::size_t>();
    else if (k == "extra_attribute") p.extra_attribute = v.get<std::size_t>();
    else if (k == "corrupt_standardizable") p.corrupt_standardizable = v.get<std::size_t>();
    else if (k == "corrupt_unrepairable") p.corrupt_unrepairable = v.get<std::size_t>();
    else if (k == "gps_noise_sigma_m") p.gps_noise_sigma_m = v.get<double>();
    else if (k == "arrival_jitter_s") p.arrival_jitter_s = v.get<EpochSeconds>();
    else if (k == "gaps") {
      for (const auto& g : v) p.gaps.push_back({g.at("trip"), g.at("position"), g.at("length")});
    } else {
      throw std::invalid_argument("unknown defect key: " + k);
    }
  }
  return p;
}

// {"field_ratio": {...}} builds the acceptance corpus; otherwise
// {"routes": R, "trips": [{"route", "duration_s", "step_m", "start", "trip_id"}], "defects": {...}}.
std::vector<RawTuple> synth_from_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synth config " + path.string());
  const auto j = nlohmann::json::parse(in);
  if (j.contains("field_ratio")) {
    synth::FieldRatioConfig c;
    const auto& p = j["field_ratio"];
    c.total = p.value("total", c.total);
    c.seed = p.value("seed", c.seed);
    c.routes = p.value("routes", c.routes);
    c.sparse_trips = p.value("sparse_trips", c.sparse_trips);
    return synth::build_acceptance_corpus(c).tuples;
  }
  synth::CityConfig cc;
  cc.routes = j.value("routes", std::size_t{1});
  const synth::City city(cc);
  std::vector<synth::SyntheticTrip> trips;
  for (const auto& t : j.at("trips")) {
    const auto route = t.value("route", std::size_t{0});
    const auto duration = t.value("duration_s", EpochSeconds{3600});
    const auto step = t.value("step_m", 20.0);
    const auto start = parse_timestamp(t.value("start", std::string("2019-06-12T08:00:00Z")));
    if (!start) throw std::invalid_argument("bad trip start in synth config");
    const auto id = t.value("trip_id", city.routes().at(route).id + "-" + std::to_string(trips.size() + 1));
    const auto count = static_cast<std::size_t>(duration / ingest::kWindowWidthS);
    trips.push_back({synth::trip_template(city, route, id), synth::constant_step_points(city, route, count, step), *start});
  }
  const auto profile = j.contains("defects") ? defects_from_json(j["defects"]) : synth::DefectProfile{};
  return synth::generate_synthetic(city, trips, profile).tuples;
}

// ---------------------------------------------------------------------------
// report rendering

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string cell(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render_csv(const std::vector<std::pair<std::string, Table>>& tables) {
  std::string out;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (t > 0) out += '\n';
    const auto& table = tables[t].second;
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ',';
        out += csv::quote_field(fields[i]);
      }
      out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
  }
  return out;
}

std::string render_md(const std::vector<std::pair<std::string, Table>>& tables) {
  std::string out;
  for (const auto& [title, table] : tables) {
    out += "## " + title + "\n\n";
    auto line = [&](const std::vector<std::string>& fields) {
      out += '|';
      for (const auto& f : fields) out += ' ' + f + " |";
      out += '\n';
    };
    line(table.header);
    out += '|';
    for (std::size_t i = 0; i < table.header.size(); ++i) out += " --- |";
    out += '\n';
    for (const auto& r : table.rows) line(r);
    if (table.rows.empty()) out += "\n_(empty)_\n";
    out += '\n';
  }
  return out;
}

ojson build_report(const fs::path& run) {
  const auto run_path = run / engine::kRunReportFile;
  const auto visits_path = run / engine::kVisitsFile;
  for (const auto& p : {run_path, visits_path}) {
    if (!fs::exists(p)) throw std::runtime_error("missing run artifact " + p.string());
  }
  const auto rr = ojson::parse(io::read_text(run_path));

  ojson out;
  out["status"] = rr.at("status");
  out["cleaning"] = rr.at("clean_report");
  out["timing"] = rr.value("timing", ojson::object());
  auto activity = ojson::array();
  for (const auto& t : rr.at("trips")) {
    ojson row;
    row["route_id"] = t.at("route_id");
    row["trip_id"] = t.at("trip_id");
    row["service_date"] = t.at("service_date");
    row["tuples"] = t.at("tuples");
    for (const auto& [k, v] : t.at("activity").items()) row[k] = v;
    activity.push_back(std::move(row));
  }
  out["activity"] = std::move(activity);
  auto visits = ojson::array();
  std::ifstream in(visits_path);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) visits.push_back(ojson::parse(line));
  }
  out["visits"] = std::move(visits);
  out["failed_jobs"] = rr.at("failed_jobs");
  return out;
}

std::vector<std::pair<std::string, Table>> report_tables(const ojson& r) {
  std::vector<std::pair<std::string, Table>> tables;
  Table summary{{"section", "metric", "value"}, {}};
  for (const auto& [k, v] : r["cleaning"].items()) summary.rows.push_back({"cleaning", k, cell(v)});
  for (const auto& [k, v] : r["timing"].items()) summary.rows.push_back({"timing", k, cell(v)});
  tables.emplace_back("Cleaning and phase timing", std::move(summary));

  auto from_objects = [](const ojson& arr, std::vector<std::string> header) {
    Table t{std::move(header), {}};
    for (const auto& o : arr) {
      std::vector<std::string> row;
      for (const auto& h : t.header) row.push_back(cell(o.at(h)));
      t.rows.push_back(std::move(row));
    }
    return t;
  };
  tables.emplace_back("Activity per trip",
                      from_objects(r["activity"], {"route_id", "trip_id", "service_date", "tuples", "moves", "stops",
                                                   "running", "passing", "stopover", "suspension_of_movement",
                                                   "wrong_street_segment"}));
  tables.emplace_back("Station visits",
                      from_objects(r["visits"], {"route_id", "trip_id", "service_date", "station_id", "direction",
                                                 "arrival", "departure", "dwell_s", "tuples"}));
  tables.emplace_back("Failed jobs", from_objects(r["failed_jobs"], {"key", "error"}));
  return tables;
}

// ---------------------------------------------------------------------------
// commands

struct IngestArgs {
  std::string source, synth, store, summary;
  bool real_time = false;
  double duration_s = 0.0;
  double speedup = 1.0;
  std::size_t max_tuples = 0;
  long long lateness_s = 60;
};

int cmd_ingest(const IngestArgs& a) {
  if (a.source.empty() == a.synth.empty()) throw UsageError("give exactly one of --source or --synth");
  const auto store_dir = store_or_env(a.store);
  if (store_dir.empty()) throw UsageError("no store: pass --store or set " + std::string(kStoreEnv));

  const auto mode = a.real_time ? ingest::ServingRate::real_time : ingest::ServingRate::max_speed;
  std::unique_ptr<ingest::StreamSource> source = in_stage("source", [&]() -> std::unique_ptr<ingest::StreamSource> {
    if (!a.source.empty()) return std::make_unique<ingest::ReplayFileSource>(a.source, mode, a.speedup);
    return std::make_unique<ingest::VectorSource>(synth_from_config(a.synth));
  });

  auto store = in_stage("store", [&] { return std::make_unique<ingest::FileTupleStore>(store_dir); });
  ingest::IngestOptions opts;
  opts.mode = mode;
  opts.allowed_lateness_s = a.lateness_s;
  if (a.duration_s > 0) {
    opts.stop.max_wall_time = std::chrono::milliseconds(static_cast<long long>(a.duration_s * 1000.0));
  }
  if (a.max_tuples > 0) opts.stop.max_tuples = a.max_tuples;
  const auto summary = ingest::ingest_loop(*source, *store, opts);

  const auto text = summary.to_json().dump(2) + "\n";
  const fs::path summary_path = a.summary.empty() ? fs::path(store_dir) / "ingest_summary.json" : fs::path(a.summary);
  in_stage("ingest", [&] { write_file(summary_path, text); });
  std::cout << text;
  if (summary.aborted) throw StageError("ingest", summary.error);
  return 0;
}

struct CleanArgs {
  std::string store, in, out, report, config, canonical;
};

int cmd_clean(const CleanArgs& a) {
  const auto cfg = load_config(a.config, 0, a.canonical);
  auto input = read_input(a.store, a.in);
  const auto result = in_stage("clean", [&] { return clean::clean_dataset(std::move(input), cfg.clean_config()); });
  in_stage("write", [&] {
    std::string body;
    for (const auto& trip : result.trips) {
      for (const auto& t : trip.tuples) body += io::to_ndjson_line(t, true) + "\n";
    }
    write_file(a.out, body);
    write_file(a.report, result.report.to_json().dump(2) + "\n");
  });
  return 0;
}

struct ContextArgs {
  std::string in, gtfs, geometry, out, visits, config;
  unsigned workers = 0;
};

int cmd_contextualize(const ContextArgs& a) {
  const auto cfg = load_config(a.config, a.workers, {});
  const auto ref = load_reference(a.gtfs, a.geometry, cfg);
  auto tuples = in_stage("read", [&] { return io::read_tuples(a.in); });
  auto mapped = engine::map_phase(std::move(tuples));
  const auto jobs = engine::shuffle(std::move(mapped.pairs));
  const auto results = engine::reduce_phase(jobs, ref, {cfg.workers, false}, cfg.context_params());

  std::string ctx, visits;
  std::size_t failed = 0;
  for (const auto& r : results) {
    ctx += r.context_ndjson;
    visits += r.visits_ndjson;
    if (!r.ok) {
      ++failed;
      std::cerr << "transitctx: reduce: " << r.key.to_string() << ": " << r.error << "\n";
    }
  }
  in_stage("write", [&] {
    write_file(a.out, ctx);
    if (!a.visits.empty()) write_file(a.visits, visits);
  });
  if (!mapped.rejects.empty()) {
    std::cerr << "transitctx: map: " << mapped.rejects.size() << " unkeyable tuples rejected\n";
  }
  if (failed > 0) throw StageError("reduce", std::to_string(failed) + " of " + std::to_string(results.size()) +
                                                 " partitions failed");
  return 0;
}

struct PipelineArgs {
  std::string store, in, gtfs, geometry, out, config, canonical;
  unsigned workers = 0;
};

int cmd_pipeline(const PipelineArgs& a) {
  const auto cfg = load_config(a.config, a.workers, a.canonical);
  const auto ref = load_reference(a.gtfs, a.geometry, cfg);
  auto input = read_input(a.store, a.in);
  const auto run = engine::run_pipeline(std::move(input), ref, cfg);
  in_stage("write", [&] { engine::write_run(a.out, run); });
  if (run.aborted) {
    const auto colon = run.error.find(": ");
    throw StageError(run.error.substr(0, colon), colon == std::string::npos ? run.error : run.error.substr(colon + 2));
  }
  for (const auto& r : run.jobs) {
    if (!r.ok) std::cerr << "transitctx: reduce: " << r.key.to_string() << ": " << r.error << "\n";
  }
  if (run.failed_jobs() > 0) {
    throw StageError("reduce", std::to_string(run.failed_jobs()) + " of " + std::to_string(run.jobs.size()) +
                                   " partitions failed; see " + (fs::path(a.out) / engine::kRunReportFile).string());
  }
  return 0;
}

int cmd_report(const std::string& run, const std::string& format, const std::string& out) {
  const auto report = in_stage("report", [&] { return build_report(run); });
  std::string text;
  if (format == "json") text = report.dump(2) + "\n";
  else if (format == "csv") text = render_csv(report_tables(report));
  else text = render_md(report_tables(report));
  if (out.empty()) std::cout << text;
  else in_stage("write", [&] { write_file(out, text); });
  return 0;
}

struct SynthArgs {
  std::string out, fixture;
  std::size_t total = 100000;
  std::uint64_t seed = synth::FieldRatioConfig{}.seed;
  std::size_t routes = 4;
};

int cmd_synth(const SynthArgs& a) {
  return in_stage("synth", [&] {
    if (a.fixture.empty()) {
      synth::FieldRatioConfig c;
      c.total = a.total;
      c.seed = a.seed;
      c.routes = a.routes;
      const auto corpus = synth::build_acceptance_corpus(c);
      synth::write_corpus(a.out, corpus);
      std::cout << corpus.truth.expected.to_json().dump(2) << "\n";
      return 0;
    }
    const synth::City city;
    const auto plan = a.fixture == "baseline" ? synth::baseline_fixture_plan(city) : synth::detour_fixture_plan(city);
    const auto points = synth::plan_trip(city, plan);
    const std::string trip_id = city.routes()[0].id + "-" + a.fixture;
    const EpochSeconds start = *parse_timestamp("2019-06-12T12:00:00Z");
    const auto tuples = synth::to_tuples(city, points, synth::trip_template(city, 0, trip_id), start);
    fs::create_directories(a.out);
    io::write_tuples(fs::path(a.out) / "corpus.ndjson", tuples);
    refdata::write_gtfs(city.gtfs({{trip_id, 0, "WK", start}}), fs::path(a.out) / "gtfs");
    io::write_text(fs::path(a.out) / "geometry.geojson", refdata::geometry_to_geojson(city.geometry()));
    std::cout << tuples.size() << " tuples\n";
    return 0;
  });
}

int cmd_grid_export(const std::string& geometry, const std::string& route, const std::string& out,
                    const std::string& config) {
  const auto cfg = load_config(config, 0, {});
  const auto csv = in_stage("reference", [&] {
    const auto g = refdata::load_geometry(geometry);
    for (const auto& r : g.routes) {
      if (r.id != route) continue;
      const auto params = cfg.reference_params();
      const auto grid = refdata::build_route_buffer_grid(r, LocalFrame(r.points.front()), params.cell_m,
                                                         params.half_width_m);
      return refdata::grid_to_csv(grid);
    }
    throw std::runtime_error("route " + route + " not found in " + geometry);
  });
  if (out.empty()) std::cout << csv;
  else in_stage("write", [&] { write_file(out, csv); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transit GPS stream cleaning and contextualization"};
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Read a tuple stream into a store in 5 s event windows");
  ingest->add_option("--source", ia.source, "NDJSON or CSV capture to replay");
  ingest->add_option("--synth", ia.synth, "JSON config for a synthetic stream");
  ingest->add_option("--store", ia.store, "Store directory (default $TRANSIT_STORE)");
  ingest->add_flag("--real-time", ia.real_time, "Replay at event-time pace and close windows by watermark");
  ingest->add_option("--speedup", ia.speedup, "Real-time replay speed factor")->check(CLI::PositiveNumber);
  ingest->add_option("--duration", ia.duration_s, "Stop after this many wall-clock seconds")->check(CLI::NonNegativeNumber);
  ingest->add_option("--max-tuples", ia.max_tuples, "Stop after this many tuples");
  ingest->add_option("--allowed-lateness", ia.lateness_s, "Real-time allowed lateness in seconds")
      ->check(CLI::NonNegativeNumber);
  ingest->add_option("--summary", ia.summary, "Where to write the ingest summary JSON");

  CleanArgs ca;
  auto* cleancmd = app.add_subcommand("clean", "Clean stored tuples");
  cleancmd->add_option("--store", ca.store, "Store directory (default $TRANSIT_STORE)");
  cleancmd->add_option("--in", ca.in, "Tuple file instead of a store");
  cleancmd->add_option("--out", ca.out, "Cleaned NDJSON output")->required();
  cleancmd->add_option("--report", ca.report, "Clean report JSON output")->required();
  cleancmd->add_option("--config", ca.config, "Engine config JSON");
  cleancmd->add_option("--canonical", ca.canonical, "Canonicalization table JSON");

  ContextArgs xa;
  auto* ctx = app.add_subcommand("contextualize", "Add mobility context to cleaned tuples");
  ctx->add_option("--in", xa.in, "Cleaned NDJSON")->required();
  ctx->add_option("--gtfs", xa.gtfs, "GTFS directory")->required();
  ctx->add_option("--geometry", xa.geometry, "Route and road GeoJSON")->required();
  ctx->add_option("--out", xa.out, "Context NDJSON output")->required();
  ctx->add_option("--visits", xa.visits, "Station visit NDJSON output");
  ctx->add_option("--workers", xa.workers, "Reduce workers")->check(CLI::PositiveNumber);
  ctx->add_option("--config", xa.config, "Engine config JSON");

  PipelineArgs pa;
  auto* pipe = app.add_subcommand("pipeline", "Clean, map, shuffle and reduce in one run");
  pipe->add_option("--store", pa.store, "Store directory (default $TRANSIT_STORE)");
  pipe->add_option("--in", pa.in, "Tuple file instead of a store");
  pipe->add_option("--gtfs", pa.gtfs, "GTFS directory")->required();
  pipe->add_option("--geometry", pa.geometry, "Route and road GeoJSON")->required();
  pipe->add_option("--out", pa.out, "Run directory")->required();
  pipe->add_option("--workers", pa.workers, "Reduce workers")->check(CLI::PositiveNumber);
  pipe->add_option("--config", pa.config, "Engine config JSON");
  pipe->add_option("--canonical", pa.canonical, "Canonicalization table JSON");

  std::string run_dir, format = "md", report_out;
  auto* report = app.add_subcommand("report", "Summarize a pipeline run");
  report->add_option("--run", run_dir, "Run directory")->required();
  report->add_option("--format", format, "json, csv or md")->check(CLI::IsMember({"json", "csv", "md"}));
  report->add_option("--out", report_out, "Write to a file instead of stdout");

  SynthArgs sa;
  auto* synthcmd = app.add_subcommand("synth", "Write a synthetic corpus with ground truth");
  synthcmd->add_option("--out", sa.out, "Output directory")->required();
  synthcmd->add_option("--total", sa.total, "Tuples in the field-ratio corpus")->check(CLI::PositiveNumber);
  synthcmd->add_option("--seed", sa.seed, "Generator seed");
  synthcmd->add_option("--routes", sa.routes, "Routes in the synthetic city")->check(CLI::PositiveNumber);
  synthcmd->add_option("--fixture", sa.fixture, "Write a single fixture trip instead")
      ->check(CLI::IsMember({"baseline", "detour"}));

  std::string geometry, route, grid_out, grid_config;
  auto* grid = app.add_subcommand("grid-export", "Dump a route's buffer grid as CSV");
  grid->add_option("--geometry", geometry, "Route GeoJSON")->required();
  grid->add_option("--route", route, "Route id")->required();
  grid->add_option("--out", grid_out, "CSV output (default stdout)");
  grid->add_option("--config", grid_config, "Engine config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(ia);
    if (*cleancmd) return cmd_clean(ca);
    if (*ctx) return cmd_contextualize(xa);
    if (*pipe) return cmd_pipeline(pa);
    if (*report) return cmd_report(run_dir, format, report_out);
    if (*synthcmd) return cmd_synth(sa);
    if (*grid) return cmd_grid_export(geometry, route, grid_out, grid_config);
  } catch (const UsageError& e) {
    std::cerr << "transitctx: usage: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "transitctx: " << e.stage << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "transitctx: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
