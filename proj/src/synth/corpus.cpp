#include "transit/synth/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "transit/reference_data.hpp"
#include "transit/synth/geo.hpp"
#include "transit/tuple_io.hpp"

namespace transit::synth {

namespace {

enum class Defect { none, missing_essential, missing_attribute, extra_attribute, corrupt_standardizable, corrupt_unrepairable };

const char* defect_name(Defect d) {
  switch (d) {
    case Defect::missing_essential: return "missing_essential";
    case Defect::missing_attribute: return "missing_attribute";
    case Defect::extra_attribute: return "extra_attribute";
    case Defect::corrupt_standardizable: return "corrupt_standardizable";
    case Defect::corrupt_unrepairable: return "corrupt_unrepairable";
    case Defect::none: break;
  }
  return "none";
}

struct Slot {
  std::size_t trip = 0;
  std::size_t index = 0;
  RawTuple tuple;
  bool dropped = false;  // removed by a gap injection
  Defect defect = Defect::none;
  std::string attribute;
};

struct Emitted {
  double arrival = 0.0;
  std::uint64_t tiebreak = 0;
  std::size_t slot = 0;
  bool copy = false;
  RawTuple tuple;
};

// Missing-tuple count for a sorted list of timestamps at a 5 s cadence.
std::size_t scan_missing(const std::vector<EpochSeconds>& ts) {
  std::size_t missing = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const EpochSeconds dt = ts[i] - ts[i - 1];
    if (dt >= 8) missing += static_cast<std::size_t>((dt + 2) / 5 - 1);
  }
  return missing;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void DefectProfile::validate() const {
  if (conflicting_duplicates > duplicates) throw std::invalid_argument("conflicting duplicates exceed duplicates");
  if (gps_noise_sigma_m < 0.0 || arrival_jitter_s < 0) throw std::invalid_argument("negative noise or jitter");
}

nlohmann::ordered_json DefectProfile::to_json() const {
  auto gap_list = nlohmann::ordered_json::array();
  for (const auto& g : gaps) gap_list.push_back({{"trip", g.trip}, {"position", g.position}, {"length", g.length}});
  return {{"seed", seed},
          {"duplicates", duplicates},
          {"conflicting_duplicates", conflicting_duplicates},
          {"gaps", gap_list},
          {"missing_attribute", missing_attribute},
          {"missing_essential", missing_essential},
          {"extra_attribute", extra_attribute},
          {"corrupt_standardizable", corrupt_standardizable},
          {"corrupt_unrepairable", corrupt_unrepairable},
          {"gps_noise_sigma_m", gps_noise_sigma_m},
          {"arrival_jitter_s", arrival_jitter_s},
          {"sparse_threshold", sparse_threshold}};
}

nlohmann::ordered_json GroundTruth::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["expected_report"] = expected.to_json();
  auto sparse = nlohmann::ordered_json::array();
  for (const auto& k : sparse_trips) sparse.push_back(k.to_string());
  j["sparse_trips"] = std::move(sparse);
  auto gap_list = nlohmann::ordered_json::array();
  for (const auto& g : gaps) gap_list.push_back({{"trip", g.trip}, {"position", g.position}, {"length", g.length}});
  j["gaps"] = std::move(gap_list);
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : defects) {
    nlohmann::ordered_json e{{"kind", d.kind}, {"seq", d.seq}, {"trip", d.trip}, {"timestamp", d.timestamp}};
    if (!d.attribute.empty()) e["attribute"] = d.attribute;
    list.push_back(std::move(e));
  }
  j["defects"] = std::move(list);
  return j;
}

SyntheticStream generate_synthetic(const City& city, const std::vector<SyntheticTrip>& trips,
                                   const DefectProfile& profile) {
  profile.validate();
  std::mt19937_64 rng(profile.seed);
  const TangentPlane& plane = city.plane();

  std::vector<Slot> slots;
  std::vector<std::size_t> trip_first(trips.size() + 1, 0);
  std::normal_distribution<double> noise(0.0, profile.gps_noise_sigma_m > 0 ? profile.gps_noise_sigma_m : 1.0);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    const auto& trip = trips[i];
    if (trip.points.empty()) throw std::invalid_argument("synthetic trip without positions");
    if (utc_date(trip.start) != utc_date(trip.start + 5 * static_cast<EpochSeconds>(trip.points.size() - 1))) {
      throw std::invalid_argument("synthetic trip crosses midnight");
    }
    std::vector<PlannedPoint> pts = trip.points;
    if (profile.gps_noise_sigma_m > 0) {
      for (auto& p : pts) {
        p.xy.e += noise(rng);
        p.xy.n += noise(rng);
      }
    }
    trip_first[i] = slots.size();
    auto tuples = to_tuples(city, pts, trip.templ, trip.start);
    for (std::size_t k = 0; k < tuples.size(); ++k) slots.push_back({i, k, std::move(tuples[k]), false, Defect::none, {}});
  }
  trip_first[trips.size()] = slots.size();

  for (const auto& g : profile.gaps) {
    if (g.trip >= trips.size()) throw std::invalid_argument("gap injection names an unknown trip");
    const std::size_t n = trip_first[g.trip + 1] - trip_first[g.trip];
    if (g.position < 1 || g.length == 0 || g.position + g.length >= n) {
      throw std::invalid_argument("gap injection must lie strictly inside its trip");
    }
    for (std::size_t k = 0; k < g.length; ++k) slots[trip_first[g.trip] + g.position + k].dropped = true;
  }

  // Attribute defects go to distinct interior tuples; duplicates copy clean ones.
  std::vector<std::size_t> pool;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& sl = slots[s];
    const std::size_t n = trip_first[sl.trip + 1] - trip_first[sl.trip];
    if (!sl.dropped && sl.index > 0 && sl.index + 1 < n) pool.push_back(s);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t attr_defects = profile.missing_essential + profile.missing_attribute + profile.extra_attribute +
                                   profile.corrupt_standardizable + profile.corrupt_unrepairable;
  if (attr_defects > pool.size()) throw std::invalid_argument("more attribute defects than eligible tuples");

  std::size_t next = 0;
  auto assign = [&](Defect d, std::size_t count) {
    for (std::size_t c = 0; c < count; ++c) {
      Slot& sl = slots[pool[next++]];
      sl.defect = d;
      RawTuple& t = sl.tuple;
      switch (d) {
        case Defect::missing_essential: {
          switch (c % 5) {
            case 0: t.get(kRouteIdField).reset(); sl.attribute = "route_id_rta"; break;
            case 1: t.get(kTripIdField).reset(); sl.attribute = "trip_id_tta"; break;
            case 2: t.lat.reset(); sl.attribute = "lat"; break;
            case 3: t.lng.reset(); sl.attribute = "lng"; break;
            default: t.timestamp.reset(); sl.attribute = "timestamp"; break;
          }
          break;
        }
        case Defect::missing_attribute: {
          std::vector<std::size_t> candidates;
          for (std::size_t i = 0; i < kDescriptorCount; ++i) {
            const auto desc = static_cast<Descriptor>(i);
            if (desc != kRouteIdField && desc != kTripIdField) candidates.push_back(i);
          }
          const std::size_t pick = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
          t.descriptors[pick].reset();
          sl.attribute = std::string(kDescriptorNames[pick]);
          break;
        }
        case Defect::extra_attribute: {
          static const char* const names[] = {"speed_kmh", "heading", "odometer"};
          sl.attribute = names[c % 3];
          t.extras.emplace_back(sl.attribute, std::to_string(20 + c % 40));
          break;
        }
        case Defect::corrupt_standardizable: {
          auto& name = t.get(Descriptor::route_name);
          const std::string route = t.get(kRouteIdField).value_or("");
          switch (c % 3) {
            case 0: name = upper(name.value_or("")) + " "; sl.attribute = "route_name"; break;
            case 1: name = "Rte " + route; sl.attribute = "route_name"; break;
            default: {
              auto& v = t.get(Descriptor::vehicle_id_vab);
              v = "  " + v.value_or("BUS") + " ";
              sl.attribute = "vehicle_id_vab";
              break;
            }
          }
          break;
        }
        case Defect::corrupt_unrepairable: {
          if (c % 2 == 0) {
            t.get(Descriptor::vlr_id) = "12a4";
            sl.attribute = "vlr_id";
          } else {
            t.get(Descriptor::bdescription) = std::string("Codiac\x01\x02");
            sl.attribute = "bdescription";
          }
          break;
        }
        case Defect::none:
          break;
      }
    }
  };
  assign(Defect::missing_essential, profile.missing_essential);
  assign(Defect::missing_attribute, profile.missing_attribute);
  assign(Defect::extra_attribute, profile.extra_attribute);
  assign(Defect::corrupt_standardizable, profile.corrupt_standardizable);
  assign(Defect::corrupt_unrepairable, profile.corrupt_unrepairable);

  std::vector<std::size_t> clean;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!slots[s].dropped && slots[s].defect == Defect::none) clean.push_back(s);
  }
  if (profile.duplicates > 0 && clean.empty()) throw std::invalid_argument("no clean tuples to duplicate");

  std::uniform_real_distribution<double> jitter(0.0, static_cast<double>(profile.arrival_jitter_s));
  std::vector<Emitted> emitted;
  emitted.reserve(slots.size() + profile.duplicates);
  std::vector<double> arrival_of(slots.size(), 0.0);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].dropped) continue;
    const double ts = static_cast<double>(trips[slots[s].trip].start + 5 * static_cast<EpochSeconds>(slots[s].index));
    arrival_of[s] = ts + jitter(rng);
    emitted.push_back({arrival_of[s], rng(), s, false, slots[s].tuple});
  }
  std::uniform_int_distribution<std::size_t> pick(0, clean.empty() ? 0 : clean.size() - 1);
  for (std::size_t c = 0; c < profile.duplicates; ++c) {
    const std::size_t s = clean[pick(rng)];
    RawTuple copy = slots[s].tuple;
    if (c < profile.conflicting_duplicates) {
      Enu e = plane.forward({*copy.lat, *copy.lng});
      e.n += 3.0;
      const LatLng moved = plane.inverse(e);
      copy.lat = moved.lat;
      copy.lng = moved.lng;
    }
    emitted.push_back({arrival_of[s] + jitter(rng), rng(), s, true, std::move(copy)});
  }
  std::sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.tiebreak < b.tiebreak;
  });

  SyntheticStream out;
  auto& truth = out.truth;
  truth.seed = profile.seed;
  truth.gaps = profile.gaps;
  out.tuples.reserve(emitted.size());
  std::map<std::size_t, std::vector<std::size_t>> copies_of;  // slot -> emitted positions
  for (std::size_t i = 0; i < emitted.size(); ++i) {
    auto& e = emitted[i];
    e.tuple.seq = i;
    const Slot& sl = slots[e.slot];
    const std::string trip_id = trips[sl.trip].templ.get(kTripIdField).value_or("");
    const EpochSeconds ts = trips[sl.trip].start + 5 * static_cast<EpochSeconds>(sl.index);
    if (e.copy) {
      truth.defects.push_back({"duplicate", i, {}, trip_id, ts});
    } else if (sl.defect != Defect::none) {
      truth.defects.push_back({defect_name(sl.defect), i, sl.attribute, trip_id, ts});
    }
    if (sl.defect == Defect::none) copies_of[e.slot].push_back(i);
    out.tuples.push_back(e.tuple);
  }

  // Expected report, tallied from the inventory.
  auto& rep = truth.expected;
  rep.input_total = out.tuples.size();
  rep.duplicates_removed = profile.duplicates;
  rep.tuples_deleted = profile.missing_essential;
  rep.values_set_na = profile.missing_attribute + profile.corrupt_unrepairable;
  rep.values_standardized = profile.corrupt_standardizable;
  rep.attributes_stripped = profile.extra_attribute;
  for (const auto& [slot, positions] : copies_of) {
    if (positions.size() < 2) continue;
    const RawTuple& survivor = out.tuples[positions.front()];  // smallest seq
    for (std::size_t k = 1; k < positions.size(); ++k) {
      const RawTuple& other = out.tuples[positions[k]];
      if (other.lat != survivor.lat || other.lng != survivor.lng) ++rep.duplicate_conflicts;
    }
  }
  for (std::size_t i = 0; i < trips.size(); ++i) {
    std::vector<EpochSeconds> ts;
    for (std::size_t s = trip_first[i]; s < trip_first[i + 1]; ++s) {
      const auto& sl = slots[s];
      if (sl.dropped || sl.defect == Defect::missing_essential) continue;
      ts.push_back(trips[i].start + 5 * static_cast<EpochSeconds>(sl.index));
    }
    if (ts.empty()) continue;
    ++rep.trips_in;
    const std::size_t missing = scan_missing(ts);
    rep.missing_tuples_detected += missing;
    if (missing >= profile.sparse_threshold) {
      ++rep.sparse_trips_dropped;
      rep.missing_in_dropped_trips += missing;
      rep.tuples_in_dropped_trips += ts.size();
      const auto& templ = trips[i].templ;
      truth.sparse_trips.push_back({templ.get(kRouteIdField).value_or(""), templ.get(kTripIdField).value_or(""),
                                    utc_date(trips[i].start)});
    } else {
      ++rep.trips_out;
      rep.output_total += ts.size();
    }
  }
  std::sort(truth.sparse_trips.begin(), truth.sparse_trips.end());
  return out;
}

std::vector<PlannedPoint> constant_step_points(const City& city, std::size_t route, std::size_t count, double step_m) {
  const auto& r = city.routes().at(route);
  if (r.points.size() < 2 || !(r.length > 0.0)) throw std::invalid_argument("degenerate route geometry");
  std::vector<PlannedPoint> out;
  out.reserve(count);
  const double period = 2.0 * r.length;
  for (std::size_t i = 0; i < count; ++i) {
    double s = std::fmod(static_cast<double>(i) * step_m, period);
    if (s > r.length) s = period - s;
    PlannedPoint p;
    p.xy = r.at(s);
    p.motion = (i > 0 && step_m > 15.0) ? MotionLabel::move : MotionLabel::stop;
    out.push_back(std::move(p));
  }
  return out;
}

clean::CanonicalTable city_canonical_table(const City& city) {
  clean::CanonicalTable t;
  for (const auto& r : city.routes()) {
    const std::string canonical = "Route " + r.id;
    t.add("route_name", canonical, canonical);
    t.add("route_name", "Rte " + r.id, canonical);
    t.add("route_name", "Route #" + r.id, canonical);
  }
  return t;
}

void FieldRatioConfig::validate() const {
  auto ratio_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (total == 0 || !ratio_ok(duplicate_ratio) || !ratio_ok(sparse_ratio) || !ratio_ok(standardized_ratio) ||
      routes == 0) {
    throw std::invalid_argument("field-ratio config: ratios must lie in [0, 1] and counts be positive");
  }
  if (duplicate_ratio + sparse_ratio >= 1.0) throw std::invalid_argument("field-ratio config: nothing left to keep");
  if (sparse_ratio > 0.0 && sparse_trips == 0) throw std::invalid_argument("field-ratio config: sparse tuples need trips");
}

nlohmann::ordered_json FieldRatioConfig::to_json() const {
  return {{"total", total},
          {"duplicate_ratio", duplicate_ratio},
          {"sparse_ratio", sparse_ratio},
          {"standardized_ratio", standardized_ratio},
          {"sparse_trips", sparse_trips},
          {"routes", routes},
          {"seed", seed}};
}

AcceptanceCorpus build_acceptance_corpus(const FieldRatioConfig& config) {
  config.validate();
  AcceptanceCorpus corpus;
  corpus.config = config;
  corpus.city_config.routes = config.routes;
  const City city(corpus.city_config);
  corpus.canonical = city_canonical_table(city);

  const auto total = static_cast<double>(config.total);
  const auto dups = static_cast<std::size_t>(std::llround(total * config.duplicate_ratio));
  const auto sparse = static_cast<std::size_t>(std::llround(total * config.sparse_ratio));
  const auto standardized = static_cast<std::size_t>(std::llround(total * config.standardized_ratio));
  const std::size_t kept = config.total - dups - sparse;
  if (kept == 0 || (dups > 0 && kept < 2)) throw std::invalid_argument("field-ratio config leaves no clean tuples");

  std::mt19937_64 rng(config.seed);
  const EpochSeconds day0 = 1560124800;  // 2019-06-10T00:00:00Z
  std::vector<SyntheticTrip> trips;
  DefectProfile profile;
  profile.seed = config.seed ^ 0x5eedULL;
  profile.duplicates = dups;
  profile.conflicting_duplicates = std::min<std::size_t>(dups, 25);
  profile.missing_attribute = standardized / 3 + (standardized % 3 > 0 ? 1 : 0);
  profile.extra_attribute = standardized / 3 + (standardized % 3 > 1 ? 1 : 0);
  profile.corrupt_standardizable = standardized / 3;

  auto add_trip = [&](std::size_t route, std::vector<PlannedPoint> pts) {
    const std::size_t i = trips.size();
    const EpochSeconds start = day0 + 86400 * static_cast<EpochSeconds>(i % 7) +
                               3600 * static_cast<EpochSeconds>(6 + (i / 7) % 15) + 60 * static_cast<EpochSeconds>(i % 11);
    const std::string date = utc_date(start).to_string();
    char id[64];
    std::snprintf(id, sizeof id, "%s-%s-%04zu", city.routes()[route].id.c_str(), date.c_str(), i);
    trips.push_back({trip_template(city, route, id), std::move(pts), start});
    corpus.schedule.push_back({id, route, "WK", start});
  };

  // Sparse trips: long dwell plans with one gap of at least the threshold.
  for (std::size_t k = 0; k < config.sparse_trips && sparse > 0; ++k) {
    const std::size_t keep = sparse / config.sparse_trips + (k < sparse % config.sparse_trips ? 1 : 0);
    const std::size_t route = k % config.routes;
    auto pts = plan_trip(city, uniform_plan(city, route, 6, 30));
    if (keep < 2 || pts.size() < keep + profile.sparse_threshold) {
      throw std::invalid_argument("field-ratio config: sparse share does not fit the sparse trips");
    }
    const std::size_t length = pts.size() - keep;
    profile.gaps.push_back({trips.size(), keep / 2, length});
    add_trip(route, std::move(pts));
  }

  std::size_t remaining = kept;
  std::uniform_int_distribution<std::size_t> any_route(0, config.routes - 1);
  while (remaining > 0) {
    const std::size_t route = any_route(rng);
    auto pts = plan_trip(city, random_plan(city, route, rng));
    if (pts.size() > remaining) pts.resize(remaining);
    remaining -= pts.size();
    add_trip(route, std::move(pts));
  }

  auto stream = generate_synthetic(city, trips, profile);
  corpus.tuples = std::move(stream.tuples);
  corpus.truth = std::move(stream.truth);
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const AcceptanceCorpus& corpus) {
  std::filesystem::create_directories(dir);
  io::write_tuples(dir / "corpus.ndjson", corpus.tuples);
  const City city(corpus.city_config);
  refdata::write_gtfs(city.gtfs(corpus.schedule), dir / "gtfs");
  io::write_text(dir / "geometry.geojson", refdata::geometry_to_geojson(city.geometry()));
  io::write_text(dir / "canonical.json", corpus.canonical.to_json().dump(2) + "\n");
  auto truth = corpus.truth.to_json();
  nlohmann::ordered_json meta;
  meta["seed"] = corpus.config.seed;
  meta["config"] = corpus.config.to_json();
  meta["city"] = {{"routes", corpus.city_config.routes},
                  {"blocks", corpus.city_config.blocks},
                  {"origin", {corpus.city_config.origin.lat, corpus.city_config.origin.lng}}};
  for (auto& [k, v] : truth.items()) meta[k] = v;
  io::write_text(dir / "truth.json", meta.dump(1) + "\n");
}

std::vector<RawTuple> random_walk_trip(std::mt19937_64& rng, std::size_t count, double threshold_m, double exclusion_m) {
  std::uniform_real_distribution<double> lat(-60.0, 60.0);
  std::uniform_real_distribution<double> lng(-180.0, 180.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const TangentPlane plane({lat(rng), lng(rng)});
  std::vector<RawTuple> out;
  out.reserve(count);
  Enu pos{};
  LatLng prev = plane.inverse(pos);
  const EpochSeconds start = 1560124800 + static_cast<EpochSeconds>(unit(rng) * 3600.0);
  for (std::size_t i = 0; i < count; ++i) {
    LatLng here = prev;
    if (i > 0) {
      for (;;) {
        const double kind = unit(rng);
        double step = 0.0;
        if (kind < 0.2) {
          step = 0.0;
        } else if (kind < 0.5) {
          step = unit(rng) * threshold_m;
        } else if (kind < 0.7) {
          step = threshold_m + (unit(rng) - 0.5) * 0.5;  // hugging the threshold
        } else {
          step = threshold_m + unit(rng) * 45.0;
        }
        const double h = heading(rng);
        const Enu cand{pos.e + step * std::cos(h), pos.n + step * std::sin(h)};
        const LatLng p = plane.inverse(cand);
        if (std::abs(haversine_m(prev, p) - threshold_m) <= exclusion_m) continue;
        pos = cand;
        here = p;
        break;
      }
    }
    RawTuple t;
    t.seq = i;
    t.get(kRouteIdField) = "R";
    t.get(kTripIdField) = "T";
    t.lat = here.lat;
    t.lng = here.lng;
    t.timestamp = start + 5 * static_cast<EpochSeconds>(i);
    out.push_back(std::move(t));
    prev = here;
  }
  return out;
}

}  // namespace transit::synth
