#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "transit/cleaning.hpp"
#include "transit/synth/corpus.hpp"
#include "transit/synth/oracle.hpp"
#include "transit/tuple_io.hpp"

using namespace transit;
using namespace transit::synth;
using transit::testing::kOrigin;
using transit::testing::kT0;
using transit::testing::make_raw;
using transit::testing::offset;

namespace {

std::vector<SyntheticTrip> straight_trips(const City& city, std::size_t n, std::size_t per_trip) {
  std::vector<SyntheticTrip> trips;
  for (std::size_t i = 0; i < n; ++i) {
    trips.push_back({trip_template(city, 0, "51-" + std::to_string(i)), constant_step_points(city, 0, per_trip, 20.0),
                     kT0 + 4000 * static_cast<EpochSeconds>(i)});
  }
  return trips;
}

}  // namespace

TEST_CASE("haversine reference value") {
  CHECK(haversine_m({46.0, -64.78}, {46.001, -64.78}) == doctest::Approx(111.195080).epsilon(1e-7));
  CHECK(haversine_m(kOrigin, kOrigin) == 0.0);
}

TEST_CASE("tangent plane round-trip") {
  const TangentPlane plane(kOrigin);
  const auto p = plane.inverse({350.0, -120.0});
  const auto back = plane.forward(p);
  CHECK(back.e == doctest::Approx(350.0).epsilon(1e-9));
  CHECK(back.n == doctest::Approx(-120.0).epsilon(1e-9));
}

TEST_CASE("oracle stop/move on trivial trips") {
  std::vector<RawTuple> still, moving;
  for (int i = 0; i < 10; ++i) {
    still.push_back(make_raw("51", "a", kT0 + 5 * i, kOrigin));
    moving.push_back(make_raw("51", "a", kT0 + 5 * i, offset(kOrigin, 20.0 * i, 0)));
  }
  for (auto m : oracle_stop_move(still)) CHECK(m == MotionLabel::stop);
  const auto mv = oracle_stop_move(moving);
  CHECK(mv[0] == MotionLabel::stop);
  for (std::size_t i = 1; i < mv.size(); ++i) CHECK(mv[i] == MotionLabel::move);
}

TEST_CASE("oracle grid lookup") {
  const TangentPlane plane(kOrigin);
  const std::vector<LatLng> line = {plane.inverse({0, 0}), plane.inverse({200, 0}), plane.inverse({200, 200})};
  const std::vector<std::string> names = {"A", "B"};
  CHECK(oracle_grid_lookup(plane.inverse({100, 0}), line, names) == "A");
  CHECK(oracle_grid_lookup(plane.inverse({200, 100}), line, names) == "B");
  CHECK_FALSE(oracle_grid_lookup(plane.inverse({100, 31}), line, names).has_value());
  CHECK(oracle_grid_lookup(plane.inverse({100, 29}), line, names) == "A");
}

TEST_CASE("zero-defect profile gives a clean cadence stream") {
  const City city;
  const auto s = generate_synthetic(city, straight_trips(city, 2, 100), {});
  CHECK(s.tuples.size() == 200);
  CHECK(s.truth.defects.empty());
  CHECK(s.truth.gaps.empty());
  const auto r = clean::clean_dataset(s.tuples);
  CHECK(r.report.no_corrections());
  for (const auto& trip : r.trips) {
    for (std::size_t i = 1; i < trip.tuples.size(); ++i) {
      CHECK(*trip.tuples[i].timestamp - *trip.tuples[i - 1].timestamp == 5);
    }
  }
}

TEST_CASE("ten duplicates in a thousand tuples are exactly the ones in ground truth") {
  const City city;
  DefectProfile p;
  p.seed = 77;
  p.duplicates = 10;
  const auto s = generate_synthetic(city, straight_trips(city, 4, 248), p);
  CHECK(s.tuples.size() == 1002);  // 992 + 10

  // brute-force scan of the output
  std::map<std::pair<std::string, EpochSeconds>, int> count;
  for (const auto& t : s.tuples) ++count[{*t.get(kTripIdField), *t.timestamp}];
  std::set<std::pair<std::string, EpochSeconds>> seen;
  std::size_t extra = 0;
  for (const auto& [k, n] : count) {
    if (n > 1) {
      seen.insert(k);
      extra += static_cast<std::size_t>(n - 1);
    }
  }
  CHECK(extra == 10);
  std::set<std::pair<std::string, EpochSeconds>> truth;
  std::size_t records = 0;
  for (const auto& d : s.truth.defects) {
    if (d.kind != "duplicate") continue;
    truth.insert({d.trip, d.timestamp});
    ++records;
  }
  CHECK(records == 10);
  CHECK(truth == seen);
}

TEST_CASE("dropping 100 consecutive tuples makes the trip sparse downstream") {
  const City city;
  DefectProfile p;
  p.gaps = {{1, 50, 100}};
  const auto s = generate_synthetic(city, straight_trips(city, 3, 300), p);
  CHECK(s.tuples.size() == 800);
  const auto r = clean::clean_dataset(s.tuples);
  REQUIRE(r.dropped_trips.size() == 1);
  CHECK(r.dropped_trips[0].trip_id == "51-1");
  CHECK(r.report == s.truth.expected);
}

TEST_CASE("ground truth matches a scan of every defect class") {
  const City city;
  DefectProfile p;
  p.seed = 3;
  p.duplicates = 30;
  p.conflicting_duplicates = 5;
  p.missing_attribute = 9;
  p.missing_essential = 6;
  p.extra_attribute = 4;
  p.corrupt_standardizable = 3;
  p.corrupt_unrepairable = 2;
  const auto s = generate_synthetic(city, straight_trips(city, 5, 200), p);
  std::size_t extras = 0, missing_essential = 0, missing_attr = 0;
  for (const auto& t : s.tuples) {
    extras += t.extras.size();
    if (!t.timestamp || !t.lat || !t.lng || !t.get(kRouteIdField) || !t.get(kTripIdField)) ++missing_essential;
    for (std::size_t i = 0; i < kDescriptorCount; ++i) {
      const auto d = static_cast<Descriptor>(i);
      if (!t.descriptors[i] && d != kRouteIdField && d != kTripIdField) ++missing_attr;
    }
  }
  CHECK(extras == 4);
  CHECK(missing_essential == 6);
  CHECK(missing_attr == 9);
  clean::CleanConfig cfg;
  cfg.canonical = city_canonical_table(city);
  CHECK(clean::clean_dataset(s.tuples, cfg).report == s.truth.expected);
}

TEST_CASE("generator rejects impossible profiles") {
  const City city;
  DefectProfile p;
  p.duplicates = 1;
  p.conflicting_duplicates = 2;
  CHECK_THROWS_AS(generate_synthetic(city, straight_trips(city, 1, 10), p), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(city, {{trip_template(city, 0, "x"), {}, kT0}}, {}), std::invalid_argument);
  DefectProfile q;
  q.missing_attribute = 50;
  CHECK_THROWS_AS(generate_synthetic(city, straight_trips(city, 1, 10), q), std::invalid_argument);
}

TEST_CASE("seeded corpus is byte-identical across runs") {
  FieldRatioConfig c;
  c.total = 5000;
  const auto a = build_acceptance_corpus(c);
  const auto b = build_acceptance_corpus(c);
  REQUIRE(a.tuples.size() == 5000);
  std::string sa, sb;
  for (const auto& t : a.tuples) sa += io::to_ndjson_line(t) + "\n";
  for (const auto& t : b.tuples) sb += io::to_ndjson_line(t) + "\n";
  CHECK(sa == sb);
  CHECK(a.truth.to_json().dump() == b.truth.to_json().dump());
}

TEST_CASE("field-ratio config validation") {
  FieldRatioConfig c;
  c.duplicate_ratio = 1.2;
  CHECK_THROWS_AS(build_acceptance_corpus(c), std::invalid_argument);
  FieldRatioConfig d;
  d.duplicate_ratio = 0.6;
  d.sparse_ratio = 0.5;
  CHECK_THROWS_AS(build_acceptance_corpus(d), std::invalid_argument);
}

TEST_CASE("zero-defect field-ratio config keeps every tuple") {
  FieldRatioConfig c;
  c.total = 3000;
  c.duplicate_ratio = 0.0;
  c.sparse_ratio = 0.0;
  c.standardized_ratio = 0.0;
  const auto corpus = build_acceptance_corpus(c);
  clean::CleanConfig cfg;
  cfg.canonical = corpus.canonical;
  const auto r = clean::clean_dataset(corpus.tuples, cfg);
  CHECK(r.report.output_total == r.report.input_total);
  CHECK(r.report == corpus.truth.expected);
}

TEST_CASE("random walks keep clear of the 15 m threshold") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 50; ++i) {
    const auto trip = random_walk_trip(rng, 40);
    for (std::size_t k = 1; k < trip.size(); ++k) {
      CHECK(std::abs(haversine_m(trip[k - 1].position(), trip[k].position()) - 15.0) > 0.02);
    }
  }
}
