#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/fixtures.hpp"
#include "transit/core_model.hpp"
#include "transit/synth/geo.hpp"
#include "transit/tuple_io.hpp"

using namespace transit;
using transit::testing::kOrigin;
using transit::testing::offset;

TEST_CASE("schema has the fourteen descriptors in wire order") {
  CHECK(kDescriptorNames.size() == 14);
  CHECK(kDescriptorNames.front() == "vlr_id");
  CHECK(kDescriptorNames.back() == "bdescription");
  CHECK(descriptor_index("trip_id_tta") == 7);
  CHECK_FALSE(descriptor_index("speed").has_value());
}

TEST_CASE("planar_distance identity and the 0.001 degree latitude step") {
  const LocalFrame frame({46.0, -64.78});
  CHECK(planar_distance({46.0, -64.78}, {46.0, -64.78}, frame) == 0.0);
  // haversine on the 6371008.8 m sphere: 111.195080 m
  CHECK(planar_distance({46.0, -64.78}, {46.001, -64.78}, frame) == doctest::Approx(111.195080).epsilon(1e-6));
}

TEST_CASE("planar_distance rejects points outside the frame") {
  const LocalFrame frame(kOrigin);
  const auto far = offset(kOrigin, 0.0, 50500.0);
  CHECK_THROWS_AS(planar_distance(kOrigin, far, frame), FrameRangeError);
  CHECK_NOTHROW(planar_distance(kOrigin, offset(kOrigin, 0.0, 49000.0), frame));
}

TEST_CASE("planar_distance is symmetric and tracks haversine") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-60.0, 60.0), lng(-180.0, 180.0), r(0.0, 5000.0),
      ang(0.0, 6.283185307179586);
  for (int i = 0; i < 1000; ++i) {
    const LatLng o{lat(rng), lng(rng)};
    const LocalFrame frame(o);
    const double ra = r(rng), aa = ang(rng), rb = r(rng), ab = ang(rng);
    const auto a = offset(o, ra * std::cos(aa), ra * std::sin(aa));
    const auto b = offset(o, rb * std::cos(ab), rb * std::sin(ab));
    const double d = planar_distance(a, b, frame);
    CHECK(d == planar_distance(b, a, frame));
    const double h = synth::haversine_m(a, b);
    if (h > 1.0) CHECK(std::abs(d - h) / h < 1e-3);
  }
}

TEST_CASE("planar_distance stays within 0.1% out to the validity radius") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lat(-70.0, 70.0), lng(-180.0, 180.0), r(0.0, 50000.0),
      ang(0.0, 6.283185307179586);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const LatLng o{lat(rng), lng(rng)};
    const LocalFrame frame(o);
    const double ra = r(rng), aa = ang(rng), rb = r(rng), ab = ang(rng);
    const auto a = offset(o, ra * std::cos(aa), ra * std::sin(aa));
    const auto b = offset(o, rb * std::cos(ab), rb * std::sin(ab));
    if (!frame.in_range(a) || !frame.in_range(b)) continue;
    const double h = synth::haversine_m(a, b);
    if (h < 1.0) continue;
    CHECK(std::abs(planar_distance(a, b, frame) - h) / h < 1e-3);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("planar_distance satisfies the triangle inequality") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> r(-3000.0, 3000.0);
  const LocalFrame frame(kOrigin);
  for (int i = 0; i < 1000; ++i) {
    const auto a = offset(kOrigin, r(rng), r(rng));
    const auto b = offset(kOrigin, r(rng), r(rng));
    const auto c = offset(kOrigin, r(rng), r(rng));
    CHECK(planar_distance(a, c, frame) <= planar_distance(a, b, frame) + planar_distance(b, c, frame) + 1e-9);
  }
}

TEST_CASE("LocalFrame project and unproject round-trip") {
  const LocalFrame frame(kOrigin);
  const auto p = offset(kOrigin, 1234.5, -987.25);
  const auto back = frame.unproject(frame.project(p));
  CHECK(back.lat == doctest::Approx(p.lat).epsilon(1e-12));
  CHECK(back.lng == doctest::Approx(p.lng).epsilon(1e-12));
}

TEST_CASE("TripKey orders route, trip, then date") {
  const TripKey a{"51", "t1", {2019, 6, 12}};
  const TripKey b{"51", "t1", {2019, 6, 13}};
  const TripKey c{"51", "t2", {2019, 6, 1}};
  const TripKey d{"52", "t0", {2018, 1, 1}};
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < d);
  CHECK(a.to_string() == "51/t1/2019-06-12");
}

TEST_CASE("TripKey ordering is a total order") {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> pick(0, 3);
  const char* ids[] = {"1", "10", "2", "A"};
  auto key = [&] {
    return TripKey{ids[pick(rng)], ids[pick(rng)], {2019, 6, static_cast<unsigned>(1 + pick(rng))}};
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = key(), b = key(), c = key();
    CHECK((a < b) + (b < a) + (a == b) == 1);
    if (a < b && b < c) CHECK(a < c);
    if (a <= b && b <= a) CHECK(a == b);
  }
}

TEST_CASE("trip key date comes from the UTC day of the tuple") {
  auto t = testing::make_raw("51", "t1", 1560383995, kOrigin);  // 2019-06-12T23:59:55Z
  CHECK(trip_key_of(t)->service_date.to_string() == "2019-06-12");
  t.timestamp = 1560384000;
  CHECK(trip_key_of(t)->service_date.to_string() == "2019-06-13");
  t.get(kTripIdField).reset();
  CHECK_FALSE(trip_key_of(t).has_value());
}

TEST_CASE("timestamps parse from ISO-8601 and epoch seconds") {
  CHECK(parse_timestamp("1560326400") == 1560326400);
  CHECK(parse_timestamp("2019-06-12T08:00:00Z") == 1560326400);
  CHECK(parse_timestamp("2019-06-12 08:00:00") == 1560326400);
  CHECK(parse_timestamp("2019-06-12T05:00:00-03:00") == 1560326400);
  CHECK(parse_timestamp("2019-06-12T08:00:00.750Z") == 1560326400);
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
  CHECK(format_iso8601(1560326400) == "2019-06-12T08:00:00Z");
}

TEST_CASE("NDJSON round-trip keeps descriptors, extras and coordinates") {
  auto t = testing::make_raw("51", "t1", testing::kT0, kOrigin, 42);
  t.extras.push_back({"speed_kmh", "31"});
  const auto line = io::to_ndjson_line(t, true);
  const auto back = io::raw_from_ndjson_line(line, 0);
  CHECK(back.same_content(t));
  CHECK(back.seq == 42);
}

TEST_CASE("context NDJSON round-trip") {
  ContextTuple c;
  c.base = testing::make_raw("51", "t1", testing::kT0, kOrigin, 3);
  c.motion = MotionLabel::move;
  c.activity = ActivityClass::passing;
  c.street = "Main St";
  c.station = StationTag{"51-A", Direction::return_trip};
  c.intersection = "int-00001";
  c.event = StationEvent::none;
  c.position = TripPosition::at(4);
  const auto j = io::to_json(c);
  CHECK(j["a21_station"]["direction"] == "return");
  const auto back = io::context_from_json(j);
  CHECK(io::to_ndjson_line(back) == io::to_ndjson_line(c));
}
