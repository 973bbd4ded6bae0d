#include <doctest.h>

#include <algorithm>

#include "support/fixtures.hpp"
#include "transit/contextualization.hpp"
#include "transit/partition_engine.hpp"
#include "transit/synth/planner.hpp"

using namespace transit;
using namespace transit::context;
using transit::testing::kOrigin;
using transit::testing::kT0;
using transit::testing::make_raw;
using transit::testing::offset;

namespace {

// Tuples at the given east/north offsets, 5 s apart.
std::vector<RawTuple> trip_at(const std::vector<std::pair<double, double>>& en, const std::string& route = "51") {
  std::vector<RawTuple> out;
  for (std::size_t i = 0; i < en.size(); ++i) {
    out.push_back(make_raw(route, "t1", kT0 + 5 * static_cast<EpochSeconds>(i), offset(kOrigin, en[i].first, en[i].second), i));
  }
  return out;
}

refdata::CircularZone zone(double e, double n, std::string id, refdata::AnchorKind kind = refdata::AnchorKind::station) {
  return {offset(kOrigin, e, n), 30.0, kind, std::move(id)};
}

}  // namespace

TEST_CASE("stop/move labels") {
  const auto trip = trip_at({{0, 0}, {20, 0}, {20, 0}, {34.9, 0}, {50.0, 0}, {50, 14.9}});
  const auto m = detect_stop_move(trip);
  CHECK(m == std::vector<MotionLabel>{MotionLabel::stop, MotionLabel::move, MotionLabel::stop, MotionLabel::stop,
                                      MotionLabel::move, MotionLabel::stop});
  CHECK(detect_stop_move({}).empty());
  CHECK(detect_stop_move(trip_at({{0, 0}})) == std::vector<MotionLabel>{MotionLabel::stop});
}

TEST_CASE("a constant 20 m step trip is all moves after the first") {
  std::vector<std::pair<double, double>> en;
  for (int i = 0; i < 50; ++i) en.push_back({20.0 * i, 0});
  const auto m = detect_stop_move(trip_at(en));
  CHECK(m.front() == MotionLabel::stop);
  CHECK(std::count(m.begin(), m.end(), MotionLabel::move) == 49);
}

TEST_CASE("activity classes split motion by station zone") {
  const refdata::ZoneIndex stations({zone(0, 10, "7")});
  const auto trip = trip_at({{0, 0}, {0, 0}, {200, 0}, {200, 0}, {0, 0}});
  const auto m = detect_stop_move(trip);
  const auto a = classify_activity(trip, m, stations);
  CHECK(a == std::vector<ActivityClass>{ActivityClass::stopover, ActivityClass::stopover, ActivityClass::running,
                                        ActivityClass::suspension_of_movement, ActivityClass::passing});
}

TEST_CASE("street annotation uses the grid and the sentinel") {
  const LocalFrame frame(kOrigin);
  const std::vector<LocalFrame::Xy> pts = {{0, 5}, {400, 5}};
  const std::vector<std::string> names = {"Main St"};
  const auto grid = refdata::build_route_buffer_grid_xy("51", pts, names, frame);
  const auto s = annotate_street(trip_at({{100, 5}, {200, 34}, {300, 55}}), grid);
  CHECK(s == std::vector<std::string>{"Main St", "Main St", std::string(kWrongStreetSegment)});
}

TEST_CASE("station tags and direction around the midpoint") {
  const refdata::ZoneIndex stations({zone(0, 0, "7"), zone(300, 0, "8"), zone(600, 0, "9")});
  const refdata::RouteMidpoint mid{"51", offset(kOrigin, 300, 0), 300, 600, 0};
  const auto trip = trip_at({{0, 5}, {0, 5}, {100, 0}, {300, 5}, {300, 5}, {600, 0}, {700, 0}});
  const auto m = detect_stop_move(trip);
  const auto a = classify_activity(trip, m, stations);
  const auto tags = identify_station(trip, a, stations, mid);
  CHECK(tags[0] == StationTag{"7", Direction::outbound});
  CHECK(tags[1] == StationTag{"7", Direction::outbound});
  CHECK_FALSE(tags[2].has_value());
  CHECK(tags[3] == StationTag{"8", Direction::return_trip});
  CHECK(tags[4] == StationTag{"8", Direction::return_trip});
  CHECK(tags[5] == StationTag{"9", Direction::return_trip});
  CHECK_FALSE(tags[6].has_value());
  CHECK(midpoint_crossing(trip, mid) == 3);
}

TEST_CASE("a trip that never reaches the midpoint is outbound throughout") {
  const refdata::ZoneIndex stations({zone(0, 0, "7")});
  const refdata::RouteMidpoint mid{"51", offset(kOrigin, 5000, 0), 5000, 10000, 0};
  const auto trip = trip_at({{0, 0}, {0, 0}});
  const auto a = classify_activity(trip, detect_stop_move(trip), stations);
  for (const auto& t : identify_station(trip, a, stations, mid)) CHECK(t->direction == Direction::outbound);
}

TEST_CASE("overlapping station zones: nearest centre, then smaller id") {
  const refdata::ZoneIndex stations({zone(20, 0, "b"), zone(-20, 0, "a"), zone(0, 40, "c")});
  const refdata::RouteMidpoint mid{"51", offset(kOrigin, 5000, 0), 5000, 10000, 0};
  const auto trip = trip_at({{0, 0}, {0, 0}, {15, 0}, {15, 0}});
  const auto a = classify_activity(trip, detect_stop_move(trip), stations);
  const auto tags = identify_station(trip, a, stations, mid);
  CHECK(tags[0]->station_id == "a");
  CHECK(tags[2]->station_id == "b");
}

TEST_CASE("intersection tags are independent of station tags") {
  const refdata::ZoneIndex stations({zone(0, 0, "7")});
  const refdata::ZoneIndex inters({zone(0, 0, "int-00001", refdata::AnchorKind::intersection)});
  const auto trip = trip_at({{0, 0}, {0, 31}, {0, 0}});
  const auto tags = identify_intersection(trip, inters);
  CHECK(tags[0] == "int-00001");
  CHECK_FALSE(tags[1].has_value());
  const refdata::RouteMidpoint mid{"51", offset(kOrigin, 5000, 0), 5000, 10000, 0};
  const auto a = classify_activity(trip, detect_stop_move(trip), stations);
  const auto st = identify_station(trip, a, stations, mid);
  CHECK(st[0].has_value());
  CHECK(tags[2].has_value());
}

TEST_CASE("visits are maximal stopover runs") {
  using A = ActivityClass;
  const auto trip = trip_at(std::vector<std::pair<double, double>>(9, {0, 0}));
  const std::vector<A> act = {A::stopover, A::stopover, A::stopover, A::stopover, A::running,
                              A::stopover, A::running,  A::stopover, A::stopover};
  std::vector<std::optional<StationTag>> st(9);
  for (std::size_t i : {0, 1, 2, 3, 5, 7, 8}) st[i] = StationTag{"7", Direction::outbound};
  st[7] = StationTag{"7", Direction::return_trip};
  st[8] = StationTag{"7", Direction::return_trip};
  const auto scan = compute_arrival_departure(trip, act, st);
  REQUIRE(scan.visits.size() == 3);
  CHECK(scan.events[0] == StationEvent::arrival);
  CHECK(scan.events[1] == StationEvent::none);
  CHECK(scan.events[3] == StationEvent::departure);
  CHECK(scan.events[5] == StationEvent::arrival_and_departure);
  CHECK(scan.visits[0].arrival == kT0);
  CHECK(scan.visits[0].departure == kT0 + 15);
  CHECK(scan.visits[1].members == std::vector<std::size_t>{5});
  CHECK(scan.visits[2].direction == Direction::return_trip);
}

TEST_CASE("origin, interior indices, destination") {
  const auto five = tag_origin_destination(5);
  CHECK(five == std::vector<TripPosition>{TripPosition::origin(), TripPosition::at(1), TripPosition::at(2),
                                          TripPosition::at(3), TripPosition::destination()});
  CHECK(tag_origin_destination(2) == std::vector<TripPosition>{TripPosition::origin(), TripPosition::destination()});
  CHECK(tag_origin_destination(1) == std::vector<TripPosition>{TripPosition::origin()});
}

TEST_CASE("contextualize_trip end to end on the synthetic city") {
  const synth::City city;
  const auto ref = refdata::ReferenceData::build(city.gtfs(), city.geometry());
  SUBCASE("empty trip") { CHECK(contextualize_trip({}, ref).tuples.empty()); }
  SUBCASE("unknown route") { CHECK_THROWS_AS(contextualize_trip(trip_at({{0, 0}}, "99"), ref), UnknownRouteError); }
  SUBCASE("single tuple is degenerate") {
    const auto ctx = contextualize_trip(trip_at({{0, 0}}), ref);
    CHECK(ctx.degenerate);
    CHECK(ctx.tuples[0].position == TripPosition::origin());
  }
  SUBCASE("518-tuple baseline fixture") {
    const auto points = synth::plan_trip(city, synth::baseline_fixture_plan(city));
    const auto tuples = synth::to_tuples(city, points, synth::trip_template(city, 0, "51-fixture"), kT0);
    REQUIRE(tuples.size() == 518);
    const auto ctx = contextualize_trip(tuples, ref);
    const auto c = engine::ActivityCounts::of(ctx.tuples);
    CHECK(c.moves == 230);
    CHECK(c.stops == 288);
    CHECK(c.running == 200);
    CHECK(c.passing == 30);
    CHECK(c.stopover == 62);
    CHECK(c.suspension == 226);
    const auto& first = ctx.tuples.front();
    const auto& last = ctx.tuples.back();
    REQUIRE(first.station.has_value());
    REQUIRE(last.station.has_value());
    CHECK(first.station->station_id != last.station->station_id);
  }
  SUBCASE("a trip entirely off the route") {
    std::vector<std::pair<double, double>> en;
    for (int i = 0; i < 30; ++i) en.push_back({200.0 + 20 * i, -200.0});
    std::vector<RawTuple> trip;
    for (std::size_t i = 0; i < en.size(); ++i) {
      trip.push_back(make_raw("51", "t1", kT0 + 5 * static_cast<EpochSeconds>(i),
                                city.to_lat_lng({en[i].first, en[i].second}), i));
    }
    const auto ctx = contextualize_trip(trip, ref);
    for (const auto& t : ctx.tuples) {
      CHECK(t.street == kWrongStreetSegment);
      CHECK_FALSE(t.station.has_value());
    }
    CHECK(ctx.tuples.front().position == TripPosition::origin());
    CHECK(ctx.tuples.back().position == TripPosition::destination());
  }
}
