#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "transit/reference_data.hpp"
#include "transit/synth/city.hpp"
#include "transit/synth/geo.hpp"
#include "transit/tuple_io.hpp"

using namespace transit;
using namespace transit::refdata;
using transit::testing::kOrigin;
using transit::testing::offset;

namespace {

// 30 routes with 21 scheduled stations each plus 12 unscheduled ones.
GtfsBundle regional_bundle() {
  GtfsBundle b;
  for (int r = 0; r < 30; ++r) {
    const std::string rid = std::to_string(100 + r);
    b.routes.push_back({rid, rid, "Route " + rid});
    b.trips.push_back({rid + "-1", rid, "WK", 0});
    for (int s = 0; s < 21; ++s) {
      const std::string sid = rid + "-" + std::to_string(s);
      b.stations.push_back({sid, "Stop " + sid, offset(kOrigin, 300.0 * s, 500.0 * r)});
      char clock[16];
      std::snprintf(clock, sizeof clock, "08:%02d:00", s * 2);
      b.stop_times.push_back({rid + "-1", sid, clock, clock, s + 1});
    }
  }
  for (int s = 0; s < 12; ++s) b.stations.push_back({"x" + std::to_string(s), "Depot", offset(kOrigin, -500.0, 90.0 * s)});
  return b;
}

NamedPolyline polyline_xy(const LocalFrame& f, std::string id, std::vector<LocalFrame::Xy> pts,
                          std::vector<std::string> names) {
  NamedPolyline p{std::move(id), {}, std::move(names)};
  for (auto xy : pts) p.points.push_back(f.unproject(xy));
  return p;
}

NamedPolyline road(const synth::TangentPlane& plane, std::string name, std::vector<synth::Enu> pts) {
  NamedPolyline p{name, {}, {}};
  for (auto e : pts) p.points.push_back(plane.inverse(e));
  p.leg_names.assign(pts.size() - 1, name);
  return p;
}

}  // namespace

TEST_CASE("minimal GTFS bundle loads") {
  testing::TempDir dir("gtfs-min");
  GtfsBundle b;
  b.routes.push_back({"1", "1", "One"});
  b.trips.push_back({"t", "1", "WK", std::nullopt});
  b.stations.push_back({"a", "A", kOrigin});
  b.stations.push_back({"b", "B", offset(kOrigin, 100, 0)});
  b.stop_times.push_back({"t", "a", "08:00:00", "08:00:00", 1});
  b.stop_times.push_back({"t", "b", "08:01:00", "08:01:00", 2});
  write_gtfs(b, dir.path());
  const auto loaded = load_gtfs(dir.path());
  CHECK(loaded.stations.size() == 2);
  CHECK(loaded.stations_for_route("1") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("regional GTFS fixture echoes 30 routes and 642 stations") {
  testing::TempDir dir("gtfs-642");
  write_gtfs(regional_bundle(), dir.path());
  const auto b = load_gtfs(dir.path());
  CHECK(b.routes.size() == 30);
  CHECK(b.stations.size() == 642);
  CHECK(b.stop_times.size() == 630);
  const auto zones = build_station_zones(b);
  CHECK(zones.size() == 642);
  for (std::size_t i = 0; i < zones.size(); ++i) {
    CHECK(zones[i].radius_m == 30.0);
    CHECK(zones[i].center == b.stations[i].position);
  }
  const auto wide = build_station_zones(b, 50.0);
  CHECK(std::all_of(wide.begin(), wide.end(), [](const CircularZone& z) { return z.radius_m == 50.0; }));
}

TEST_CASE("GTFS loading names a missing file") {
  testing::TempDir dir("gtfs-missing");
  write_gtfs(regional_bundle(), dir.path());
  std::filesystem::remove(dir / "trips.txt");
  try {
    load_gtfs(dir.path());
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("trips.txt") != std::string::npos);
  }
}

TEST_CASE("GTFS validation lists dangling station ids") {
  testing::TempDir dir("gtfs-dangling");
  auto b = regional_bundle();
  b.stop_times.push_back({"100-1", "nowhere", "09:00:00", "09:00:00", 99});
  write_gtfs(b, dir.path());
  try {
    load_gtfs(dir.path());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.offending_ids == std::vector<std::string>{"station:nowhere"});
  }
}

TEST_CASE("zone membership at the 30 m boundary") {
  // north offsets of 29.9 m and 30.1 m on the 6371008.8 m sphere
  const CircularZone z{kOrigin, 30.0, AnchorKind::station, "s"};
  CHECK(z.contains({46.0880688968, -64.7782}));
  CHECK_FALSE(z.contains({46.0880706954, -64.7782}));
  CHECK(z.contains({46.0878, -64.7778122922}));
  CHECK_FALSE(z.contains({46.0878, -64.7778096988}));
}

TEST_CASE("zone index picks the nearest center, then the smaller id") {
  const auto a = offset(kOrigin, -10, 0);
  const auto b = offset(kOrigin, 10, 0);
  const ZoneIndex idx({{b, 30.0, AnchorKind::station, "b"}, {a, 30.0, AnchorKind::station, "a"}});
  CHECK(idx.nearest_containing(offset(kOrigin, 5, 0))->anchor_id == "b");
  CHECK(idx.nearest_containing(offset(kOrigin, -5, 0))->anchor_id == "a");
  const auto* tie = idx.nearest_containing(kOrigin);
  REQUIRE(tie != nullptr);
  CHECK(tie->anchor_id == "a");
  CHECK(idx.nearest_containing(offset(kOrigin, 0, 200)) == nullptr);
}

TEST_CASE("zone index agrees with a linear scan") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-500, 500);
  std::vector<CircularZone> zones;
  for (int i = 0; i < 60; ++i) zones.push_back({offset(kOrigin, u(rng), u(rng)), 30.0, AnchorKind::station, "z" + std::to_string(i)});
  const ZoneIndex idx(zones);
  for (int i = 0; i < 2000; ++i) {
    const auto p = offset(kOrigin, u(rng), u(rng));
    const CircularZone* best = nullptr;
    for (const auto& z : zones) {
      if (!z.contains(p)) continue;
      if (!best || z.distance_to(p) < best->distance_to(p) ||
          (z.distance_to(p) == best->distance_to(p) && z.anchor_id < best->anchor_id)) {
        best = &z;
      }
    }
    const auto* got = idx.nearest_containing(p);
    CHECK((got ? got->anchor_id : "") == (best ? best->anchor_id : ""));
  }
}

TEST_CASE("a straight 100 m leg gets a seven cell band") {
  // Brute-force scan of cell centres within 30 m of the leg y = 5, x in [0, 100]:
  // rows -3..3, 96 cells in all.
  const LocalFrame frame(kOrigin);
  const std::vector<LocalFrame::Xy> pts = {{0, 5}, {100, 5}};
  const std::vector<std::string> names = {"Main St"};
  const auto g = build_route_buffer_grid_xy("r", pts, names, frame);
  CHECK(g.tagged_cells() == 96);
  std::set<int> rows;
  for (const auto& [c, tag] : g.cells()) rows.insert(c.j);
  CHECK(rows == std::set<int>{-3, -2, -1, 0, 1, 2, 3});
  CHECK(g.lookup_xy({0, 5}) == "Main St");
  CHECK(g.lookup_xy({100, 5}) == "Main St");
  CHECK(g.lookup_xy({50, 34}) == "Main St");  // 29 m off the centreline
  CHECK_FALSE(g.lookup_xy({50, 46}).has_value());
}

TEST_CASE("corner cells equidistant from two legs go to the earlier leg") {
  const LocalFrame frame(kOrigin);
  const std::vector<LocalFrame::Xy> pts = {{0, 0}, {100, 0}, {100, 100}};
  const std::vector<std::string> names = {"A", "B"};
  const auto g = build_route_buffer_grid_xy("r", pts, names, frame);
  CHECK(g.tagged_cells() == 151);
  std::size_t a = 0;
  for (const auto& [c, tag] : g.cells()) a += tag == "A";
  CHECK(a == 81);
  // exact ties found by the brute-force scan
  const std::vector<std::pair<int, int>> ties = {{7, 2},   {8, 1},   {9, 0},   {10, -3}, {10, -2}, {10, -1},
                                                 {11, -3}, {11, -2}, {11, -1}, {12, -2}, {12, -1}};
  for (auto [i, j] : ties) CHECK(g.tag({i, j}) == "A");
  CHECK(g.lookup_xy({100, 100}) == "B");
}

TEST_CASE("unnamed legs are a build error") {
  const LocalFrame frame(kOrigin);
  const std::vector<LocalFrame::Xy> pts = {{0, 0}, {100, 0}, {100, 100}};
  const std::vector<std::string> names = {"A", ""};
  CHECK_THROWS_AS(build_route_buffer_grid_xy("r", pts, names, frame), BuildError);
  const std::vector<std::string> short_names = {"A"};
  CHECK_THROWS_AS(build_route_buffer_grid_xy("r", pts, short_names, frame), BuildError);
}

TEST_CASE("grid export lists every tagged cell") {
  const LocalFrame frame(kOrigin);
  const std::vector<LocalFrame::Xy> pts = {{0, 5}, {100, 5}};
  const std::vector<std::string> names = {"Main St"};
  const auto csv = grid_to_csv(build_route_buffer_grid_xy("r", pts, names, frame));
  CHECK(csv.rfind("cell_i,cell_j,center_lat,center_lng,tag\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 97);
}

TEST_CASE("intersections from shared endpoints") {
  const synth::TangentPlane plane(kOrigin);
  SUBCASE("four legs meeting at one point") {
    const std::vector<NamedPolyline> roads = {road(plane, "N", {{0, 0}, {0, 200}}), road(plane, "S", {{0, 0}, {0, -200}}),
                                              road(plane, "E", {{0, 0}, {200, 0}}), road(plane, "W", {{0, 0}, {-200, 0}})};
    const auto z = derive_intersections(roads);
    REQUIRE(z.size() == 1);
    CHECK(z[0].anchor_id == "int-00001");
    CHECK(synth::haversine_m(z[0].center, kOrigin) < 1e-6);
  }
  SUBCASE("T junction counts, a bend and a dead end do not") {
    const std::vector<NamedPolyline> roads = {road(plane, "A", {{-200, 0}, {0, 0}, {200, 0}}),
                                              road(plane, "B", {{0, 0}, {0, 300}}),
                                              road(plane, "C", {{500, 0}, {700, 0}, {700, 200}})};
    const auto z = derive_intersections(roads);
    REQUIRE(z.size() == 1);
    CHECK(synth::haversine_m(z[0].center, kOrigin) < 1e-6);
  }
  SUBCASE("endpoints within the snap tolerance merge") {
    const std::vector<NamedPolyline> roads = {road(plane, "A", {{-200, 0}, {0, 0}}), road(plane, "B", {{0.4, 0.3}, {200, 0}}),
                                              road(plane, "C", {{0, -0.5}, {0, -200}})};
    CHECK(derive_intersections(roads).size() == 1);
  }
  SUBCASE("empty network") { CHECK(derive_intersections({}).empty()); }
}

TEST_CASE("a 3x3 street grid has 9 intersections, independent of input order") {
  const synth::TangentPlane plane(kOrigin);
  std::vector<NamedPolyline> roads;
  for (int k = 0; k < 3; ++k) {
    const double c = 400.0 * k;
    roads.push_back(road(plane, "H" + std::to_string(k), {{-100, c}, {0, c}, {400, c}, {800, c}, {900, c}}));
    roads.push_back(road(plane, "V" + std::to_string(k), {{c, -100}, {c, 0}, {c, 400}, {c, 800}, {c, 900}}));
  }
  const auto z = derive_intersections(roads);
  REQUIRE(z.size() == 9);
  for (std::size_t i = 1; i < z.size(); ++i) {
    CHECK(std::tie(z[i - 1].center.lat, z[i - 1].center.lng) < std::tie(z[i].center.lat, z[i].center.lng));
  }
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    std::shuffle(roads.begin(), roads.end(), rng);
    const auto again = derive_intersections(roads);
    REQUIRE(again.size() == z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(again[i].anchor_id == z[i].anchor_id);
      CHECK(again[i].center == z[i].center);
    }
  }
}

TEST_CASE("route midpoint by arc length") {
  const synth::TangentPlane plane(kOrigin);
  auto line = [&](std::vector<synth::Enu> pts) {
    std::vector<LatLng> out;
    for (auto e : pts) out.push_back(plane.inverse(e));
    return out;
  };
  SUBCASE("straight") {
    const auto m = route_midpoint("r", line({{0, 0}, {0, 100}}));
    CHECK(synth::haversine_m(m.position, plane.inverse({0, 50})) < 0.01);
    CHECK(m.total_length_m == doctest::Approx(100.0).epsilon(1e-4));
  }
  SUBCASE("L shape 60 m then 40 m stays on the first leg") {
    const auto m = route_midpoint("r", line({{0, 0}, {60, 0}, {60, 40}}));
    CHECK(m.leg == 0);
    CHECK(synth::haversine_m(m.position, plane.inverse({50, 0})) < 0.01);
  }
  SUBCASE("closed square loop lands on the opposite corner") {
    const auto m = route_midpoint("r", line({{0, 0}, {100, 0}, {100, 100}, {0, 100}, {0, 0}}));
    CHECK(synth::haversine_m(m.position, plane.inverse({100, 100})) < 0.01);
  }
  SUBCASE("degenerate polylines") {
    CHECK_THROWS_AS(route_midpoint("r", line({{0, 0}})), std::invalid_argument);
    CHECK_THROWS_AS(route_midpoint("r", line({{5, 5}, {5, 5}})), std::invalid_argument);
  }
}

TEST_CASE("geometry GeoJSON round-trip") {
  const synth::City city;
  const auto g = city.geometry();
  testing::TempDir dir("geo");
  io::write_text(dir / "g.geojson", geometry_to_geojson(g));
  const auto back = load_geometry(dir / "g.geojson");
  REQUIRE(back.routes.size() == g.routes.size());
  CHECK(back.routes[0].leg_names == g.routes[0].leg_names);
  CHECK(back.roads.size() == g.roads.size());
}

TEST_CASE("reference data restricts station zones to the route's schedule") {
  synth::CityConfig cc;
  cc.routes = 2;
  const synth::City city(cc);
  const auto ref = ReferenceData::build(city.gtfs(), city.geometry());
  CHECK(ref.route_count() == 2);
  const auto* r0 = ref.route(city.routes()[0].id);
  REQUIRE(r0 != nullptr);
  CHECK(r0->stations.zones().size() == city.routes()[0].stations.size());
  CHECK(ref.route("nope") == nullptr);
  CHECK(ref.intersections().zones().size() == city.crossings().size());
}
