#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transit/core_model.hpp"
#include "transit/reference_data.hpp"
#include "transit/synth/geo.hpp"

namespace transit::synth {

// A rectangular street grid with U-shaped bus routes. Route r runs east along
// its outbound street, north along the connector at the east edge, and west
// along its return street. All coordinates are planned in a tangent plane in
// metres and converted to WGS84 once.
struct CityConfig {
  LatLng origin{46.0878, -64.7782};
  std::size_t routes = 1;
  std::size_t blocks = 6;  // blocks per street along a route
  double block_m = 400.0;
  double overhang_m = 100.0;  // roads extend past the last crossing
  double station_offset_m = 8.0;
  bool detour_street = true;  // an extra street one block south of route 0
};

struct CityStation {
  std::string id;
  std::string name;
  std::size_t route = 0;
  double s = 0.0;  // arc position of the station's foot on the route
  Enu xy;
  LatLng position;
};

struct CityRoute {
  std::string id;
  std::vector<Enu> points;
  std::vector<std::string> leg_names;
  std::vector<LatLng> lat_lng;
  std::vector<double> vertex_s;       // arc length at each vertex
  std::vector<std::size_t> stations;  // indices into City::stations, in route order
  std::vector<double> light_s;        // arc positions where a red light holds the bus
  double length = 0.0;
  double y_out = 0.0;
  double y_ret = 0.0;

  Enu at(double s) const;
};

struct CityRoad {
  std::string name;
  std::vector<Enu> points;
};

// A scheduled trip, used to emit GTFS trips and stop times.
struct TripStub {
  std::string trip_id;
  std::size_t route = 0;
  std::string service_id = "WK";
  EpochSeconds start = 0;
};

class City {
 public:
  explicit City(const CityConfig& config = {});

  const CityConfig& config() const { return config_; }
  const TangentPlane& plane() const { return plane_; }
  const std::vector<CityRoute>& routes() const { return routes_; }
  const std::vector<CityStation>& stations() const { return stations_; }
  const std::vector<CityRoad>& roads() const { return roads_; }
  const std::vector<Enu>& crossings() const { return crossings_; }

  LatLng to_lat_lng(Enu p) const { return plane_.inverse(p); }
  std::optional<std::size_t> route_index(std::string_view id) const;

  refdata::Geometry geometry() const;
  // Every route gets a schedule; routes without a stub get one template trip so
  // their station set is defined by stop times.
  refdata::GtfsBundle gtfs(const std::vector<TripStub>& trips = {}) const;

 private:
  CityConfig config_;
  TangentPlane plane_;
  std::vector<CityRoute> routes_;
  std::vector<CityStation> stations_;
  std::vector<CityRoad> roads_;
  std::vector<Enu> crossings_;
};

double enu_distance(Enu a, Enu b);
double enu_point_segment(Enu p, Enu a, Enu b);

}  // namespace transit::synth
