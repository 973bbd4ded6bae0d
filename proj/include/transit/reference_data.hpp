#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "transit/core_model.hpp"

namespace transit::refdata {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> ids)
      : std::runtime_error(what), offending_ids(std::move(ids)) {}
  std::vector<std::string> offending_ids;
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// GTFS

struct Station {
  std::string id;
  std::string name;
  LatLng position;
};

struct Route {
  std::string id;
  std::string short_name;
  std::string long_name;
};

struct Trip {
  std::string id;
  std::string route_id;
  std::string service_id;
  std::optional<int> direction_id;
};

struct StopTime {
  std::string trip_id;
  std::string station_id;
  std::string arrival_time;    // GTFS HH:MM:SS, hours may exceed 23
  std::string departure_time;
  int sequence = 0;
};

struct GtfsBundle {
  std::vector<Station> stations;
  std::vector<Route> routes;
  std::vector<Trip> trips;
  std::vector<StopTime> stop_times;

  const Station* station(std::string_view id) const;
  // Distinct stations visited by any trip of the route, sorted by id.
  std::vector<std::string> stations_for_route(std::string_view route_id) const;
  // Throws ValidationError listing dangling references.
  void validate() const;
};

// Reads stops.txt, routes.txt, trips.txt and stop_times.txt; other GTFS files
// are ignored. Throws LoadError naming a missing file or column.
GtfsBundle load_gtfs(const std::filesystem::path& directory);
void write_gtfs(const GtfsBundle& bundle, const std::filesystem::path& directory);

// ---------------------------------------------------------------------------
// Zones

enum class AnchorKind { station, intersection };

struct CircularZone {
  LatLng center;
  double radius_m = 30.0;
  AnchorKind kind = AnchorKind::station;
  std::string anchor_id;

  double distance_to(LatLng p) const { return planar_distance_unchecked(p, center); }
  bool contains(LatLng p) const { return distance_to(p) <= radius_m; }
};

std::vector<CircularZone> build_station_zones(const GtfsBundle& bundle, double radius_m = 30.0);

// Hash grid over circular zones. Lookups return the containing zone with the
// nearest center; equal distances go to the lexicographically smaller id.
class ZoneIndex {
 public:
  ZoneIndex() = default;
  explicit ZoneIndex(std::vector<CircularZone> zones);

  const CircularZone* nearest_containing(LatLng p) const;
  std::span<const CircularZone> zones() const { return zones_; }
  bool empty() const { return zones_.empty(); }

 private:
  static std::uint64_t key(std::int64_t i, std::int64_t j);

  std::vector<CircularZone> zones_;
  std::optional<LocalFrame> frame_;
  double cell_m_ = 60.0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

// ---------------------------------------------------------------------------
// Geometry

// A polyline whose i-th leg runs from points[i] to points[i+1] and carries
// leg_names[i].
struct NamedPolyline {
  std::string id;  // route id for routes, street name for roads
  std::vector<LatLng> points;
  std::vector<std::string> leg_names;
};

struct Geometry {
  std::vector<NamedPolyline> routes;
  std::vector<NamedPolyline> roads;
};

// GeoJSON FeatureCollection of LineStrings. Features with a `route_id`
// property are route geometry and carry `street_names` (one per leg) or a
// single `street_name`; features sharing a route id are chained in file order.
// Other features are roads named by their `name` property.
Geometry load_geometry(const std::filesystem::path& path);
std::string geometry_to_geojson(const Geometry& geometry);

// ---------------------------------------------------------------------------
// Route buffer grid

class RouteBufferGrid {
 public:
  static constexpr double kDefaultCellM = 10.0;
  static constexpr double kDefaultHalfWidthM = 30.0;

  struct Cell {
    std::int32_t i = 0;
    std::int32_t j = 0;
  };

  const std::string& route_id() const { return route_id_; }
  const LocalFrame& frame() const { return frame_; }
  double cell_size() const { return cell_m_; }
  double half_width() const { return half_width_m_; }
  std::size_t tagged_cells() const { return tags_.size(); }

  Cell cell_of(LocalFrame::Xy p) const;
  LocalFrame::Xy cell_center(Cell c) const;

  // Street name of the cell containing the point, if the cell is tagged.
  std::optional<std::string_view> lookup(LatLng p) const;
  std::optional<std::string_view> lookup_xy(LocalFrame::Xy p) const;
  std::optional<std::string_view> tag(Cell c) const;

  // Tagged cells sorted by (j, i).
  std::vector<std::pair<Cell, std::string_view>> cells() const;

 private:
  friend RouteBufferGrid build_route_buffer_grid_xy(std::string, std::span<const LocalFrame::Xy>,
                                                    std::span<const std::string>, const LocalFrame&,
                                                    double, double);
  RouteBufferGrid(std::string route_id, LocalFrame frame, double cell_m, double half_width_m)
      : route_id_(std::move(route_id)), frame_(frame), cell_m_(cell_m), half_width_m_(half_width_m) {}

  static std::uint64_t key(Cell c);

  std::string route_id_;
  LocalFrame frame_;
  double cell_m_;
  double half_width_m_;
  std::vector<std::string> names_;
  std::unordered_map<std::uint64_t, std::uint32_t> tags_;  // cell -> leg index
};

// Tags every cell whose center lies within `half_width_m` of some leg with the
// name of the nearest leg (ties go to the lower leg index). Coordinates are
// metres in `frame`.
RouteBufferGrid build_route_buffer_grid_xy(std::string route_id, std::span<const LocalFrame::Xy> polyline,
                                           std::span<const std::string> leg_names, const LocalFrame& frame,
                                           double cell_m = RouteBufferGrid::kDefaultCellM,
                                           double half_width_m = RouteBufferGrid::kDefaultHalfWidthM);

RouteBufferGrid build_route_buffer_grid(const NamedPolyline& route, const LocalFrame& frame,
                                        double cell_m = RouteBufferGrid::kDefaultCellM,
                                        double half_width_m = RouteBufferGrid::kDefaultHalfWidthM);

// Debug export: cell_i,cell_j,center_lat,center_lng,tag
std::string grid_to_csv(const RouteBufferGrid& grid);

// ---------------------------------------------------------------------------
// Intersections and midpoints

// One zone per point where at least three legs meet, endpoints snapped within
// `snap_m`. Ids are "int-NNNNN" in (lat, lng) order of the zone centers.
std::vector<CircularZone> derive_intersections(const std::vector<NamedPolyline>& roads,
                                               double radius_m = 30.0, double snap_m = 1.0);

struct RouteMidpoint {
  std::string route_id;
  LatLng position;
  double arc_length_m = 0.0;
  double total_length_m = 0.0;
  std::size_t leg = 0;
};

// The point at half the arc length. Throws std::invalid_argument on a
// polyline with fewer than two points or zero length.
RouteMidpoint route_midpoint(std::string route_id, const std::vector<LatLng>& polyline);

// ---------------------------------------------------------------------------
// Assembled, read-only reference data

struct ReferenceParams {
  double zone_radius_m = 30.0;
  double cell_m = RouteBufferGrid::kDefaultCellM;
  double half_width_m = RouteBufferGrid::kDefaultHalfWidthM;
};

struct RouteReference {
  std::string route_id;
  NamedPolyline polyline;
  RouteBufferGrid grid;
  RouteMidpoint midpoint;
  ZoneIndex stations;
};

class ReferenceData {
 public:
  ReferenceData() = default;

  // Station zones per route come from the route's scheduled stop times; a
  // route without stop times gets every station.
  static ReferenceData build(GtfsBundle gtfs, const Geometry& geometry, const ReferenceParams& params = {});
  static ReferenceData load(const std::filesystem::path& gtfs_dir, const std::filesystem::path& geometry_path,
                            const ReferenceParams& params = {});

  const RouteReference* route(std::string_view route_id) const;
  const ZoneIndex& intersections() const { return intersections_; }
  const GtfsBundle& gtfs() const { return gtfs_; }
  const ReferenceParams& params() const { return params_; }
  std::size_t route_count() const { return routes_.size(); }

 private:
  GtfsBundle gtfs_;
  ReferenceParams params_;
  std::map<std::string, RouteReference, std::less<>> routes_;
  ZoneIndex intersections_;
};

}  // namespace transit::refdata
