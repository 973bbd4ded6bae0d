#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "transit/core_model.hpp"
#include "transit/synth/city.hpp"

// Brute-force reference implementations. Distances come from haversine or the
// tangent plane in geo.hpp; nothing here calls into the production modules.
namespace transit::synth {

std::vector<MotionLabel> oracle_stop_move(std::span<const RawTuple> trip, double threshold_m = 15.0);

// Name of the nearest leg within `half_width_m` of the point, by exact
// point-to-segment distance; ties go to the lower leg index.
std::optional<std::string> oracle_grid_lookup(LatLng p, const std::vector<LatLng>& polyline,
                                              const std::vector<std::string>& leg_names, double half_width_m = 30.0);

struct OracleZone {
  std::string id;
  LatLng center;
};

struct OracleRoute {
  std::string id;
  std::vector<LatLng> polyline;
  std::vector<std::string> leg_names;
  std::vector<OracleZone> stations;
  LatLng midpoint;
};

struct OracleReference {
  std::map<std::string, OracleRoute, std::less<>> routes;
  std::vector<OracleZone> intersections;
  double radius_m = 30.0;
  double threshold_m = 15.0;
  double half_width_m = 30.0;
};

// Built from the city description directly, not from GTFS or GeoJSON.
OracleReference oracle_reference(const City& city);

// Nearest zone within radius; ties to the smaller id.
const OracleZone* oracle_zone(LatLng p, const std::vector<OracleZone>& zones, double radius_m);

// Every annotation, sequentially and by exhaustive search.
std::vector<ContextTuple> oracle_contextualize(std::span<const RawTuple> trip, const OracleReference& ref);

}  // namespace transit::synth
