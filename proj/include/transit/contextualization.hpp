#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/core_model.hpp"
#include "transit/reference_data.hpp"

namespace transit::context {

inline constexpr double kStopMoveThresholdM = 15.0;

class UnknownRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The first tuple is a stop; every later tuple is a move when it lies
// strictly more than `threshold_m` from its predecessor. Distances are taken in
// a frame centred on the first tuple.
std::vector<MotionLabel> detect_stop_move(std::span<const RawTuple> trip, double threshold_m = kStopMoveThresholdM);

// Stop inside a station zone is stopover, outside is suspension of movement;
// a move inside is passing, outside is running.
std::vector<ActivityClass> classify_activity(std::span<const RawTuple> trip, std::span<const MotionLabel> motion,
                                             const refdata::ZoneIndex& stations);

// Street name from the route buffer grid, or the wrong-street sentinel.
std::vector<std::string> annotate_street(std::span<const RawTuple> trip, const refdata::RouteBufferGrid& grid);

// Index of the first tuple within `radius_m` of the midpoint, or trip.size()
// when the trip never gets there.
std::size_t midpoint_crossing(std::span<const RawTuple> trip, const refdata::RouteMidpoint& midpoint,
                              double radius_m = 30.0);

// Stopover and passing tuples get the containing station and the
// direction relative to the midpoint crossing; others get nothing.
std::vector<std::optional<StationTag>> identify_station(std::span<const RawTuple> trip,
                                                        std::span<const ActivityClass> activity,
                                                        const refdata::ZoneIndex& stations,
                                                        const refdata::RouteMidpoint& midpoint,
                                                        double radius_m = 30.0);

// Nearest intersection zone containing each tuple, regardless of activity.
std::vector<std::optional<std::string>> identify_intersection(std::span<const RawTuple> trip,
                                                              const refdata::ZoneIndex& intersections);

struct StationVisit {
  std::string station_id;
  Direction direction = Direction::outbound;
  EpochSeconds arrival = 0;
  EpochSeconds departure = 0;
  std::vector<std::size_t> members;  // tuple indices within the trip

  bool operator==(const StationVisit&) const = default;
};

struct VisitScan {
  std::vector<StationVisit> visits;
  std::vector<StationEvent> events;
};

// Each maximal run of consecutive stopovers at the same station and
// direction is one visit.
VisitScan compute_arrival_departure(std::span<const RawTuple> trip, std::span<const ActivityClass> activity,
                                    std::span<const std::optional<StationTag>> stations);

// First tuple is the origin, last the destination, the rest keep their index.
std::vector<TripPosition> tag_origin_destination(std::size_t trip_size);

struct TripContext {
  std::vector<ContextTuple> tuples;
  std::vector<StationVisit> visits;
  bool degenerate = false;  // single-tuple trip: origin without destination
};

struct ContextParams {
  double stop_move_threshold_m = kStopMoveThresholdM;
};

// Full annotation of one timestamp-sorted trip. Throws UnknownRouteError when the
// route has no reference data and FrameRangeError when the trip leaves the
// local frame.
TripContext contextualize_trip(std::span<const RawTuple> trip, const refdata::ReferenceData& reference,
                               const ContextParams& params = {});

nlohmann::ordered_json visit_to_json(const TripKey& key, const StationVisit& visit);

}  // namespace transit::context
