#include "transit/contextualization.hpp"

#include <cassert>

namespace transit::context {

std::vector<MotionLabel> detect_stop_move(std::span<const RawTuple> trip, double threshold_m) {
  std::vector<MotionLabel> labels;
  if (trip.empty()) return labels;
  labels.reserve(trip.size());
  const LocalFrame frame(trip.front().position());
  labels.push_back(MotionLabel::stop);
  for (std::size_t i = 1; i < trip.size(); ++i) {
    const double d = planar_distance(trip[i - 1].position(), trip[i].position(), frame);
    labels.push_back(d > threshold_m ? MotionLabel::move : MotionLabel::stop);
  }
  return labels;
}

std::vector<ActivityClass> classify_activity(std::span<const RawTuple> trip, std::span<const MotionLabel> motion,
                                             const refdata::ZoneIndex& stations) {
  if (motion.size() != trip.size()) throw std::invalid_argument("classify_activity: label count mismatch");
  std::vector<ActivityClass> out;
  out.reserve(trip.size());
  for (std::size_t i = 0; i < trip.size(); ++i) {
    const bool inside = stations.nearest_containing(trip[i].position()) != nullptr;
    if (motion[i] == MotionLabel::stop) {
      out.push_back(inside ? ActivityClass::stopover : ActivityClass::suspension_of_movement);
    } else {
      out.push_back(inside ? ActivityClass::passing : ActivityClass::running);
    }
  }
  return out;
}

std::vector<std::string> annotate_street(std::span<const RawTuple> trip, const refdata::RouteBufferGrid& grid) {
  std::vector<std::string> out;
  out.reserve(trip.size());
  for (const auto& t : trip) {
    const auto tag = grid.lookup(t.position());
    out.emplace_back(tag ? *tag : kWrongStreetSegment);
  }
  return out;
}

std::size_t midpoint_crossing(std::span<const RawTuple> trip, const refdata::RouteMidpoint& midpoint,
                              double radius_m) {
  for (std::size_t i = 0; i < trip.size(); ++i) {
    if (planar_distance_unchecked(trip[i].position(), midpoint.position) <= radius_m) return i;
  }
  return trip.size();
}

std::vector<std::optional<StationTag>> identify_station(std::span<const RawTuple> trip,
                                                        std::span<const ActivityClass> activity,
                                                        const refdata::ZoneIndex& stations,
                                                        const refdata::RouteMidpoint& midpoint, double radius_m) {
  if (activity.size() != trip.size()) throw std::invalid_argument("identify_station: activity count mismatch");
  const std::size_t turn = midpoint_crossing(trip, midpoint, radius_m);
  std::vector<std::optional<StationTag>> out(trip.size());
  for (std::size_t i = 0; i < trip.size(); ++i) {
    if (activity[i] != ActivityClass::stopover && activity[i] != ActivityClass::passing) continue;
    const auto* zone = stations.nearest_containing(trip[i].position());
    assert(zone && "stopover/passing outside every station zone");
    if (!zone) continue;
    out[i] = StationTag{zone->anchor_id, i < turn ? Direction::outbound : Direction::return_trip};
  }
  return out;
}

std::vector<std::optional<std::string>> identify_intersection(std::span<const RawTuple> trip,
                                                              const refdata::ZoneIndex& intersections) {
  std::vector<std::optional<std::string>> out;
  out.reserve(trip.size());
  for (const auto& t : trip) {
    const auto* zone = intersections.nearest_containing(t.position());
    out.push_back(zone ? std::optional<std::string>(zone->anchor_id) : std::nullopt);
  }
  return out;
}

VisitScan compute_arrival_departure(std::span<const RawTuple> trip, std::span<const ActivityClass> activity,
                                    std::span<const std::optional<StationTag>> stations) {
  if (activity.size() != trip.size() || stations.size() != trip.size()) {
    throw std::invalid_argument("compute_arrival_departure: input size mismatch");
  }
  VisitScan scan;
  scan.events.assign(trip.size(), StationEvent::none);
  auto close = [&](StationVisit& v) {
    if (v.members.size() == 1) {
      scan.events[v.members.front()] = StationEvent::arrival_and_departure;
    } else {
      scan.events[v.members.front()] = StationEvent::arrival;
      scan.events[v.members.back()] = StationEvent::departure;
    }
    scan.visits.push_back(std::move(v));
  };

  std::optional<StationVisit> open;
  for (std::size_t i = 0; i < trip.size(); ++i) {
    const bool stopover = activity[i] == ActivityClass::stopover && stations[i].has_value();
    if (open && (!stopover || stations[i]->station_id != open->station_id ||
                 stations[i]->direction != open->direction)) {
      close(*open);
      open.reset();
    }
    if (!stopover) continue;
    const EpochSeconds ts = trip[i].timestamp.value_or(0);
    if (!open) {
      open = StationVisit{stations[i]->station_id, stations[i]->direction, ts, ts, {}};
    }
    open->members.push_back(i);
    open->arrival = std::min(open->arrival, ts);
    open->departure = std::max(open->departure, ts);
  }
  if (open) close(*open);
  return scan;
}

std::vector<TripPosition> tag_origin_destination(std::size_t n) {
  std::vector<TripPosition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      out.push_back(TripPosition::origin());
    } else if (i + 1 == n) {
      out.push_back(TripPosition::destination());
    } else {
      out.push_back(TripPosition::at(static_cast<std::uint32_t>(i)));
    }
  }
  return out;
}

TripContext contextualize_trip(std::span<const RawTuple> trip, const refdata::ReferenceData& reference,
                               const ContextParams& params) {
  TripContext ctx;
  if (trip.empty()) return ctx;
  const auto& route_id = trip.front().get(kRouteIdField);
  const auto* route = route_id ? reference.route(*route_id) : nullptr;
  if (!route) throw UnknownRouteError("no reference data for route " + route_id.value_or("<missing>"));

  const double radius = reference.params().zone_radius_m;
  const auto motion = detect_stop_move(trip, params.stop_move_threshold_m);
  const auto activity = classify_activity(trip, motion, route->stations);
  const auto streets = annotate_street(trip, route->grid);
  const auto stations = identify_station(trip, activity, route->stations, route->midpoint, radius);
  const auto intersections = identify_intersection(trip, reference.intersections());
  auto visits = compute_arrival_departure(trip, activity, stations);
  const auto positions = tag_origin_destination(trip.size());

  ctx.tuples.reserve(trip.size());
  for (std::size_t i = 0; i < trip.size(); ++i) {
    ctx.tuples.push_back({trip[i], motion[i], activity[i], streets[i], stations[i], intersections[i],
                          visits.events[i], positions[i]});
  }
  ctx.visits = std::move(visits.visits);
  ctx.degenerate = trip.size() == 1;
  return ctx;
}

nlohmann::ordered_json visit_to_json(const TripKey& key, const StationVisit& v) {
  return {
      {"route_id", key.route_id},
      {"trip_id", key.trip_id},
      {"service_date", key.service_date.to_string()},
      {"station_id", v.station_id},
      {"direction", to_string(v.direction)},
      {"arrival", format_iso8601(v.arrival)},
      {"departure", format_iso8601(v.departure)},
      {"dwell_s", v.departure - v.arrival},
      {"tuples", v.members.size()},
  };
}

}  // namespace transit::context
