#include "transit/synth/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "transit/synth/geo.hpp"

namespace transit::synth {

std::vector<MotionLabel> oracle_stop_move(std::span<const RawTuple> trip, double threshold_m) {
  std::vector<MotionLabel> out;
  for (std::size_t i = 0; i < trip.size(); ++i) {
    if (i == 0) {
      out.push_back(MotionLabel::stop);
      continue;
    }
    const LatLng a{*trip[i - 1].lat, *trip[i - 1].lng};
    const LatLng b{*trip[i].lat, *trip[i].lng};
    out.push_back(haversine_m(a, b) > threshold_m ? MotionLabel::move : MotionLabel::stop);
  }
  return out;
}

std::optional<std::string> oracle_grid_lookup(LatLng p, const std::vector<LatLng>& polyline,
                                              const std::vector<std::string>& leg_names, double half_width_m) {
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::string> name;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const double d = point_segment_m(p, polyline[i], polyline[i + 1]);
    if (d <= half_width_m && d < best - 1e-6) {  // equal within 1 um: lower leg wins
      best = d;
      name = leg_names.at(i);
    }
  }
  return name;
}

OracleReference oracle_reference(const City& city) {
  OracleReference ref;
  for (const auto& r : city.routes()) {
    OracleRoute o;
    o.id = r.id;
    o.polyline = r.lat_lng;
    o.leg_names = r.leg_names;
    for (std::size_t idx : r.stations) {
      const auto& st = city.stations()[idx];
      o.stations.push_back({st.id, st.position});
    }
    // Half the arc length, walked with great-circle leg lengths.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < o.polyline.size(); ++i) total += haversine_m(o.polyline[i], o.polyline[i + 1]);
    double left = total / 2.0;
    o.midpoint = o.polyline.back();
    for (std::size_t i = 0; i + 1 < o.polyline.size(); ++i) {
      const double leg = haversine_m(o.polyline[i], o.polyline[i + 1]);
      if (left <= leg) {
        const TangentPlane plane(o.polyline[i]);
        const Enu b = plane.forward(o.polyline[i + 1]);
        const double f = left / leg;
        o.midpoint = plane.inverse({b.e * f, b.n * f});
        break;
      }
      left -= leg;
    }
    ref.routes.emplace(o.id, std::move(o));
  }
  std::vector<LatLng> xs;
  for (const auto& c : city.crossings()) xs.push_back(city.to_lat_lng(c));
  std::sort(xs.begin(), xs.end(), [](LatLng a, LatLng b) { return a.lat != b.lat ? a.lat < b.lat : a.lng < b.lng; });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "int-%05zu", i + 1);
    ref.intersections.push_back({id, xs[i]});
  }
  return ref;
}

const OracleZone* oracle_zone(LatLng p, const std::vector<OracleZone>& zones, double radius_m) {
  const OracleZone* best = nullptr;
  double best_d = 0.0;
  for (const auto& z : zones) {
    const double d = haversine_m(p, z.center);
    if (d > radius_m) continue;
    if (!best || d < best_d || (d == best_d && z.id < best->id)) {
      best = &z;
      best_d = d;
    }
  }
  return best;
}

std::vector<ContextTuple> oracle_contextualize(std::span<const RawTuple> trip, const OracleReference& ref) {
  std::vector<ContextTuple> out;
  if (trip.empty()) return out;
  const auto it = ref.routes.find(trip.front().get(kRouteIdField).value_or(""));
  if (it == ref.routes.end()) throw std::invalid_argument("oracle: unknown route");
  const auto& route = it->second;
  const auto motion = oracle_stop_move(trip, ref.threshold_m);

  std::size_t turn = trip.size();
  for (std::size_t i = 0; i < trip.size(); ++i) {
    if (haversine_m({*trip[i].lat, *trip[i].lng}, route.midpoint) <= ref.radius_m) {
      turn = i;
      break;
    }
  }

  for (std::size_t i = 0; i < trip.size(); ++i) {
    ContextTuple c;
    c.base = trip[i];
    const LatLng p{*trip[i].lat, *trip[i].lng};
    c.motion = motion[i];
    const OracleZone* station = oracle_zone(p, route.stations, ref.radius_m);
    if (c.motion == MotionLabel::stop) {
      c.activity = station ? ActivityClass::stopover : ActivityClass::suspension_of_movement;
    } else {
      c.activity = station ? ActivityClass::passing : ActivityClass::running;
    }
    c.street = oracle_grid_lookup(p, route.polyline, route.leg_names, ref.half_width_m)
                   .value_or(std::string(kWrongStreetSegment));
    if (station) c.station = StationTag{station->id, i < turn ? Direction::outbound : Direction::return_trip};
    if (const auto* x = oracle_zone(p, ref.intersections, ref.radius_m)) c.intersection = x->id;
    if (i == 0) {
      c.position = TripPosition::origin();
    } else if (i + 1 == trip.size()) {
      c.position = TripPosition::destination();
    } else {
      c.position = TripPosition::at(static_cast<std::uint32_t>(i));
    }
    out.push_back(std::move(c));
  }

  // Visits: scan for runs of stopovers at one station and direction.
  std::size_t i = 0;
  while (i < out.size()) {
    if (out[i].activity != ActivityClass::stopover) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < out.size() && out[j + 1].activity == ActivityClass::stopover && out[j + 1].station == out[i].station) {
      ++j;
    }
    if (i == j) {
      out[i].event = StationEvent::arrival_and_departure;
    } else {
      out[i].event = StationEvent::arrival;
      out[j].event = StationEvent::departure;
    }
    i = j + 1;
  }
  return out;
}

}  // namespace transit::synth
