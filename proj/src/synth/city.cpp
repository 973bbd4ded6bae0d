#include "transit/synth/city.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace transit::synth {

namespace {

const char* const kStreetNames[] = {
    "Main St",         "King St",       "Mountain Rd",    "St George Blvd", "Elmwood Dr",   "Mapleton Rd",
    "Vaughan Harvey",  "Wheeler Blvd",  "Shediac Rd",     "Edinburgh Dr",   "Killam Dr",    "Morton Ave",
    "Gorge Rd",        "Lutz St",       "High St",        "Robinson St",    "Gordon St",    "War Veterans",
    "Ryan St",         "Crowley Farm",  "McLaughlin Dr",  "Trites Rd",      "Irishtown Rd", "Harrisville",
    "Caledonia Rd",    "Lakeside Dr",   "Salisbury Rd",   "Hildegard Dr",   "Pinewood Rd",  "Collishaw St",
};
const char* const kAvenueNames[] = {"Botsford St", "Highfield St", "Weldon St", "Queen St",
                                    "Church St",   "Cameron St",   "Archibald St"};

std::string street_name(std::size_t k) {
  constexpr std::size_t n = sizeof(kStreetNames) / sizeof(kStreetNames[0]);
  if (k < n) return kStreetNames[k];
  return "Street " + std::to_string(k + 1);
}

std::string avenue_name(std::size_t k) {
  constexpr std::size_t n = sizeof(kAvenueNames) / sizeof(kAvenueNames[0]);
  if (k < n) return kAvenueNames[k];
  return "Avenue " + std::to_string(k + 1);
}

}  // namespace

double enu_distance(Enu a, Enu b) { return std::hypot(a.e - b.e, a.n - b.n); }

double enu_point_segment(Enu p, Enu a, Enu b) {
  const double ve = b.e - a.e;
  const double vn = b.n - a.n;
  const double len2 = ve * ve + vn * vn;
  double t = len2 > 0 ? ((p.e - a.e) * ve + (p.n - a.n) * vn) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.e - (a.e + t * ve), p.n - (a.n + t * vn));
}

Enu CityRoute::at(double s) const {
  s = std::clamp(s, 0.0, length);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (s <= vertex_s[i + 1] || i + 2 == points.size()) {
      const double len = vertex_s[i + 1] - vertex_s[i];
      const double f = len > 0 ? (s - vertex_s[i]) / len : 0.0;
      return {points[i].e + f * (points[i + 1].e - points[i].e), points[i].n + f * (points[i + 1].n - points[i].n)};
    }
  }
  return points.back();
}

City::City(const CityConfig& config) : config_(config), plane_(config.origin) {
  if (config.routes == 0 || config.blocks < 2) throw std::invalid_argument("city needs a route and two blocks");
  const double b = config.block_m;
  const double L = static_cast<double>(config.blocks) * b;
  const double off = config.station_offset_m;
  const std::size_t rows = 2 * config.routes;

  for (std::size_t r = 0; r < config.routes; ++r) {
    CityRoute route;
    route.id = std::to_string(51 + r);
    route.y_out = static_cast<double>(2 * r) * b;
    route.y_ret = route.y_out + b;
    const std::string out_name = street_name(2 * r);
    const std::string ret_name = street_name(2 * r + 1);
    const std::string conn_name = avenue_name(config.blocks);

    for (std::size_t k = 0; k <= config.blocks; ++k) route.points.push_back({static_cast<double>(k) * b, route.y_out});
    for (std::size_t k = 0; k <= config.blocks; ++k) {
      route.points.push_back({L - static_cast<double>(k) * b, route.y_ret});
    }
    for (std::size_t k = 0; k < config.blocks; ++k) route.leg_names.push_back(out_name);
    route.leg_names.push_back(conn_name);
    for (std::size_t k = 0; k < config.blocks; ++k) route.leg_names.push_back(ret_name);

    route.vertex_s.push_back(0.0);
    for (std::size_t i = 1; i < route.points.size(); ++i) {
      route.vertex_s.push_back(route.vertex_s.back() + enu_distance(route.points[i - 1], route.points[i]));
    }
    route.length = route.vertex_s.back();
    for (const auto& p : route.points) route.lat_lng.push_back(plane_.inverse(p));

    const double ret0 = L + b;  // arc position where the return street starts
    auto add_station = [&](std::string id, std::string name, double s, Enu xy) {
      route.stations.push_back(stations_.size());
      stations_.push_back({std::move(id), std::move(name), r, s, xy, plane_.inverse(xy)});
    };
    add_station(route.id + "-A", "Terminal " + route.id + " A", 0.0, {0.0, route.y_out - off});
    for (std::size_t k = 0; k < config.blocks; ++k) {
      for (double d : {130.0, 270.0}) {
        const double x = static_cast<double>(k) * b + d;
        char id[32];
        std::snprintf(id, sizeof id, "%s-O%04d", route.id.c_str(), static_cast<int>(x));
        add_station(id, out_name + " @ " + std::to_string(static_cast<int>(x)), x, {x, route.y_out - off});
      }
    }
    std::vector<double> ret_x;
    for (std::size_t k = config.blocks; k-- > 0;) ret_x.push_back(static_cast<double>(k) * b + 270.0);
    ret_x.push_back(130.0);
    for (double x : ret_x) {
      char id[32];
      std::snprintf(id, sizeof id, "%s-R%04d", route.id.c_str(), static_cast<int>(x));
      add_station(id, ret_name + " @ " + std::to_string(static_cast<int>(x)), ret0 + (L - x), {x, route.y_ret + off});
    }
    add_station(route.id + "-B", "Terminal " + route.id + " B", route.length, {0.0, route.y_ret + off});

    for (std::size_t k = 1; k < config.blocks; ++k) route.light_s.push_back(static_cast<double>(k) * b - 20.0);
    for (std::size_t k = config.blocks - 1; k >= 1; --k) {
      route.light_s.push_back(ret0 + (L - static_cast<double>(k) * b) - 20.0);
    }
    routes_.push_back(std::move(route));
  }

  // Road network: every street and avenue, split at each crossing.
  std::vector<double> ys;
  if (config.detour_street) ys.push_back(-b);
  for (std::size_t k = 0; k < rows; ++k) ys.push_back(static_cast<double>(k) * b);
  std::vector<double> xs;
  for (std::size_t k = 0; k <= config.blocks; ++k) xs.push_back(static_cast<double>(k) * b);

  for (std::size_t i = 0; i < ys.size(); ++i) {
    CityRoad road;
    road.name = (config.detour_street && i == 0) ? std::string("Lewisville Rd")
                                                 : street_name(config.detour_street ? i - 1 : i);
    road.points.push_back({-config.overhang_m, ys[i]});
    for (double x : xs) road.points.push_back({x, ys[i]});
    road.points.push_back({L + config.overhang_m, ys[i]});
    roads_.push_back(std::move(road));
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    CityRoad road;
    road.name = avenue_name(k);
    road.points.push_back({xs[k], ys.front() - config.overhang_m});
    for (double y : ys) road.points.push_back({xs[k], y});
    road.points.push_back({xs[k], ys.back() + config.overhang_m});
    roads_.push_back(std::move(road));
  }
  for (double y : ys) {
    for (double x : xs) crossings_.push_back({x, y});
  }
}

std::optional<std::size_t> City::route_index(std::string_view id) const {
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    if (routes_[i].id == id) return i;
  }
  return std::nullopt;
}

refdata::Geometry City::geometry() const {
  refdata::Geometry g;
  for (const auto& r : routes_) g.routes.push_back({r.id, r.lat_lng, r.leg_names});
  for (const auto& road : roads_) {
    refdata::NamedPolyline p;
    p.id = road.name;
    for (const auto& q : road.points) p.points.push_back(plane_.inverse(q));
    p.leg_names.assign(p.points.size() - 1, road.name);
    g.roads.push_back(std::move(p));
  }
  return g;
}

refdata::GtfsBundle City::gtfs(const std::vector<TripStub>& trips) const {
  refdata::GtfsBundle b;
  for (const auto& s : stations_) b.stations.push_back({s.id, s.name, s.position});
  for (const auto& r : routes_) b.routes.push_back({r.id, r.id, routes_.size() > 1 ? "Route " + r.id : "Route " + r.id});

  std::set<std::size_t> scheduled;
  std::vector<TripStub> all = trips;
  for (const auto& t : trips) scheduled.insert(t.route);
  for (std::size_t r = 0; r < routes_.size(); ++r) {
    if (!scheduled.count(r)) all.push_back({routes_[r].id + "-template", r, "WK", 6 * 3600});
  }
  for (const auto& t : all) {
    const auto& route = routes_.at(t.route);
    b.trips.push_back({t.trip_id, route.id, t.service_id, 0});
    int seq = 1;
    for (std::size_t idx : route.stations) {
      const auto& st = stations_[idx];
      // nominal 6 m/s plus 20 s per stop
      const auto secs = static_cast<long long>(t.start % 86400) + static_cast<long long>(st.s / 6.0) + 20LL * (seq - 1);
      char hms[48];
      std::snprintf(hms, sizeof hms, "%02lld:%02lld:%02lld", secs / 3600, (secs / 60) % 60, secs % 60);
      b.stop_times.push_back({t.trip_id, st.id, hms, hms, seq++});
    }
  }
  return b;
}

}  // namespace transit::synth
