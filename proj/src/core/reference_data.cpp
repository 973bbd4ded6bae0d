#include "transit/reference_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "transit/csv.hpp"

namespace transit::refdata {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t required(std::string_view col, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == col) return i;
    }
    throw LoadError(file + ": missing column " + std::string(col));
  }
  std::optional<std::size_t> optional(std::string_view col) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == col) return i;
    }
    return std::nullopt;
  }
};

CsvTable read_table(const std::filesystem::path& dir, const std::string& file) {
  const auto path = dir / file;
  std::ifstream in(path);
  if (!in) throw LoadError("missing GTFS file: " + file);
  csv::Reader reader(in);
  CsvTable t;
  t.header = reader.header();
  std::vector<std::string> rec;
  while (reader.next(rec)) {
    rec.resize(t.header.size());
    t.rows.push_back(rec);
  }
  return t;
}

double parse_coord(const std::string& s, const std::string& file) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw LoadError(file + ": bad coordinate '" + s + "'");
  return v;
}

double point_segment_distance(LocalFrame::Xy p, LocalFrame::Xy a, LocalFrame::Xy b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::hypot(dx, dy);
}

}  // namespace

// ---------------------------------------------------------------------------

const Station* GtfsBundle::station(std::string_view id) const {
  for (const auto& s : stations) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> GtfsBundle::stations_for_route(std::string_view route_id) const {
  std::set<std::string, std::less<>> trip_ids;
  for (const auto& t : trips) {
    if (t.route_id == route_id) trip_ids.insert(t.id);
  }
  std::set<std::string> ids;
  for (const auto& st : stop_times) {
    if (trip_ids.count(st.trip_id)) ids.insert(st.station_id);
  }
  return {ids.begin(), ids.end()};
}

void GtfsBundle::validate() const {
  std::set<std::string, std::less<>> route_ids;
  std::set<std::string, std::less<>> station_ids;
  std::set<std::string, std::less<>> trip_ids;
  for (const auto& r : routes) route_ids.insert(r.id);
  for (const auto& s : stations) station_ids.insert(s.id);
  for (const auto& t : trips) trip_ids.insert(t.id);

  std::set<std::string> bad;
  for (const auto& t : trips) {
    if (!route_ids.count(t.route_id)) bad.insert("route:" + t.route_id);
  }
  for (const auto& st : stop_times) {
    if (!station_ids.count(st.station_id)) bad.insert("station:" + st.station_id);
    if (!trip_ids.count(st.trip_id)) bad.insert("trip:" + st.trip_id);
  }
  if (!bad.empty()) {
    std::string msg = "GTFS references unknown ids:";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg, {bad.begin(), bad.end()});
  }
}

GtfsBundle load_gtfs(const std::filesystem::path& directory) {
  GtfsBundle b;
  {
    const std::string f = "stops.txt";
    auto t = read_table(directory, f);
    const auto id = t.required("stop_id", f);
    const auto lat = t.required("stop_lat", f);
    const auto lon = t.required("stop_lon", f);
    const auto name = t.optional("stop_name");
    for (const auto& r : t.rows) {
      b.stations.push_back({r[id], name ? r[*name] : std::string{}, {parse_coord(r[lat], f), parse_coord(r[lon], f)}});
    }
  }
  {
    const std::string f = "routes.txt";
    auto t = read_table(directory, f);
    const auto id = t.required("route_id", f);
    const auto sn = t.optional("route_short_name");
    const auto ln = t.optional("route_long_name");
    for (const auto& r : t.rows) {
      b.routes.push_back({r[id], sn ? r[*sn] : std::string{}, ln ? r[*ln] : std::string{}});
    }
  }
  {
    const std::string f = "trips.txt";
    auto t = read_table(directory, f);
    const auto route = t.required("route_id", f);
    const auto trip = t.required("trip_id", f);
    const auto service = t.optional("service_id");
    const auto dir = t.optional("direction_id");
    for (const auto& r : t.rows) {
      Trip trip_row{r[trip], r[route], service ? r[*service] : std::string{}, std::nullopt};
      if (dir && !r[*dir].empty()) {
        int d = 0;
        std::from_chars(r[*dir].data(), r[*dir].data() + r[*dir].size(), d);
        trip_row.direction_id = d;
      }
      b.trips.push_back(std::move(trip_row));
    }
  }
  {
    const std::string f = "stop_times.txt";
    auto t = read_table(directory, f);
    const auto trip = t.required("trip_id", f);
    const auto stop = t.required("stop_id", f);
    const auto arr = t.optional("arrival_time");
    const auto dep = t.optional("departure_time");
    const auto seq = t.optional("stop_sequence");
    for (const auto& r : t.rows) {
      StopTime st{r[trip], r[stop], arr ? r[*arr] : std::string{}, dep ? r[*dep] : std::string{}, 0};
      if (seq) std::from_chars(r[*seq].data(), r[*seq].data() + r[*seq].size(), st.sequence);
      b.stop_times.push_back(std::move(st));
    }
  }
  b.validate();
  return b;
}

void write_gtfs(const GtfsBundle& b, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream out(directory / name, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError(std::string("cannot write ") + name);
    return out;
  };
  using csv::quote_field;
  {
    auto out = open("stops.txt");
    out << "stop_id,stop_name,stop_lat,stop_lon\n";
    out.precision(10);
    for (const auto& s : b.stations) {
      out << quote_field(s.id) << ',' << quote_field(s.name) << ',' << s.position.lat << ',' << s.position.lng
          << '\n';
    }
  }
  {
    auto out = open("routes.txt");
    out << "route_id,route_short_name,route_long_name,route_type\n";
    for (const auto& r : b.routes) {
      out << quote_field(r.id) << ',' << quote_field(r.short_name) << ',' << quote_field(r.long_name) << ",3\n";
    }
  }
  {
    auto out = open("trips.txt");
    out << "route_id,service_id,trip_id,direction_id\n";
    for (const auto& t : b.trips) {
      out << quote_field(t.route_id) << ',' << quote_field(t.service_id) << ',' << quote_field(t.id) << ',';
      if (t.direction_id) out << *t.direction_id;
      out << '\n';
    }
  }
  {
    auto out = open("stop_times.txt");
    out << "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n";
    for (const auto& st : b.stop_times) {
      out << quote_field(st.trip_id) << ',' << st.arrival_time << ',' << st.departure_time << ','
          << quote_field(st.station_id) << ',' << st.sequence << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<CircularZone> build_station_zones(const GtfsBundle& bundle, double radius_m) {
  if (!(radius_m > 0.0)) throw std::invalid_argument("zone radius must be positive");
  std::vector<CircularZone> zones;
  zones.reserve(bundle.stations.size());
  for (const auto& s : bundle.stations) {
    zones.push_back({s.position, radius_m, AnchorKind::station, s.id});
  }
  return zones;
}

std::uint64_t ZoneIndex::key(std::int64_t i, std::int64_t j) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
         static_cast<std::uint32_t>(j);
}

ZoneIndex::ZoneIndex(std::vector<CircularZone> zones) : zones_(std::move(zones)) {
  if (zones_.empty()) return;
  double max_r = 0.0;
  LatLng origin = zones_.front().center;
  for (const auto& z : zones_) {
    max_r = std::max(max_r, z.radius_m);
    origin.lat = std::min(origin.lat, z.center.lat);
    origin.lng = std::min(origin.lng, z.center.lng);
  }
  frame_.emplace(origin);
  cell_m_ = std::max(2.0 * max_r, 1.0);
  // Projection scale drifts slightly from the mean-latitude metric away from
  // the origin; pad the covered cells so no containing zone is missed.
  for (std::uint32_t idx = 0; idx < zones_.size(); ++idx) {
    const auto& z = zones_[idx];
    const auto c = frame_->project(z.center);
    const double pad = z.radius_m * 1.01 + 1.0;
    const auto i0 = static_cast<std::int64_t>(std::floor((c.x - pad) / cell_m_));
    const auto i1 = static_cast<std::int64_t>(std::floor((c.x + pad) / cell_m_));
    const auto j0 = static_cast<std::int64_t>(std::floor((c.y - pad) / cell_m_));
    const auto j1 = static_cast<std::int64_t>(std::floor((c.y + pad) / cell_m_));
    for (auto i = i0; i <= i1; ++i) {
      for (auto j = j0; j <= j1; ++j) cells_[key(i, j)].push_back(idx);
    }
  }
}

const CircularZone* ZoneIndex::nearest_containing(LatLng p) const {
  if (zones_.empty()) return nullptr;
  const auto xy = frame_->project(p);
  const auto it = cells_.find(key(static_cast<std::int64_t>(std::floor(xy.x / cell_m_)),
                                  static_cast<std::int64_t>(std::floor(xy.y / cell_m_))));
  if (it == cells_.end()) return nullptr;
  const CircularZone* best = nullptr;
  double best_d = 0.0;
  for (std::uint32_t idx : it->second) {
    const auto& z = zones_[idx];
    const double d = z.distance_to(p);
    if (d > z.radius_m) continue;
    if (!best || d < best_d || (d == best_d && z.anchor_id < best->anchor_id)) {
      best = &z;
      best_d = d;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

Geometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open geometry file " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("features")) {
    throw LoadError("geometry file is not a GeoJSON FeatureCollection: " + path.string());
  }
  Geometry g;
  std::map<std::string, std::size_t> route_slot;
  for (const auto& f : doc.at("features")) {
    const auto& geom = f.at("geometry");
    if (geom.at("type") != "LineString") throw LoadError("only LineString features are supported");
    std::vector<LatLng> pts;
    for (const auto& c : geom.at("coordinates")) pts.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
    if (pts.size() < 2) throw LoadError("LineString with fewer than two points");
    const auto& props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : nlohmann::json::object();

    if (props.contains("route_id")) {
      const std::string route_id = props["route_id"].is_string() ? props["route_id"].get<std::string>()
                                                                  : props["route_id"].dump();
      std::vector<std::string> names;
      if (props.contains("street_names")) {
        names = props["street_names"].get<std::vector<std::string>>();
      } else if (props.contains("street_name")) {
        names.assign(pts.size() - 1, props["street_name"].get<std::string>());
      }
      if (names.size() != pts.size() - 1) {
        throw LoadError("route " + route_id + ": street_names must list one name per leg");
      }
      auto [it, fresh] = route_slot.emplace(route_id, g.routes.size());
      if (fresh) {
        g.routes.push_back({route_id, std::move(pts), std::move(names)});
      } else {
        auto& r = g.routes[it->second];
        std::size_t start = 0;
        if (r.points.back() == pts.front()) start = 1;
        else names.insert(names.begin(), names.front());  // bridging leg takes the next feature's name
        if (start == 1) {
          r.points.insert(r.points.end(), pts.begin() + 1, pts.end());
        } else {
          r.points.insert(r.points.end(), pts.begin(), pts.end());
        }
        r.leg_names.insert(r.leg_names.end(), names.begin(), names.end());
      }
    } else {
      std::string name = props.contains("name") ? props["name"].get<std::string>() : std::string{};
      std::vector<std::string> names(pts.size() - 1, name);
      g.roads.push_back({std::move(name), std::move(pts), std::move(names)});
    }
  }
  return g;
}

std::string geometry_to_geojson(const Geometry& geometry) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  auto& features = doc["features"] = nlohmann::ordered_json::array();
  auto coords = [](const std::vector<LatLng>& pts) {
    nlohmann::ordered_json c = nlohmann::ordered_json::array();
    for (const auto& p : pts) c.push_back({p.lng, p.lat});
    return c;
  };
  for (const auto& r : geometry.routes) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"route_id", r.id}, {"street_names", r.leg_names}};
    f["geometry"] = {{"type", "LineString"}, {"coordinates", coords(r.points)}};
    features.push_back(std::move(f));
  }
  for (const auto& r : geometry.roads) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"name", r.id}};
    f["geometry"] = {{"type", "LineString"}, {"coordinates", coords(r.points)}};
    features.push_back(std::move(f));
  }
  return doc.dump(1);
}

// ---------------------------------------------------------------------------

std::uint64_t RouteBufferGrid::key(Cell c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.i)) << 32) | static_cast<std::uint32_t>(c.j);
}

RouteBufferGrid::Cell RouteBufferGrid::cell_of(LocalFrame::Xy p) const {
  return {static_cast<std::int32_t>(std::floor(p.x / cell_m_)), static_cast<std::int32_t>(std::floor(p.y / cell_m_))};
}

LocalFrame::Xy RouteBufferGrid::cell_center(Cell c) const {
  return {(c.i + 0.5) * cell_m_, (c.j + 0.5) * cell_m_};
}

std::optional<std::string_view> RouteBufferGrid::tag(Cell c) const {
  const auto it = tags_.find(key(c));
  if (it == tags_.end()) return std::nullopt;
  return std::string_view(names_[it->second]);
}

std::optional<std::string_view> RouteBufferGrid::lookup_xy(LocalFrame::Xy p) const { return tag(cell_of(p)); }

std::optional<std::string_view> RouteBufferGrid::lookup(LatLng p) const { return lookup_xy(frame_.project(p)); }

std::vector<std::pair<RouteBufferGrid::Cell, std::string_view>> RouteBufferGrid::cells() const {
  std::vector<std::pair<Cell, std::string_view>> out;
  out.reserve(tags_.size());
  for (const auto& [k, leg] : tags_) {
    Cell c{static_cast<std::int32_t>(static_cast<std::uint32_t>(k >> 32)),
           static_cast<std::int32_t>(static_cast<std::uint32_t>(k & 0xffffffffu))};
    out.emplace_back(c, names_[leg]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.j, a.first.i) < std::tie(b.first.j, b.first.i);
  });
  return out;
}

namespace {
constexpr double kLegTieM = 1e-6;
}  // namespace

RouteBufferGrid build_route_buffer_grid_xy(std::string route_id, std::span<const LocalFrame::Xy> polyline,
                                           std::span<const std::string> leg_names, const LocalFrame& frame,
                                           double cell_m, double half_width_m) {
  if (polyline.size() < 2) throw BuildError("route " + route_id + ": polyline needs at least two points");
  if (leg_names.size() != polyline.size() - 1) {
    throw BuildError("route " + route_id + ": expected one street name per leg");
  }
  if (!(cell_m > 0.0) || !(half_width_m > 0.0)) throw BuildError("cell size and half width must be positive");
  for (std::size_t k = 0; k < leg_names.size(); ++k) {
    if (leg_names[k].empty()) throw BuildError("route " + route_id + ": leg " + std::to_string(k) + " is unnamed");
  }

  RouteBufferGrid grid(std::move(route_id), frame, cell_m, half_width_m);
  grid.names_.assign(leg_names.begin(), leg_names.end());

  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, double>> best;
  for (std::uint32_t k = 0; k + 1 < polyline.size(); ++k) {
    const auto a = polyline[k];
    const auto b = polyline[k + 1];
    const auto lo = grid.cell_of({std::min(a.x, b.x) - half_width_m, std::min(a.y, b.y) - half_width_m});
    const auto hi = grid.cell_of({std::max(a.x, b.x) + half_width_m, std::max(a.y, b.y) + half_width_m});
    for (std::int32_t j = lo.j; j <= hi.j; ++j) {
      for (std::int32_t i = lo.i; i <= hi.i; ++i) {
        const RouteBufferGrid::Cell c{i, j};
        const double d = point_segment_distance(grid.cell_center(c), a, b);
        if (d > half_width_m) continue;
        auto [it, fresh] = best.try_emplace(RouteBufferGrid::key(c), k, d);
        // Outside a corner both legs are nearest at the shared vertex; treat
        // sub-micrometre differences as ties so the lower leg keeps the cell.
        if (!fresh && d < it->second.second - kLegTieM) it->second = {k, d};
      }
    }
  }
  grid.tags_.reserve(best.size());
  for (const auto& [cell_key, v] : best) grid.tags_.emplace(cell_key, v.first);
  return grid;
}

RouteBufferGrid build_route_buffer_grid(const NamedPolyline& route, const LocalFrame& frame, double cell_m,
                                        double half_width_m) {
  std::vector<LocalFrame::Xy> xy;
  xy.reserve(route.points.size());
  for (const auto& p : route.points) xy.push_back(frame.project(p));
  return build_route_buffer_grid_xy(route.id, xy, route.leg_names, frame, cell_m, half_width_m);
}

std::string grid_to_csv(const RouteBufferGrid& grid) {
  std::ostringstream out;
  out.precision(10);
  out << "cell_i,cell_j,center_lat,center_lng,tag\n";
  for (const auto& [c, name] : grid.cells()) {
    const auto center = grid.frame().unproject(grid.cell_center(c));
    out << c.i << ',' << c.j << ',' << center.lat << ',' << center.lng << ',' << csv::quote_field(name) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<CircularZone> derive_intersections(const std::vector<NamedPolyline>& roads, double radius_m,
                                               double snap_m) {
  struct Vertex {
    LatLng p;
    int legs;
  };
  std::vector<Vertex> verts;
  for (const auto& r : roads) {
    const std::size_t n = r.points.size();
    if (n < 2) continue;
    for (std::size_t i = 0; i < n; ++i) verts.push_back({r.points[i], (i == 0 || i + 1 == n) ? 1 : 2});
  }
  if (verts.empty()) return {};

  LatLng origin = verts.front().p;
  for (const auto& v : verts) {
    origin.lat = std::min(origin.lat, v.p.lat);
    origin.lng = std::min(origin.lng, v.p.lng);
  }
  const LocalFrame frame(origin);
  DisjointSets sets(verts.size());
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  auto bucket_key = [](std::int64_t i, std::int64_t j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
  };
  const double cell = std::max(snap_m, 1e-6);
  std::vector<std::pair<std::int64_t, std::int64_t>> coords(verts.size());
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const auto xy = frame.project(verts[v].p);
    coords[v] = {static_cast<std::int64_t>(std::floor(xy.x / cell)), static_cast<std::int64_t>(std::floor(xy.y / cell))};
    buckets[bucket_key(coords[v].first, coords[v].second)].push_back(v);
  }
  for (std::size_t v = 0; v < verts.size(); ++v) {
    for (std::int64_t di = -1; di <= 1; ++di) {
      for (std::int64_t dj = -1; dj <= 1; ++dj) {
        const auto it = buckets.find(bucket_key(coords[v].first + di, coords[v].second + dj));
        if (it == buckets.end()) continue;
        for (std::size_t w : it->second) {
          if (w != v && planar_distance_unchecked(verts[v].p, verts[w].p) <= snap_m) sets.unite(v, w);
        }
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t v = 0; v < verts.size(); ++v) clusters[sets.find(v)].push_back(v);

  std::vector<LatLng> centers;
  for (auto& [root, members] : clusters) {
    int legs = 0;
    std::vector<LatLng> pts;
    for (std::size_t v : members) {
      legs += verts[v].legs;
      pts.push_back(verts[v].p);
    }
    if (legs < 3) continue;
    std::sort(pts.begin(), pts.end(),
              [](const LatLng& a, const LatLng& b) { return std::tie(a.lat, a.lng) < std::tie(b.lat, b.lng); });
    LatLng c{0.0, 0.0};
    for (const auto& p : pts) {
      c.lat += p.lat;
      c.lng += p.lng;
    }
    c.lat /= static_cast<double>(pts.size());
    c.lng /= static_cast<double>(pts.size());
    centers.push_back(c);
  }
  std::sort(centers.begin(), centers.end(),
            [](const LatLng& a, const LatLng& b) { return std::tie(a.lat, a.lng) < std::tie(b.lat, b.lng); });

  std::vector<CircularZone> zones;
  zones.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "int-%05zu", i + 1);
    zones.push_back({centers[i], radius_m, AnchorKind::intersection, id});
  }
  return zones;
}

RouteMidpoint route_midpoint(std::string route_id, const std::vector<LatLng>& polyline) {
  if (polyline.size() < 2) throw std::invalid_argument("route_midpoint: polyline needs at least two points");
  std::vector<double> legs;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    legs.push_back(planar_distance_unchecked(polyline[i], polyline[i + 1]));
    total += legs.back();
  }
  if (!(total > 0.0)) throw std::invalid_argument("route_midpoint: polyline has zero length");
  const double half = 0.5 * total;
  double walked = 0.0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    if (walked + legs[i] >= half && legs[i] > 0.0) {
      const double f = (half - walked) / legs[i];
      const LatLng a = polyline[i];
      const LatLng b = polyline[i + 1];
      return {std::move(route_id), {a.lat + f * (b.lat - a.lat), a.lng + f * (b.lng - a.lng)}, half, total, i};
    }
    walked += legs[i];
  }
  return {std::move(route_id), polyline.back(), half, total, legs.size() - 1};
}

// ---------------------------------------------------------------------------

ReferenceData ReferenceData::build(GtfsBundle gtfs, const Geometry& geometry, const ReferenceParams& params) {
  ReferenceData rd;
  rd.params_ = params;
  const auto all_zones = build_station_zones(gtfs, params.zone_radius_m);
  for (const auto& route : geometry.routes) {
    const LocalFrame frame(route.points.front());
    auto grid = build_route_buffer_grid(route, frame, params.cell_m, params.half_width_m);
    auto mid = route_midpoint(route.id, route.points);
    const auto ids = gtfs.stations_for_route(route.id);
    std::vector<CircularZone> zones;
    if (ids.empty()) {
      zones = all_zones;
    } else {
      for (const auto& z : all_zones) {
        if (std::binary_search(ids.begin(), ids.end(), z.anchor_id)) zones.push_back(z);
      }
    }
    rd.routes_.emplace(route.id, RouteReference{route.id, route, std::move(grid), std::move(mid), ZoneIndex(std::move(zones))});
  }
  rd.intersections_ = ZoneIndex(derive_intersections(geometry.roads, params.zone_radius_m));
  rd.gtfs_ = std::move(gtfs);
  return rd;
}

ReferenceData ReferenceData::load(const std::filesystem::path& gtfs_dir, const std::filesystem::path& geometry_path,
                                  const ReferenceParams& params) {
  return build(load_gtfs(gtfs_dir), load_geometry(geometry_path), params);
}

const RouteReference* ReferenceData::route(std::string_view route_id) const {
  const auto it = routes_.find(route_id);
  return it == routes_.end() ? nullptr : &it->second;
}

}  // namespace transit::refdata
