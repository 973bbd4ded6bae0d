#include "transit/synth/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace transit::synth {

namespace {

// Margins around every decision boundary.
constexpr double kZoneRadius = 30.0;
constexpr double kBoundaryMargin = 1.0;
constexpr double kMoveMin = 17.0;
constexpr double kStopMax = 13.0;
constexpr double kOnRouteMax = 21.9;    // 30 m minus a half cell diagonal, minus margin
constexpr double kOffRouteMin = 38.1;   // 30 m plus a half cell diagonal, plus margin
constexpr double kNameGapMin = 15.2;    // one cell diagonal plus margin

struct Path {
  std::vector<Enu> points;
  std::vector<double> u;

  explicit Path(std::vector<Enu> pts) : points(std::move(pts)) {
    u.push_back(0.0);
    for (std::size_t i = 1; i < points.size(); ++i) u.push_back(u.back() + enu_distance(points[i - 1], points[i]));
  }
  double length() const { return u.back(); }
  Enu at(double x) const {
    x = std::clamp(x, 0.0, length());
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      if (x <= u[i + 1] || i + 2 == points.size()) {
        const double len = u[i + 1] - u[i];
        const double f = len > 0 ? (x - u[i]) / len : 0.0;
        return {points[i].e + f * (points[i + 1].e - points[i].e), points[i].n + f * (points[i + 1].n - points[i].n)};
      }
    }
    return points.back();
  }
};

struct Assessment {
  bool margins_ok = true;
  std::optional<std::size_t> station;  // nearest containing station (city index)
  std::string street;
  bool off_route = false;
};

class Assessor {
 public:
  Assessor(const City& city, std::size_t route) : city_(city), route_(city.routes().at(route)) {
    midpoint_ = route_.at(route_.length / 2.0);
  }

  Assessment assess(Enu q) const {
    Assessment a;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx : route_.stations) {
      const auto& st = city_.stations()[idx];
      const double d = enu_distance(q, st.xy);
      if (std::abs(d - kZoneRadius) <= kBoundaryMargin) a.margins_ok = false;
      if (d <= kZoneRadius && (d < best || (d == best && st.id < city_.stations()[*a.station].id))) {
        best = d;
        a.station = idx;
      }
    }
    for (const auto& c : city_.crossings()) {
      if (std::abs(enu_distance(q, c) - kZoneRadius) <= kBoundaryMargin) a.margins_ok = false;
    }
    if (std::abs(enu_distance(q, midpoint_) - kZoneRadius) <= kBoundaryMargin) a.margins_ok = false;

    double d1 = std::numeric_limits<double>::infinity();
    std::size_t leg = 0;
    for (std::size_t i = 0; i + 1 < route_.points.size(); ++i) {
      const double d = enu_point_segment(q, route_.points[i], route_.points[i + 1]);
      if (d < d1) {
        d1 = d;
        leg = i;
      }
    }
    double d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < route_.points.size(); ++i) {
      if (route_.leg_names[i] == route_.leg_names[leg]) continue;
      d2 = std::min(d2, enu_point_segment(q, route_.points[i], route_.points[i + 1]));
    }
    if (d1 <= kOnRouteMax && d2 - d1 > kNameGapMin) {
      a.street = route_.leg_names[leg];
    } else if (d1 >= kOffRouteMin) {
      a.street = std::string(kWrongStreetSegment);
      a.off_route = true;
    } else {
      a.margins_ok = false;
    }
    return a;
  }

 private:
  const City& city_;
  const CityRoute& route_;
  Enu midpoint_;
};

struct EventTuple {
  double u;
  ActivityClass activity;
  std::optional<std::size_t> station;
};

struct Event {
  double s = 0.0;  // sort key on the route
  std::vector<EventTuple> tuples;
};

}  // namespace

std::vector<PlannedPoint> plan_trip(const City& city, const TripPlan& plan) {
  const auto& route = city.routes().at(plan.route);
  if (plan.dwell.size() != route.stations.size()) throw PlanError("dwell list must cover every station");
  if (plan.hold.size() != route.light_s.size()) throw PlanError("hold list must cover every light");
  if (plan.dwell.front() < 1 || plan.dwell.back() < 1) throw PlanError("terminals need at least one dwell tuple");

  // Path and the route-arc to path-arc mapping.
  std::vector<Enu> pts;
  double leave = std::numeric_limits<double>::infinity();
  double rejoin = leave;
  double extra = 0.0;
  if (plan.detour) {
    leave = plan.detour->leave_s;
    rejoin = plan.detour->rejoin_s;
    const Enu a = route.at(leave);
    const Enu b = route.at(rejoin);
    if (a.n != route.y_out || b.n != route.y_out || !(leave < rejoin)) {
      throw PlanError("detour must leave and rejoin on the outbound street");
    }
    for (std::size_t i = 0; i < route.points.size() && route.vertex_s[i] < leave; ++i) pts.push_back(route.points[i]);
    pts.push_back(a);
    pts.push_back({a.e, a.n + plan.detour->depth_m});
    pts.push_back({b.e, b.n + plan.detour->depth_m});
    pts.push_back(b);
    for (std::size_t i = 0; i < route.points.size(); ++i) {
      if (route.vertex_s[i] > rejoin) pts.push_back(route.points[i]);
    }
    extra = 2.0 * std::abs(plan.detour->depth_m);
  } else {
    pts = route.points;
  }
  const Path path(std::move(pts));
  auto to_u = [&](double s) { return s <= leave ? s : s + extra; };
  auto skipped = [&](double s) { return s > leave - 40.0 && s < rejoin + 40.0; };

  std::vector<Event> events;
  for (std::size_t k = 0; k < route.stations.size(); ++k) {
    const std::size_t idx = route.stations[k];
    const double s = city.stations()[idx].s;
    const int d = plan.dwell[k];
    if (skipped(s)) continue;
    Event ev{s, {}};
    const double u = to_u(s);
    if (k == 0) {
      for (int i = 0; i < d; ++i) ev.tuples.push_back({u, ActivityClass::stopover, idx});
    } else if (k + 1 == route.stations.size()) {
      ev.tuples.push_back({u - 12.0, ActivityClass::passing, idx});
      for (int i = 0; i < d; ++i) ev.tuples.push_back({u, ActivityClass::stopover, idx});
    } else if (d > 0) {
      ev.tuples.push_back({u - 12.0, ActivityClass::passing, idx});
      for (int i = 0; i < d; ++i) ev.tuples.push_back({u, ActivityClass::stopover, idx});
      ev.tuples.push_back({u + 12.0, ActivityClass::stopover, idx});
    } else {
      ev.tuples.push_back({u - 20.0, ActivityClass::passing, idx});
      ev.tuples.push_back({u + 20.0, ActivityClass::passing, idx});
    }
    events.push_back(std::move(ev));
  }
  for (std::size_t j = 0; j < route.light_s.size(); ++j) {
    const double s = route.light_s[j];
    if (plan.hold[j] <= 0 || skipped(s)) continue;
    Event ev{s, {}};
    ev.tuples.push_back({to_u(s), ActivityClass::running, std::nullopt});
    for (int i = 0; i < plan.hold[j]; ++i) {
      ev.tuples.push_back({to_u(s), ActivityClass::suspension_of_movement, std::nullopt});
    }
    events.push_back(std::move(ev));
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.s < b.s; });

  // Gap lengths between consecutive events.
  const std::size_t gaps = events.size() - 1;
  std::vector<double> gap_len(gaps);
  for (std::size_t g = 0; g < gaps; ++g) {
    gap_len[g] = events[g + 1].tuples.front().u - events[g].tuples.back().u;
    if (gap_len[g] < kMoveMin) throw PlanError("events closer than one move step");
  }
  std::vector<std::size_t> runs(gaps, 0);
  if (plan.running_total) {
    const double total = std::accumulate(gap_len.begin(), gap_len.end(), 0.0);
    const double segments = static_cast<double>(*plan.running_total + gaps);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t used = 0;
    for (std::size_t g = 0; g < gaps; ++g) {
      const double ideal = gap_len[g] * segments / total;
      const auto seg = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ideal)));
      runs[g] = seg - 1;
      used += seg;
      rema.push_back({ideal - std::floor(ideal), g});
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto target = static_cast<std::size_t>(segments);
    for (std::size_t i = 0; used < target; i = (i + 1) % rema.size(), ++used) ++runs[rema[i].second];
    if (used > target) throw PlanError("running total too small for the event layout");
  } else {
    for (std::size_t g = 0; g < gaps; ++g) {
      runs[g] = static_cast<std::size_t>(std::max(0L, std::lround(gap_len[g] / plan.step_m) - 1));
    }
  }

  const Assessor assessor(city, plan.route);
  std::vector<PlannedPoint> out;
  auto push = [&](Enu q, ActivityClass act, std::optional<std::size_t> station) {
    const auto a = assessor.assess(q);
    if (!a.margins_ok) throw PlanError("planned position within a decision margin");
    const bool stop = act == ActivityClass::stopover || act == ActivityClass::suspension_of_movement;
    const bool inside = act == ActivityClass::stopover || act == ActivityClass::passing;
    if (inside != a.station.has_value() || (inside && a.station != station)) {
      throw PlanError("planned station membership disagrees with geometry");
    }
    if (!out.empty()) {
      const double step = enu_distance(out.back().xy, q);
      if (stop ? step > kStopMax : step < kMoveMin) throw PlanError("planned step within the stop/move margin");
    } else if (!stop) {
      throw PlanError("a trip starts at rest");
    }
    out.push_back({q, stop ? MotionLabel::stop : MotionLabel::move, act, a.street, inside ? a.station : std::nullopt,
                   a.off_route});
  };

  for (std::size_t e = 0; e < events.size(); ++e) {
    for (const auto& t : events[e].tuples) push(path.at(t.u), t.activity, t.station);
    if (e + 1 == events.size()) break;
    const double a = events[e].tuples.back().u;
    const double b = events[e + 1].tuples.front().u;
    const Enu next = path.at(b);
    const std::size_t n = runs[e];
    if (n == 0) continue;
    auto admissible = [&](Enu q) {
      const auto as = assessor.assess(q);
      return as.margins_ok && !as.station;
    };
    // Greedy sweep from the previous tuple; when the sweep runs out of room,
    // retry with a shorter nominal step.
    std::vector<double> placed;
    const double nominal = (b - a) / static_cast<double>(n + 1);
    for (int attempt = 0; attempt < 60 && placed.size() != n; ++attempt) {
      placed.clear();
      const double step = nominal * (1.0 - 0.01 * attempt);
      double prev_u = a;
      Enu prev_xy = path.at(a);
      while (placed.size() < n) {
        double u = std::max(prev_u + step, prev_u + 0.25);
        bool found = false;
        for (; u < b; u += 0.25) {
          const Enu q = path.at(u);
          if (enu_distance(prev_xy, q) < kMoveMin) continue;
          if (admissible(q)) {
            found = true;
            break;
          }
        }
        if (!found) break;
        placed.push_back(u);
        prev_u = u;
        prev_xy = path.at(u);
      }
      if (placed.size() == n && enu_distance(prev_xy, next) < kMoveMin) placed.clear();
    }
    if (placed.size() != n) {
      throw PlanError("no admissible running layout between arc " + std::to_string(a) + " and " + std::to_string(b) +
                      " for " + std::to_string(n) + " tuples");
    }
    for (double u : placed) push(path.at(u), ActivityClass::running, std::nullopt);
  }
  return out;
}

RawTuple trip_template(const City& city, std::size_t route, const std::string& trip_id) {
  const auto& r = city.routes().at(route);
  RawTuple t;
  auto set = [&](Descriptor d, std::string v) { t.get(d) = std::move(v); };
  set(Descriptor::vlr_id, std::to_string(1000 + route));
  set(Descriptor::route_id_vlr, "V" + r.id);
  set(Descriptor::route_name, "Route " + r.id);
  set(Descriptor::route_id_rta, r.id);
  set(Descriptor::route_nickname, r.leg_names.front());
  set(Descriptor::trip_id_br, "BR-" + trip_id);
  set(Descriptor::transit_authority_service_time_id, "WK");
  set(Descriptor::trip_id_tta, trip_id);
  set(Descriptor::trip_start, "00:00:00");
  set(Descriptor::trip_finish, "00:00:00");
  set(Descriptor::vehicle_id_vab, "BUS" + std::to_string(100 + route));
  set(Descriptor::vehicle_id_vlr, std::to_string(500 + route));
  set(Descriptor::vehicle_id_vlr_ta, "TA" + std::to_string(500 + route));
  set(Descriptor::bdescription, "Codiac " + r.id);
  return t;
}

std::vector<RawTuple> to_tuples(const City& city, const std::vector<PlannedPoint>& points, const RawTuple& templ,
                                EpochSeconds start, std::uint64_t first_seq) {
  std::vector<RawTuple> out;
  out.reserve(points.size());
  auto clock = [](EpochSeconds t) {
    const EpochSeconds d = ((t % 86400) + 86400) % 86400;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(d / 3600),
                  static_cast<long long>((d / 60) % 60), static_cast<long long>(d % 60));
    return std::string(buf);
  };
  RawTuple base = templ;
  base.get(Descriptor::trip_start) = clock(start);
  base.get(Descriptor::trip_finish) = clock(start + 5 * static_cast<EpochSeconds>(points.empty() ? 0 : points.size() - 1));
  for (std::size_t i = 0; i < points.size(); ++i) {
    RawTuple t = base;
    const LatLng p = city.to_lat_lng(points[i].xy);
    t.seq = first_seq + i;
    t.lat = p.lat;
    t.lng = p.lng;
    t.timestamp = start + 5 * static_cast<EpochSeconds>(i);
    out.push_back(std::move(t));
  }
  return out;
}

TripPlan uniform_plan(const City& city, std::size_t route, int dwell, int hold) {
  const auto& r = city.routes().at(route);
  TripPlan p;
  p.route = route;
  p.dwell.assign(r.stations.size(), dwell);
  p.dwell.front() = std::max(1, dwell);
  p.dwell.back() = std::max(1, dwell);
  p.hold.assign(r.light_s.size(), hold);
  return p;
}

TripPlan random_plan(const City& city, std::size_t route, std::mt19937_64& rng) {
  const auto& r = city.routes().at(route);
  TripPlan p;
  p.route = route;
  std::uniform_int_distribution<int> dwell(1, 8);
  std::uniform_int_distribution<int> terminal(3, 12);
  std::uniform_int_distribution<int> hold(5, 30);
  std::bernoulli_distribution served(0.5);
  std::bernoulli_distribution red(0.4);
  std::uniform_real_distribution<double> step(20.0, 30.0);
  for (std::size_t k = 0; k < r.stations.size(); ++k) {
    if (k == 0 || k + 1 == r.stations.size()) {
      p.dwell.push_back(terminal(rng));
    } else {
      p.dwell.push_back(served(rng) ? dwell(rng) : 0);
    }
  }
  for (std::size_t j = 0; j < r.light_s.size(); ++j) p.hold.push_back(red(rng) ? hold(rng) : 0);
  p.step_m = step(rng);
  return p;
}

TripPlan baseline_fixture_plan(const City& city) {
  const auto& r = city.routes().at(0);
  if (city.config().blocks != 6 || r.stations.size() != 21 || r.light_s.size() != 10) {
    throw PlanError("the baseline fixture needs the default six-block city");
  }
  TripPlan p;
  p.route = 0;
  // A, outbound 130..2270 alternating served/passed, return 2270..130, B
  p.dwell = {10, 4, 0, 4, 0, 4, 0, 4, 0, 4, 0, 4, 0, 4, 0, 4, 0, 4, 0, 0, 7};
  p.hold = {22, 22, 22, 22, 22, 22, 22, 22, 22, 28};
  p.running_total = 190;
  return p;
}

TripPlan detour_fixture_plan(const City& city) {
  TripPlan p = uniform_plan(city, 0, 2, 0);
  p.dwell.front() = 3;
  p.dwell.back() = 3;
  p.detour = Detour{};
  return p;
}

}  // namespace transit::synth
