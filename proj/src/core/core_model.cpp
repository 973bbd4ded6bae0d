#include "transit/core_model.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace transit {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetresPerDegree = LocalFrame::kEarthRadiusM * kDegToRad;

template <typename T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

}  // namespace

std::optional<std::size_t> descriptor_index(std::string_view name) {
  for (std::size_t i = 0; i < kDescriptorNames.size(); ++i) {
    if (kDescriptorNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string CivilDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

CivilDate utc_date(EpochSeconds t) {
  using namespace std::chrono;
  const auto day = floor<days>(sys_seconds{seconds{t}});
  const year_month_day ymd{day};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

std::string TripKey::to_string() const {
  return route_id + "/" + trip_id + "/" + service_date.to_string();
}

std::optional<TripKey> trip_key_of(const RawTuple& t) {
  const auto& route = t.get(kRouteIdField);
  const auto& trip = t.get(kTripIdField);
  if (!route || !trip || route->empty() || trip->empty() || !t.timestamp) return std::nullopt;
  return TripKey{*route, *trip, utc_date(*t.timestamp)};
}

std::string_view to_string(MotionLabel m) { return m == MotionLabel::move ? "move" : "stop"; }

std::string_view to_string(ActivityClass a) {
  switch (a) {
    case ActivityClass::running: return "running";
    case ActivityClass::passing: return "passing";
    case ActivityClass::suspension_of_movement: return "suspension_of_movement";
    case ActivityClass::stopover: return "stopover";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::outbound ? "outbound" : "return"; }

std::string_view to_string(StationEvent e) {
  switch (e) {
    case StationEvent::none: return "none";
    case StationEvent::arrival: return "arrival";
    case StationEvent::departure: return "departure";
    case StationEvent::arrival_and_departure: return "arrival_and_departure";
  }
  return "?";
}

MotionLabel parse_motion(std::string_view s) {
  if (s == "move") return MotionLabel::move;
  if (s == "stop") return MotionLabel::stop;
  throw std::invalid_argument("unknown motion label: " + std::string(s));
}

ActivityClass parse_activity(std::string_view s) {
  if (s == "running") return ActivityClass::running;
  if (s == "passing") return ActivityClass::passing;
  if (s == "suspension_of_movement") return ActivityClass::suspension_of_movement;
  if (s == "stopover") return ActivityClass::stopover;
  throw std::invalid_argument("unknown activity class: " + std::string(s));
}

Direction parse_direction(std::string_view s) {
  if (s == "outbound") return Direction::outbound;
  if (s == "return") return Direction::return_trip;
  throw std::invalid_argument("unknown direction: " + std::string(s));
}

StationEvent parse_event(std::string_view s) {
  if (s == "none") return StationEvent::none;
  if (s == "arrival") return StationEvent::arrival;
  if (s == "departure") return StationEvent::departure;
  if (s == "arrival_and_departure") return StationEvent::arrival_and_departure;
  throw std::invalid_argument("unknown station event: " + std::string(s));
}

LocalFrame::LocalFrame(LatLng origin)
    : origin_(origin),
      m_per_deg_north_(kMetresPerDegree),
      m_per_deg_east_(kMetresPerDegree * std::cos(origin.lat * kDegToRad)) {}

LocalFrame::Xy LocalFrame::project(LatLng p) const {
  return {(p.lng - origin_.lng) * m_per_deg_east_, (p.lat - origin_.lat) * m_per_deg_north_};
}

LatLng LocalFrame::unproject(Xy p) const {
  return {origin_.lat + p.y / m_per_deg_north_, origin_.lng + p.x / m_per_deg_east_};
}

double LocalFrame::distance_from_origin(LatLng p) const {
  return planar_distance_unchecked(origin_, p);
}

double planar_distance_unchecked(LatLng a, LatLng b) {
  const double mean_lat = 0.5 * (a.lat + b.lat) * kDegToRad;
  const double dy = (b.lat - a.lat) * kMetresPerDegree;
  const double dx = (b.lng - a.lng) * kMetresPerDegree * std::cos(mean_lat);
  return std::sqrt(dx * dx + dy * dy);
}

double planar_distance(LatLng a, LatLng b, const LocalFrame& frame) {
  if (!frame.in_range(a) || !frame.in_range(b)) {
    throw FrameRangeError("point outside the local frame validity radius");
  }
  return planar_distance_unchecked(a, b);
}

std::optional<EpochSeconds> parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  if (all_digits(text) || (text.front() == '-' && all_digits(text.substr(1)))) {
    EpochSeconds v = 0;
    if (!parse_int(text, v)) return std::nullopt;
    return v;
  }

  // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM|+HHMM]
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) return std::nullopt;

  std::string_view rest = text.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    std::size_t n = 0;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
    if (n == 0) return std::nullopt;
    rest.remove_prefix(n);  // sub-second precision is dropped
  }

  EpochSeconds offset = 0;
  if (rest == "Z" || rest == "z" || rest.empty()) {
    offset = 0;
  } else if (rest.front() == '+' || rest.front() == '-') {
    const int sign = rest.front() == '+' ? 1 : -1;
    rest.remove_prefix(1);
    unsigned oh = 0, om = 0;
    if (rest.size() == 5 && rest[2] == ':') {
      if (!parse_int(rest.substr(0, 2), oh) || !parse_int(rest.substr(3, 2), om)) return std::nullopt;
    } else if (rest.size() == 4) {
      if (!parse_int(rest.substr(0, 2), oh) || !parse_int(rest.substr(2, 2), om)) return std::nullopt;
    } else if (rest.size() == 2) {
      if (!parse_int(rest, oh)) return std::nullopt;
    } else {
      return std::nullopt;
    }
    offset = sign * static_cast<EpochSeconds>(oh * 3600 + om * 60);
  } else {
    return std::nullopt;
  }

  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<EpochSeconds>(days_since_epoch) * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::string format_iso8601(EpochSeconds t) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{t}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace transit
