#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace transit {

// Seconds since 1970-01-01T00:00:00Z. Feeds are treated as UTC throughout.
using EpochSeconds = std::int64_t;

inline constexpr std::size_t kDescriptorCount = 14;

// Order matters: this is the on-wire attribute order of a feed record.
inline constexpr std::array<std::string_view, kDescriptorCount> kDescriptorNames = {
    "vlr_id",
    "route_id_vlr",
    "route_name",
    "route_id_rta",
    "route_nickname",
    "trip_id_br",
    "transit_authority_service_time_id",
    "trip_id_tta",
    "trip_start",
    "trip_finish",
    "vehicle_id_vab",
    "vehicle_id_vlr",
    "vehicle_id_vlr_ta",
    "bdescription",
};

enum class Descriptor : std::size_t {
  vlr_id = 0,
  route_id_vlr,
  route_name,
  route_id_rta,
  route_nickname,
  trip_id_br,
  transit_authority_service_time_id,
  trip_id_tta,
  trip_start,
  trip_finish,
  vehicle_id_vab,
  vehicle_id_vlr,
  vehicle_id_vlr_ta,
  bdescription,
};

// The descriptors that form the partition key.
inline constexpr Descriptor kRouteIdField = Descriptor::route_id_rta;
inline constexpr Descriptor kTripIdField = Descriptor::trip_id_tta;

inline constexpr std::string_view kLatField = "lat";
inline constexpr std::string_view kLngField = "lng";
inline constexpr std::string_view kTimestampField = "timestamp";

// Value assigned to non-essential attributes that are missing or unrepairable.
inline constexpr std::string_view kNotAvailable = "N/A";

std::optional<std::size_t> descriptor_index(std::string_view name);

struct LatLng {
  double lat = 0.0;
  double lng = 0.0;

  friend bool operator==(const LatLng&, const LatLng&) = default;
};

// One GPS report as received from a feed. Fields may be absent on ingest;
// cleaning either repairs the record or rejects it.
struct RawTuple {
  std::uint64_t seq = 0;  // ingest sequence number, assigned in arrival order
  std::array<std::optional<std::string>, kDescriptorCount> descriptors;
  std::vector<std::pair<std::string, std::string>> extras;  // attributes outside the schema
  std::optional<double> lat;
  std::optional<double> lng;
  std::optional<EpochSeconds> timestamp;
  bool late = false;  // appended after its event window closed

  const std::optional<std::string>& get(Descriptor d) const {
    return descriptors[static_cast<std::size_t>(d)];
  }
  std::optional<std::string>& get(Descriptor d) { return descriptors[static_cast<std::size_t>(d)]; }

  LatLng position() const { return {lat.value_or(0.0), lng.value_or(0.0)}; }

  // Content equality, ignoring ingest bookkeeping (seq, late).
  bool same_content(const RawTuple& other) const {
    return descriptors == other.descriptors && extras == other.extras && lat == other.lat &&
           lng == other.lng && timestamp == other.timestamp;
  }
};

struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const CivilDate&) const = default;
  std::string to_string() const;  // YYYY-MM-DD
};

CivilDate utc_date(EpochSeconds t);

struct TripKey {
  std::string route_id;
  std::string trip_id;
  CivilDate service_date;

  auto operator<=>(const TripKey&) const = default;
  bool operator==(const TripKey&) const = default;
  std::string to_string() const;  // route/trip/date
};

// Builds the partition key of a tuple; empty when route, trip or time is missing.
std::optional<TripKey> trip_key_of(const RawTuple& t);

enum class MotionLabel { stop, move };

enum class ActivityClass { running, passing, suspension_of_movement, stopover };

enum class Direction { outbound, return_trip };

enum class StationEvent { none, arrival, departure, arrival_and_departure };

std::string_view to_string(MotionLabel m);
std::string_view to_string(ActivityClass a);
std::string_view to_string(Direction d);
std::string_view to_string(StationEvent e);

MotionLabel parse_motion(std::string_view s);
ActivityClass parse_activity(std::string_view s);
Direction parse_direction(std::string_view s);
StationEvent parse_event(std::string_view s);

inline constexpr std::string_view kWrongStreetSegment = "wrong street segment";

struct StationTag {
  std::string station_id;
  Direction direction = Direction::outbound;

  bool operator==(const StationTag&) const = default;
};

// Origin, destination, or the 1-based index of an interior tuple.
struct TripPosition {
  enum class Kind { origin, destination, index } kind = Kind::index;
  std::uint32_t index = 0;

  static TripPosition origin() { return {Kind::origin, 0}; }
  static TripPosition destination() { return {Kind::destination, 0}; }
  static TripPosition at(std::uint32_t i) { return {Kind::index, i}; }
  bool operator==(const TripPosition&) const = default;
};

struct ContextTuple {
  RawTuple base;
  MotionLabel motion = MotionLabel::stop;                     // a18
  ActivityClass activity = ActivityClass::suspension_of_movement;  // a19
  std::string street;                                         // a20
  std::optional<StationTag> station;                          // a21
  std::optional<std::string> intersection;                    // a22
  StationEvent event = StationEvent::none;                    // a23
  TripPosition position;                                      // a24
};

class FrameRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Equirectangular frame tangent at an origin on a spherical earth. Projected
// coordinates are east/north metres from the origin.
class LocalFrame {
 public:
  static constexpr double kEarthRadiusM = 6371008.8;
  static constexpr double kValidityRadiusM = 50000.0;

  explicit LocalFrame(LatLng origin);

  const LatLng& origin() const { return origin_; }
  double metres_per_degree_north() const { return m_per_deg_north_; }
  double metres_per_degree_east() const { return m_per_deg_east_; }

  struct Xy {
    double x = 0.0;
    double y = 0.0;
  };

  Xy project(LatLng p) const;
  LatLng unproject(Xy p) const;

  // Distance from the origin, without range checks.
  double distance_from_origin(LatLng p) const;
  bool in_range(LatLng p) const { return distance_from_origin(p) <= kValidityRadiusM; }

 private:
  LatLng origin_;
  double m_per_deg_north_;
  double m_per_deg_east_;
};

// Euclidean distance in metres. The east scale is taken at the mean latitude of
// the pair, which keeps the error against great-circle distance well under
// 0.1% anywhere inside the frame's validity radius. Throws FrameRangeError when
// either point lies outside that radius.
double planar_distance(LatLng a, LatLng b, const LocalFrame& frame);

// Same metric without the range check; for hot loops that validated already.
double planar_distance_unchecked(LatLng a, LatLng b);

// ISO-8601 (date, 'T' or space, time, optional fraction, optional Z/offset) or
// integral epoch seconds.
std::optional<EpochSeconds> parse_timestamp(std::string_view text);
std::string format_iso8601(EpochSeconds t);

}  // namespace transit
