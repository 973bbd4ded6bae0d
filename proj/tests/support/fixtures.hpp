#pragma once

#include <string>
#include <vector>

#include "transit/core_model.hpp"
#include "transit/synth/geo.hpp"

namespace transit::testing {

// Fully populated tuple with valid descriptor values.
inline RawTuple make_raw(const std::string& route, const std::string& trip, EpochSeconds ts, LatLng p,
                           std::uint64_t seq = 0) {
  RawTuple t;
  t.seq = seq;
  for (std::size_t i = 0; i < kDescriptorCount; ++i) t.descriptors[i] = "v" + std::to_string(i);
  t.get(Descriptor::vlr_id) = "1001";
  t.get(Descriptor::route_name) = "Route " + route;
  t.get(Descriptor::route_nickname) = "Main";
  t.get(Descriptor::bdescription) = "Bus 7";
  t.get(Descriptor::trip_start) = "08:00:00";
  t.get(Descriptor::trip_finish) = "09:00:00";
  t.get(kRouteIdField) = route;
  t.get(kTripIdField) = trip;
  t.timestamp = ts;
  t.lat = p.lat;
  t.lng = p.lng;
  return t;
}

// Reference location used across tests (Moncton, NB).
inline constexpr LatLng kOrigin{46.0878, -64.7782};

// Point at east/north metres from `origin`, via the synth tangent plane.
inline LatLng offset(LatLng origin, double east_m, double north_m) {
  return synth::TangentPlane(origin).inverse({east_m, north_m});
}

// 2019-06-12T08:00:00Z
inline constexpr EpochSeconds kT0 = 1560326400;

}  // namespace transit::testing

#include <filesystem>
#include <random>

namespace transit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("transit-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace transit::testing
