#pragma once

#include <vector>

#include "transit/core_model.hpp"

// Geodesy for the synthetic corpus and the test oracles. Deliberately shares
// no arithmetic with LocalFrame / planar_distance.
namespace transit::synth {

inline constexpr double kSphereRadiusM = 6371008.8;

double haversine_m(LatLng a, LatLng b);

struct Enu {
  double e = 0.0;
  double n = 0.0;
};

// Orthographic tangent plane through ECEF coordinates on a sphere.
class TangentPlane {
 public:
  explicit TangentPlane(LatLng origin);

  Enu forward(LatLng p) const;
  LatLng inverse(Enu p) const;
  const LatLng& origin() const { return origin_; }

 private:
  LatLng origin_;
  double ox_, oy_, oz_;
  double sin_lat_, cos_lat_, sin_lng_, cos_lng_;
};

// Metres from p to the segment a-b, measured in the tangent plane at p.
double point_segment_m(LatLng p, LatLng a, LatLng b);

// Metres from p to a polyline.
double point_polyline_m(LatLng p, const std::vector<LatLng>& line);

}  // namespace transit::synth
