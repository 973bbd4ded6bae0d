#include "transit/synth/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace transit::synth {

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

}  // namespace

double haversine_m(LatLng a, LatLng b) {
  const double p1 = a.lat * kRad;
  const double p2 = b.lat * kRad;
  const double dp = (b.lat - a.lat) * kRad;
  const double dl = (b.lng - a.lng) * kRad;
  const double s = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kSphereRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

TangentPlane::TangentPlane(LatLng origin) : origin_(origin) {
  sin_lat_ = std::sin(origin.lat * kRad);
  cos_lat_ = std::cos(origin.lat * kRad);
  sin_lng_ = std::sin(origin.lng * kRad);
  cos_lng_ = std::cos(origin.lng * kRad);
  ox_ = kSphereRadiusM * cos_lat_ * cos_lng_;
  oy_ = kSphereRadiusM * cos_lat_ * sin_lng_;
  oz_ = kSphereRadiusM * sin_lat_;
}

Enu TangentPlane::forward(LatLng p) const {
  const double sl = std::sin(p.lat * kRad);
  const double cl = std::cos(p.lat * kRad);
  const double x = kSphereRadiusM * cl * std::cos(p.lng * kRad) - ox_;
  const double y = kSphereRadiusM * cl * std::sin(p.lng * kRad) - oy_;
  const double z = kSphereRadiusM * sl - oz_;
  return {-sin_lng_ * x + cos_lng_ * y, -sin_lat_ * cos_lng_ * x - sin_lat_ * sin_lng_ * y + cos_lat_ * z};
}

LatLng TangentPlane::inverse(Enu p) const {
  // Lift the plane point back onto the sphere along the local up axis.
  const double u = std::sqrt(kSphereRadiusM * kSphereRadiusM - p.e * p.e - p.n * p.n) - kSphereRadiusM;
  const double x = ox_ - sin_lng_ * p.e - sin_lat_ * cos_lng_ * p.n + cos_lat_ * cos_lng_ * u;
  const double y = oy_ + cos_lng_ * p.e - sin_lat_ * sin_lng_ * p.n + cos_lat_ * sin_lng_ * u;
  const double z = oz_ + cos_lat_ * p.n + sin_lat_ * u;
  const double r = std::sqrt(x * x + y * y + z * z);
  return {std::asin(z / r) / kRad, std::atan2(y, x) / kRad};
}

double point_segment_m(LatLng p, LatLng a, LatLng b) {
  const TangentPlane plane(p);
  const Enu ea = plane.forward(a);
  const Enu eb = plane.forward(b);
  const double ve = eb.e - ea.e;
  const double vn = eb.n - ea.n;
  const double len2 = ve * ve + vn * vn;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp((-ea.e * ve - ea.n * vn) / len2, 0.0, 1.0);
  const double de = ea.e + t * ve;
  const double dn = ea.n + t * vn;
  return std::sqrt(de * de + dn * dn);
}

double point_polyline_m(LatLng p, const std::vector<LatLng>& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, point_segment_m(p, line[i], line[i + 1]));
  return best;
}

}  // namespace transit::synth
