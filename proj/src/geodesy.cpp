#include "navfuse/geodesy.hpp"

#include <algorithm>
#include <cmath>

#include "navfuse/error.hpp"
#include "navfuse/quatmath.hpp"

namespace navfuse::geo {

namespace {
constexpr double kRadPerDeg = kPi / 180.0;
}

bool GeoPoint::valid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon > -180.0 && lon <= 180.0;
}

double bearing(const GeoPoint& from, const GeoPoint& to) {
  if (std::abs(from.lat - to.lat) <= 1e-12 && std::abs(wrap_lon(to.lon - from.lon)) <= 1e-12) {
    throw Error(ErrorCode::kUndefinedBearing, "bearing between coincident points");
  }
  const double phi1 = from.lat * kRadPerDeg;
  const double phi2 = to.lat * kRadPerDeg;
  const double dlon = (to.lon - from.lon) * kRadPerDeg;
  const double dy = std::sin(dlon) * std::cos(phi2);
  const double dx = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlon);
  double theta = std::atan2(dy, dx);
  if (theta < 0.0) theta += 2.0 * kPi;
  if (theta >= 2.0 * kPi) theta = 0.0;
  return theta;
}

double meters_to_degrees_lat(double meters, const EarthModel& earth) {
  return meters * 180.0 / (kPi * earth.radius_m);
}

double degrees_to_meters_lat(double degrees, const EarthModel& earth) {
  return degrees * kPi * earth.radius_m / 180.0;
}

double geodesic_distance(const GeoPoint& a, const GeoPoint& b, const EarthModel& earth) {
  const double phi1 = a.lat * kRadPerDeg;
  const double phi2 = b.lat * kRadPerDeg;
  const double sdlat = std::sin(0.5 * (phi2 - phi1));
  const double sdlon = std::sin(0.5 * (b.lon - a.lon) * kRadPerDeg);
  const double h = std::clamp(sdlat * sdlat + std::cos(phi1) * std::cos(phi2) * sdlon * sdlon, 0.0, 1.0);
  return 2.0 * earth.radius_m * std::asin(std::sqrt(h));
}

double wrap_lon(double lon_deg) {
  double l = std::remainder(lon_deg, 360.0);
  if (l <= -180.0) l += 360.0;
  return l;
}

}  // namespace navfuse::geo
