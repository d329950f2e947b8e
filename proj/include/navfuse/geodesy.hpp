#pragma once

namespace navfuse::geo {

// Degrees. lat in [-90, 90], lon in (-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
  bool valid() const;
};

struct EarthModel {
  double radius_m = 6371000.0;
};

// Initial great-circle bearing, clockwise from north, in [0, 2*pi).
// Throws kUndefinedBearing when the points coincide within 1e-12 degrees.
double bearing(const GeoPoint& from, const GeoPoint& to);

// d * 180 / (pi * r_e)
double meters_to_degrees_lat(double meters, const EarthModel& earth = {});
double degrees_to_meters_lat(double degrees, const EarthModel& earth = {});

// Haversine distance in meters.
double geodesic_distance(const GeoPoint& a, const GeoPoint& b, const EarthModel& earth = {});

// Folds a longitude into (-180, 180].
double wrap_lon(double lon_deg);

}  // namespace navfuse::geo
