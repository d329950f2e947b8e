#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/filters.hpp"
#include "navfuse/geodesy.hpp"
#include "navfuse/quatmath.hpp"

namespace navfuse {

inline constexpr double kGravity = 9.80665;

struct GpsFix {
  double t = 0.0;
  geo::GeoPoint pos;
  double speed = 0.0;             // m/s over ground
  std::optional<double> course;   // radians clockwise from north
  bool valid = true;
  double alt_m = 0.0;             // passed through, never fused
};

struct VelocityNE {
  double north = 0.0;
  double east = 0.0;
  friend bool operator==(const VelocityNE&, const VelocityNE&) = default;
};

struct BlendWeights {
  double alpha = 0.1;  // velocity: weight of the integrated accelerometer
  double beta = 0.1;   // position: weight of the integrated velocity
};

// Ground velocity implied by the GPS: scalar speed along the bearing of the
// last two fixes.
struct GpsVelocity {
  double speed = 0.0;
  double bearing = 0.0;  // radians clockwise from north
};

enum class Integration { kEuler, kTrapezoid };

// Low-pass applied to body acceleration before integration.
enum class PreFilter { kButterworth, kChebyshev };

struct NavConfig {
  double sample_rate_hz = 60.0;
  // <= 0 selects the default: 10 Hz capped at fs/6.
  double accel_cutoff_hz = 0.0;
  geo::EarthModel earth;
  bool lon_scale_correction = false;
  double gps_stale_s = 3.0;
  Integration integration = Integration::kEuler;
  PreFilter prefilter = PreFilter::kButterworth;
  double chebyshev_ripple_db = 1.0;

  double effective_cutoff_hz() const;
  dsp::BiquadCoeffs prefilter_coeffs() const;
};

struct NavState {
  bool initialized = false;
  VelocityNE vel;
  geo::GeoPoint pos;
  double t_last = 0.0;
  bool has_t_last = false;
  VelocityNE last_accel;  // previous world-frame acceleration (trapezoid rule)
  std::array<dsp::BiquadFilter, 3> accel_filters;
  std::optional<GpsFix> newest_fix;
  std::optional<GpsFix> previous_fix;  // last valid fix at a distinct position
};

// World-frame (north-west-up) specific force with gravity removed.
Vec3 gravity_compensate(const Vec3& accel_body, const Quaternion& q);

inline VelocityNE world_to_ne(const Vec3& a_world) { return {a_world.x, -a_world.y}; }

// V = alpha (V + a dt) + (1 - alpha) speed (cos, sin)(bearing); pure
// integration when gps is absent.
VelocityNE velocity_step(const VelocityNE& v, const VelocityNE& accel, double dt,
                         const std::optional<GpsVelocity>& gps, const BlendWeights& w);

// lat = beta (lat + v_n dt 180 / (pi r_e)) + (1 - beta) lat_ref, and the
// same for longitude with v_e. With lon_scale_correction the longitude
// step is divided by cos(lat). Pure dead reckoning when ref is absent.
geo::GeoPoint position_step(const geo::GeoPoint& prev, const VelocityNE& v, double dt,
                            const std::optional<geo::GeoPoint>& ref, const BlendWeights& w,
                            const geo::EarthModel& earth, bool lon_scale_correction = false);

// Piecewise-linear in time over the valid fixes. Throws kInvalidArgument
// with fewer than two valid fixes and kOutOfRange outside their time span.
geo::GeoPoint interpolate_gps(std::span<const GpsFix> fixes, double t);

NavState make_nav_state(const NavConfig& config);

// Records a fix for the GPS velocity term. The first valid fix also seeds
// position and, when it carries a course, velocity.
void nav_observe_fix(NavState& state, const GpsFix& fix);

// GPS velocity term available at time t, if any.
std::optional<GpsVelocity> gps_velocity(const NavState& state, double t, const NavConfig& config);

// One step of the position pipeline. reference is the GPS position the
// blend pulls toward at s.t (latest fix live, interpolated on replay).
void nav_step(NavState& state, const ImuSample& s, const Quaternion& attitude,
              const std::optional<geo::GeoPoint>& reference, const BlendWeights& w,
              const NavConfig& config);

}  // namespace navfuse
