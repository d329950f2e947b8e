#include "navfuse/position.hpp"

#include <algorithm>
#include <cmath>

#include "navfuse/error.hpp"

namespace navfuse {

double NavConfig::effective_cutoff_hz() const {
  if (accel_cutoff_hz > 0.0) return accel_cutoff_hz;
  return std::min(10.0, sample_rate_hz / 6.0);
}

dsp::BiquadCoeffs NavConfig::prefilter_coeffs() const {
  if (prefilter == PreFilter::kChebyshev) {
    return dsp::design_chebyshev1_2_lp(effective_cutoff_hz(), sample_rate_hz, chebyshev_ripple_db);
  }
  return dsp::design_butterworth2_lp(effective_cutoff_hz(), sample_rate_hz);
}

Vec3 gravity_compensate(const Vec3& accel_body, const Quaternion& q) {
  const Vec3 w = rotate_vector(q, accel_body);
  return {w.x, w.y, w.z - kGravity};
}

VelocityNE velocity_step(const VelocityNE& v, const VelocityNE& accel, double dt,
                         const std::optional<GpsVelocity>& gps, const BlendWeights& w) {
  const VelocityNE integrated{v.north + accel.north * dt, v.east + accel.east * dt};
  if (!gps) return integrated;
  const double a = w.alpha;
  return {a * integrated.north + (1.0 - a) * gps->speed * std::cos(gps->bearing),
          a * integrated.east + (1.0 - a) * gps->speed * std::sin(gps->bearing)};
}

geo::GeoPoint position_step(const geo::GeoPoint& prev, const VelocityNE& v, double dt,
                            const std::optional<geo::GeoPoint>& ref, const BlendWeights& w,
                            const geo::EarthModel& earth, bool lon_scale_correction) {
  double dlon = geo::meters_to_degrees_lat(v.east * dt, earth);
  if (lon_scale_correction) {
    dlon /= std::max(std::cos(prev.lat * kPi / 180.0), 1e-6);
  }
  geo::GeoPoint dr{prev.lat + geo::meters_to_degrees_lat(v.north * dt, earth), prev.lon + dlon};
  if (ref) {
    const double b = w.beta;
    double ref_lon = ref->lon;
    // Keep the blend on one side of the antimeridian.
    if (dr.lon - ref_lon > 180.0) ref_lon += 360.0;
    if (ref_lon - dr.lon > 180.0) ref_lon -= 360.0;
    dr = {b * dr.lat + (1.0 - b) * ref->lat, b * dr.lon + (1.0 - b) * ref_lon};
  }
  dr.lat = std::clamp(dr.lat, -90.0, 90.0);
  if (dr.lon <= -180.0 || dr.lon > 180.0) dr.lon = geo::wrap_lon(dr.lon);
  return dr;
}

geo::GeoPoint interpolate_gps(std::span<const GpsFix> fixes, double t) {
  std::vector<const GpsFix*> valid;
  valid.reserve(fixes.size());
  for (const auto& f : fixes) {
    if (f.valid) valid.push_back(&f);
  }
  if (valid.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "interpolation needs at least two valid fixes");
  }
  if (!(t >= valid.front()->t) || !(t <= valid.back()->t)) {
    throw Error(ErrorCode::kOutOfRange, "time outside the GPS fix span");
  }
  // First fix strictly after t; its predecessor starts the bracket.
  auto it = std::upper_bound(valid.begin(), valid.end(), t,
                             [](double value, const GpsFix* f) { return value < f->t; });
  if (it == valid.end()) return valid.back()->pos;
  const GpsFix& hi = **it;
  const GpsFix& lo = **(it - 1);
  if (t == lo.t) return lo.pos;
  const double u = (t - lo.t) / (hi.t - lo.t);
  double hi_lon = hi.pos.lon;
  if (hi_lon - lo.pos.lon > 180.0) hi_lon -= 360.0;
  if (lo.pos.lon - hi_lon > 180.0) hi_lon += 360.0;
  return {lo.pos.lat + u * (hi.pos.lat - lo.pos.lat),
          geo::wrap_lon(lo.pos.lon + u * (hi_lon - lo.pos.lon))};
}

NavState make_nav_state(const NavConfig& config) {
  NavState state;
  const auto coeffs = config.prefilter_coeffs();
  for (auto& f : state.accel_filters) f = dsp::BiquadFilter(coeffs);
  return state;
}

void nav_observe_fix(NavState& state, const GpsFix& fix) {
  if (!fix.valid) return;
  if (!fix.pos.valid() || !std::isfinite(fix.speed) || !std::isfinite(fix.t)) {
    throw Error(ErrorCode::kInvalidArgument, "GPS fix has out-of-range fields");
  }
  if (state.newest_fix && !(fix.t > state.newest_fix->t)) {
    throw Error(ErrorCode::kOrdering, "GPS fix timestamp does not advance");
  }
  if (!state.initialized) {
    state.pos = fix.pos;
    if (fix.course) {
      state.vel = {fix.speed * std::cos(*fix.course), fix.speed * std::sin(*fix.course)};
    }
    state.initialized = true;
  }
  if (state.newest_fix && !(state.newest_fix->pos == fix.pos)) {
    state.previous_fix = state.newest_fix;
  }
  state.newest_fix = fix;
}

std::optional<GpsVelocity> gps_velocity(const NavState& state, double t, const NavConfig& config) {
  if (!state.newest_fix || !state.previous_fix) return std::nullopt;
  if (t - state.newest_fix->t > config.gps_stale_s) return std::nullopt;
  return GpsVelocity{state.newest_fix->speed,
                     geo::bearing(state.previous_fix->pos, state.newest_fix->pos)};
}

void nav_step(NavState& state, const ImuSample& s, const Quaternion& attitude,
              const std::optional<geo::GeoPoint>& reference, const BlendWeights& w,
              const NavConfig& config) {
  if (state.has_t_last && !(s.t > state.t_last)) {
    throw Error(ErrorCode::kOrdering, "IMU timestamp does not advance");
  }
  const double in[3] = {s.accel.x, s.accel.y, s.accel.z};
  if (!state.has_t_last) {
    for (int i = 0; i < 3; ++i) state.accel_filters[i].prime(in[i]);
  }
  const Vec3 filtered{state.accel_filters[0].step(in[0]), state.accel_filters[1].step(in[1]),
                      state.accel_filters[2].step(in[2])};
  const VelocityNE accel = world_to_ne(gravity_compensate(filtered, attitude));

  if (!state.has_t_last || !state.initialized) {
    state.t_last = s.t;
    state.has_t_last = true;
    state.last_accel = accel;
    return;
  }

  const double dt = s.t - state.t_last;
  const auto gps = gps_velocity(state, s.t, config);
  if (config.integration == Integration::kEuler) {
    state.vel = velocity_step(state.vel, accel, dt, gps, w);
    state.pos = position_step(state.pos, state.vel, dt, reference, w, config.earth,
                              config.lon_scale_correction);
  } else {
    const VelocityNE mean_accel{0.5 * (accel.north + state.last_accel.north),
                                0.5 * (accel.east + state.last_accel.east)};
    const VelocityNE v_old = state.vel;
    state.vel = velocity_step(state.vel, mean_accel, dt, gps, w);
    const VelocityNE mean_vel{0.5 * (v_old.north + state.vel.north),
                              0.5 * (v_old.east + state.vel.east)};
    state.pos = position_step(state.pos, mean_vel, dt, reference, w, config.earth,
                              config.lon_scale_correction);
  }
  state.last_accel = accel;
  state.t_last = s.t;
}

}  // namespace navfuse
