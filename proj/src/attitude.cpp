#include "navfuse/attitude.hpp"

#include <cmath>

#include "navfuse/error.hpp"

namespace navfuse {

namespace {

constexpr double kStandardGravity = 9.80665;

struct Tilt {
  bool observable = false;
  double roll = 0.0;
  double pitch = 0.0;
};

Tilt try_tilt(const Vec3& accel) {
  if (!(accel.norm() >= 0.1 * kStandardGravity)) return {};
  const auto [roll, pitch] = accel_to_roll_pitch(accel);
  return {true, roll, pitch};
}

std::optional<double> try_heading(const AttitudeConfig& config, const std::optional<Vec3>& mag,
                                  double roll, double pitch) {
  if (!mag) return std::nullopt;
  try {
    return wrap_pi(mag_to_heading(*mag - config.hard_iron, roll, pitch) + config.declination_rad);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnobservableHeading) throw;
    return std::nullopt;
  }
}

void store(AttitudeState& state, const EulerAngles& fused) {
  state.q = normalize(from_euler(fused));
  // Fused angles are kept as-is so that a zero gain reproduces the
  // reference bit for bit; past the pitch poles the triple is re-derived
  // from q to stay in canonical range.
  if (std::abs(fused.pitch) > kPi / 2.0) {
    state.euler = to_euler(state.q);
  } else {
    state.euler = fused;
  }
}

}  // namespace

std::pair<double, double> accel_to_roll_pitch(const Vec3& a) {
  if (!(a.norm() >= 0.1 * kStandardGravity)) {
    throw Error(ErrorCode::kUnobservableTilt, "accelerometer magnitude below 0.1 g");
  }
  const double roll = std::atan2(a.y, a.z);
  const double pitch = std::atan2(-a.x, std::sqrt(a.y * a.y + a.z * a.z));
  return {roll, pitch};
}

double mag_to_heading(const Vec3& m, double roll, double pitch) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  // Level the reading: Ry(pitch) * Rx(roll) * m.
  const double vy = m.y * cr - m.z * sr;
  const double vz = m.y * sr + m.z * cr;
  const double hx = m.x * cp + vz * sp;
  const double hy = vy;
  if (!(std::hypot(hx, hy) >= 1e-9)) {
    throw Error(ErrorCode::kUnobservableHeading, "horizontal magnetic field too weak");
  }
  return wrap_pi(std::atan2(-hy, hx));
}

double complementary_angle(double prev, double rate, double dt, double reference, double gain) {
  if (gain == 0.0) return wrap_pi(reference);
  const double predicted = prev + rate * dt;
  if (gain == 1.0) return wrap_pi(predicted);
  return wrap_pi(predicted + (1.0 - gain) * wrap_pi(reference - predicted));
}

AttitudeState make_attitude_state(const AttitudeConfig& config) {
  AttitudeState state;
  const auto lp = dsp::design_first_order_lp(config.accel_lp_hz, config.sample_rate_hz);
  const auto hp = config.gyro_hp_hz > 0.0
                      ? dsp::design_first_order_hp(config.gyro_hp_hz, config.sample_rate_hz)
                      : dsp::BiquadCoeffs::identity(config.sample_rate_hz);
  for (auto& f : state.accel_lp) f = dsp::BiquadFilter(lp);
  state.gyro_hp[0] = dsp::BiquadFilter(hp);
  state.gyro_hp[1] = dsp::BiquadFilter(hp);
  // Yaw rate is integrated unfiltered; the magnetometer handles its drift.
  state.gyro_hp[2] = dsp::BiquadFilter(dsp::BiquadCoeffs::identity(config.sample_rate_hz));
  return state;
}

void attitude_step(AttitudeState& state, const ImuSample& s, const AttitudeConfig& config) {
  if (!s.accel.finite() || !s.gyro.finite() || (s.mag && !s.mag->finite()) || !std::isfinite(s.t)) {
    throw Error(ErrorCode::kNonFinite, "IMU sample has non-finite fields");
  }

  if (!state.initialized) {
    const double in_accel[3] = {s.accel.x, s.accel.y, s.accel.z};
    const double in_gyro[3] = {s.gyro.x, s.gyro.y, s.gyro.z};
    for (int i = 0; i < 3; ++i) {
      state.accel_lp[i].prime(in_accel[i]);
      state.gyro_hp[i].prime(in_gyro[i]);
    }
    const Tilt tilt = try_tilt(s.accel);
    EulerAngles e{tilt.roll, tilt.pitch, 0.0};
    e.yaw = try_heading(config, s.mag, e.roll, e.pitch).value_or(0.0);
    store(state, e);
    state.t_last = s.t;
    state.initialized = true;
    return;
  }

  if (!(s.t > state.t_last)) {
    throw Error(ErrorCode::kOrdering, "IMU timestamp does not advance");
  }
  const double dt = s.t - state.t_last;

  const Vec3 accel{state.accel_lp[0].step(s.accel.x), state.accel_lp[1].step(s.accel.y),
                   state.accel_lp[2].step(s.accel.z)};
  const Vec3 rate{state.gyro_hp[0].step(s.gyro.x), state.gyro_hp[1].step(s.gyro.y),
                  state.gyro_hp[2].step(s.gyro.z)};

  const bool gap = dt > config.gap_threshold_s;
  if (gap) ++state.gap_warnings;
  const FusionGains& g = config.gains;
  const EulerAngles& prev = state.euler;
  EulerAngles next = prev;

  const Tilt tilt = try_tilt(accel);
  if (tilt.observable) {
    next.roll = complementary_angle(prev.roll, rate.x, dt, tilt.roll, gap ? 0.0 : g.gamma_rp);
    next.pitch = complementary_angle(prev.pitch, rate.y, dt, tilt.pitch, gap ? 0.0 : g.gamma_rp);
  } else if (!gap) {
    next.roll = wrap_pi(prev.roll + rate.x * dt);
    next.pitch = wrap_pi(prev.pitch + rate.y * dt);
  }

  const auto heading = try_heading(config, s.mag, next.roll, next.pitch);
  if (heading) {
    next.yaw = complementary_angle(prev.yaw, rate.z, dt, *heading, gap ? 0.0 : g.gamma_yaw);
  } else if (!gap) {
    next.yaw = wrap_pi(prev.yaw + rate.z * dt);
  }

  store(state, next);
  state.t_last = s.t;
}

}  // namespace navfuse
