#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "navfuse/filters.hpp"
#include "navfuse/quatmath.hpp"

namespace navfuse {

// Axis conventions used throughout the library:
//  * body frame: x forward, y left, z up. A level, static accelerometer
//    reads (0, 0, +g).
//  * world frame: x north, y west, z up. Attitude quaternions rotate body
//    vectors into this frame, so yaw is counter-clockwise from north.
//  * a magnetometer reading of (1, 0, 0) while level means the nose points
//    at magnetic north.
struct ImuSample {
  double t = 0.0;    // seconds
  Vec3 accel;        // m/s^2
  Vec3 gyro;         // rad/s
  std::optional<Vec3> mag;
};

struct FusionGains {
  double gamma_rp = 0.98;
  double gamma_yaw = 0.98;
};

struct AttitudeConfig {
  double sample_rate_hz = 60.0;
  double accel_lp_hz = 5.0;
  // Applied to the roll and pitch rate axes only; <= 0 disables it.
  double gyro_hp_hz = 0.1;
  double gap_threshold_s = 1.0;
  double declination_rad = 0.0;
  Vec3 hard_iron;
  FusionGains gains;
};

struct AttitudeState {
  bool initialized = false;
  Quaternion q;
  EulerAngles euler;
  double t_last = 0.0;
  std::array<dsp::BiquadFilter, 3> accel_lp;
  std::array<dsp::BiquadFilter, 3> gyro_hp;
  std::uint64_t gap_warnings = 0;
};

// Tilt from a gravity-dominated accelerometer reading. Throws
// kUnobservableTilt when |accel| < 0.1 g.
std::pair<double, double> accel_to_roll_pitch(const Vec3& accel);

// Tilt-compensated heading in (-pi, pi]. Throws kUnobservableHeading when
// the levelled horizontal field is below 1e-9.
double mag_to_heading(const Vec3& mag, double roll, double pitch);

// gain * (prev + rate*dt) + (1 - gain) * reference, blended along the
// shorter arc; result in (-pi, pi].
double complementary_angle(double prev, double rate, double dt, double reference, double gain);

AttitudeState make_attitude_state(const AttitudeConfig& config);

// One step of the orientation pipeline. Throws kOrdering when s.t does not
// advance. A gap longer than gap_threshold_s drops the gyro term for the
// step and increments gap_warnings.
void attitude_step(AttitudeState& state, const ImuSample& s, const AttitudeConfig& config);

class AttitudeEstimator {
 public:
  explicit AttitudeEstimator(const AttitudeConfig& config = {})
      : config_(config), state_(make_attitude_state(config)) {}

  const AttitudeState& update(const ImuSample& s) {
    attitude_step(state_, s, config_);
    return state_;
  }

  const AttitudeState& state() const { return state_; }
  const AttitudeConfig& config() const { return config_; }

 private:
  AttitudeConfig config_;
  AttitudeState state_;
};

}  // namespace navfuse
