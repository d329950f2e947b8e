#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navfuse/fusion.hpp"
#include "navfuse/geodesy.hpp"
#include "navfuse/position.hpp"
#include "navfuse/recording.hpp"

namespace navfuse::sim {

enum class SegmentKind { kStraight, kTurn, kClimb };

// Speed and climb rate ramp linearly to their targets over the profile's
// ramp time at the start of each segment; turn rate applies for the whole
// segment. A negative speed keeps the previous one.
struct Segment {
  SegmentKind kind = SegmentKind::kStraight;
  double duration_s = 0.0;
  double speed_mps = -1.0;
  double turn_rate_rad_s = 0.0;  // counter-clockwise seen from above
  double climb_rate_mps = 0.0;   // only for kClimb; other segments fly level
};

struct MagneticField {
  double strength_gauss = 0.45;
  double inclination_rad = 0.0;  // positive dips below the horizon
};

struct FlightProfile {
  double duration_s = 218.0;
  double imu_rate_hz = 60.0;
  double gps_rate_hz = 1.0;
  std::uint64_t seed = 1;
  geo::GeoPoint start{-7.7956, 110.3695};
  double start_alt_m = 120.0;
  double start_course_rad = 0.0;  // clockwise from north
  double start_speed_mps = 15.0;
  double ramp_s = 2.0;
  std::vector<Segment> segments;
  MagneticField mag;
  geo::EarthModel earth;

  // Throws kInvalidProfile.
  void validate() const;
};

struct SensorNoiseModel {
  double accel_sigma = 0.05;
  Vec3 accel_bias;
  double gyro_sigma = 0.005;
  Vec3 gyro_bias{0.01, 0.01, 0.01};
  double mag_sigma = 0.002;
  bool mag_enabled = true;
  double gps_sigma_m = 2.5;
  double gps_speed_sigma = 0.1;
  double gps_course_sigma_rad = 0.02;
  double gps_dropout = 0.1;  // the first fix is always delivered

  // Throws kInvalidProfile.
  void validate() const;
};

struct TruthSample {
  double t = 0.0;
  geo::GeoPoint pos;
  double alt_m = 0.0;
  VelocityNE vel;
  double climb_mps = 0.0;
  Quaternion q;
  EulerAngles euler;
};

struct SyntheticFlight {
  std::vector<TruthSample> truth;  // one per IMU sample
  std::vector<ImuSample> imu;      // at recording precision
  std::vector<GpsFix> gps;         // includes dropped fixes with valid = false

  recording::FlightRecording to_recording() const;
};

SyntheticFlight generate_flight(const FlightProfile& profile, const SensorNoiseModel& noise);

// Racetrack of the default flight: two straights joined by 180 degree turns
// plus a climb and descent.
FlightProfile standard_profile();
SensorNoiseModel default_noise();
SensorNoiseModel zero_noise();

// Profile and noise from a JSON document; absent keys keep defaults.
FlightProfile profile_from_json(const std::string& text);
SensorNoiseModel noise_from_json(const std::string& text);
std::string to_json(const FlightProfile& profile, const SensorNoiseModel& noise);

struct TrackPoint {
  double t = 0.0;
  geo::GeoPoint pos;
};

struct TrackError {
  double lat_m = 0.0;
  double lon_m = 0.0;
  double total_m = 0.0;
};

// RMS of per-axis deviations in meters over truth samples that have an
// estimate within max_dt. Throws kAlignment if none do.
TrackError rms_error(std::span<const TrackPoint> estimate, std::span<const TruthSample> truth,
                     const geo::EarthModel& earth, double max_dt);

std::vector<TrackPoint> nav_track(std::span<const FusedSample> fused);

// Replay of a recording: GPS reference interpolated between its fixes.
std::vector<FusedSample> replay(const recording::FlightRecording& rec, FusionConfig config);

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  TrackError error;
};

// Replays the same canonical recording once per (alpha, beta) pair, in
// parallel; rows come back in grid order.
std::vector<SweepCell> sweep_weights(const SyntheticFlight& flight, std::span<const double> alphas,
                                     std::span<const double> betas, const FusionConfig& base);

// Sample-and-hold of the raw GPS fixes, one point per IMU sample.
std::vector<TrackPoint> sample_and_hold(const SyntheticFlight& flight);

struct YawDriftRow {
  double t = 0.0;
  double truth = 0.0;
  double gyro_only = 0.0;
  double fused = 0.0;
};

// Gyro-only yaw integrates raw z rate from the truth start heading; fused
// yaw comes from the attitude pipeline with the magnetometer.
std::vector<YawDriftRow> yaw_drift(const SyntheticFlight& flight, const AttitudeConfig& config);

}  // namespace navfuse::sim
