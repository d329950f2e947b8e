#pragma once

#include <optional>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/position.hpp"

namespace navfuse {

// Where the position blend takes its GPS reference from. Live streams use
// the most recent fix as received; replays interpolate between fixes.
enum class ReferenceMode { kLatestFix, kInterpolated };

struct FusionConfig {
  AttitudeConfig attitude;
  NavConfig nav;
  BlendWeights weights;
  ReferenceMode reference = ReferenceMode::kLatestFix;
};

struct FusedSample {
  double t = 0.0;
  Quaternion q;
  EulerAngles euler;
  bool nav_valid = false;
  geo::GeoPoint pos;
  VelocityNE vel;
};

// Orientation and position pipelines driven by one merged sample stream.
class FusionPipeline {
 public:
  explicit FusionPipeline(const FusionConfig& config);

  // Interpolated mode needs the whole fix track up front.
  void set_reference_track(std::vector<GpsFix> fixes);

  void push_fix(const GpsFix& fix);
  FusedSample push_imu(const ImuSample& s);

  const AttitudeState& attitude() const { return attitude_; }
  const NavState& nav() const { return nav_; }
  const FusionConfig& config() const { return config_; }

 private:
  std::optional<geo::GeoPoint> reference_at(double t) const;

  FusionConfig config_;
  AttitudeState attitude_;
  NavState nav_;
  std::vector<GpsFix> track_;
};

}  // namespace navfuse
