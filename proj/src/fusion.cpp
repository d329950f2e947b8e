#include "navfuse/fusion.hpp"

#include <algorithm>

namespace navfuse {

FusionPipeline::FusionPipeline(const FusionConfig& config)
    : config_(config),
      attitude_(make_attitude_state(config.attitude)),
      nav_(make_nav_state(config.nav)) {}

void FusionPipeline::set_reference_track(std::vector<GpsFix> fixes) {
  std::erase_if(fixes, [](const GpsFix& f) { return !f.valid; });
  track_ = std::move(fixes);
}

void FusionPipeline::push_fix(const GpsFix& fix) { nav_observe_fix(nav_, fix); }

std::optional<geo::GeoPoint> FusionPipeline::reference_at(double t) const {
  if (config_.reference == ReferenceMode::kInterpolated) {
    if (track_.size() < 2 || t < track_.front().t || t > track_.back().t) return std::nullopt;
    return interpolate_gps(track_, t);
  }
  const auto& fix = nav_.newest_fix;
  if (!fix || t - fix->t > config_.nav.gps_stale_s) return std::nullopt;
  return fix->pos;
}

FusedSample FusionPipeline::push_imu(const ImuSample& s) {
  attitude_step(attitude_, s, config_.attitude);
  nav_step(nav_, s, attitude_.q, reference_at(s.t), config_.weights, config_.nav);
  FusedSample out;
  out.t = s.t;
  out.q = attitude_.q;
  out.euler = attitude_.euler;
  out.nav_valid = nav_.initialized;
  out.pos = nav_.pos;
  out.vel = nav_.vel;
  return out;
}

}  // namespace navfuse
