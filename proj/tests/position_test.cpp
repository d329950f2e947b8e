#include "navfuse/position.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "navfuse/error.hpp"
#include "navfuse/fusion.hpp"

namespace navfuse {
namespace {

constexpr double kRe = 6371000.0;
constexpr double kMetersPerDeg = kPi * kRe / 180.0;

double meters_between(const geo::GeoPoint& a, const geo::GeoPoint& b) {
  return std::hypot((a.lat - b.lat) * kMetersPerDeg, (a.lon - b.lon) * kMetersPerDeg);
}

TEST(GravityCompensation, LevelAndRolled) {
  const Vec3 level = gravity_compensate({0, 0, kGravity}, Quaternion{});
  EXPECT_EQ(level, (Vec3{0, 0, 0}));
  const Quaternion rolled = from_euler({kPi / 2, 0, 0});
  const Vec3 r = gravity_compensate({0, kGravity, 0}, rolled);
  EXPECT_NEAR(r.x, 0.0, 1e-12);
  EXPECT_NEAR(r.y, 0.0, 1e-12);
  EXPECT_NEAR(r.z, 0.0, 1e-12);
}

TEST(GravityCompensation, RecoversWorldAcceleration) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> angle(-3.0, 3.0), acc(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const Quaternion q = normalize(from_euler({angle(gen), angle(gen) / 2.1, angle(gen)}));
    const Vec3 a_world{acc(gen), acc(gen), acc(gen)};
    const Vec3 body = rotate_vector(q.conjugate(), {a_world.x, a_world.y, a_world.z + kGravity});
    const Vec3 got = gravity_compensate(body, q);
    EXPECT_NEAR(got.x, a_world.x, 1e-9);
    EXPECT_NEAR(got.y, a_world.y, 1e-9);
    EXPECT_NEAR(got.z, a_world.z, 1e-9);
  }
}

TEST(VelocityStep, Examples) {
  const VelocityNE v{2.0, -1.0};
  const VelocityNE a{1.0, 0.5};
  const VelocityNE euler = velocity_step(v, a, 0.1, std::nullopt, {0.5, 0.5});
  EXPECT_EQ(euler, (VelocityNE{2.0 + 0.1, -1.0 + 0.05}));
  const VelocityNE full = velocity_step(v, a, 0.1, GpsVelocity{7.0, 1.0}, {1.0, 0.3});
  EXPECT_EQ(full, euler);

  const VelocityNE gps_only = velocity_step(v, a, 0.1, GpsVelocity{10.0, 0.0}, {0.0, 0.3});
  EXPECT_EQ(gps_only.north, 10.0);
  EXPECT_EQ(gps_only.east, 0.0);

  const VelocityNE half = velocity_step({2, 0}, {1, 0}, 0.1, GpsVelocity{4.0, 0.0}, {0.5, 0.5});
  EXPECT_NEAR(half.north, 3.05, 1e-15);
  EXPECT_EQ(half.east, 0.0);

  const VelocityNE east = velocity_step({}, {}, 0.1, GpsVelocity{3.0, kPi / 2}, {0.0, 0.0});
  EXPECT_NEAR(east.north, 0.0, 1e-15);
  EXPECT_NEAR(east.east, 3.0, 1e-15);
}

TEST(PositionStep, Examples) {
  const geo::EarthModel earth;
  const geo::GeoPoint prev{-7.79, 110.37};
  const geo::GeoPoint ref{-7.7901, 110.3702};
  EXPECT_EQ(position_step(prev, {15, -3}, 1.0 / 60, ref, {0.1, 0.0}, earth), ref);

  const geo::GeoPoint moved = position_step({0, 0}, {kMetersPerDeg, 0}, 1.0, std::nullopt, {0.1, 1.0}, earth);
  EXPECT_NEAR(moved.lat, 1.0, 1e-15);
  EXPECT_EQ(moved.lon, 0.0);

  const geo::GeoPoint blended =
      position_step({0.001000, 0}, {0, 0}, 1.0, geo::GeoPoint{0.001100, 0}, {0.1, 0.1}, earth);
  EXPECT_NEAR(blended.lat, 0.001090, 1e-15);
}

TEST(PositionStep, DeadReckoningWithoutReference) {
  const geo::EarthModel earth;
  const geo::GeoPoint p = position_step({10, 20}, {3, 4}, 0.5, std::nullopt, {0.1, 0.1}, earth);
  EXPECT_NEAR(p.lat, 10 + 1.5 / kMetersPerDeg, 1e-15);
  EXPECT_NEAR(p.lon, 20 + 2.0 / kMetersPerDeg, 1e-15);
}

TEST(PositionStep, LongitudeScaleCorrection) {
  const geo::EarthModel earth;
  const geo::GeoPoint start{60, 0};
  const geo::GeoPoint plain = position_step(start, {0, 100}, 1.0, std::nullopt, {1, 1}, earth, false);
  const geo::GeoPoint scaled = position_step(start, {0, 100}, 1.0, std::nullopt, {1, 1}, earth, true);
  EXPECT_NEAR(scaled.lon, 2.0 * plain.lon, 1e-12);
  // With the correction the step matches the true geodesic length.
  EXPECT_NEAR(geo::geodesic_distance(start, scaled), 100.0, 1e-3);
}

std::vector<GpsFix> track(std::initializer_list<std::pair<double, double>> t_lat) {
  std::vector<GpsFix> out;
  for (auto [t, lat] : t_lat) out.push_back({t, {lat, 2.0 * lat}, 1.0, std::nullopt, true, 0.0});
  return out;
}

TEST(Interpolation, ExactAtFixesAndMidpoint) {
  const auto fixes = track({{0.0, 0.0}, {10.0, 1.0}});
  EXPECT_EQ(interpolate_gps(fixes, 0.0), fixes[0].pos);
  EXPECT_EQ(interpolate_gps(fixes, 10.0), fixes[1].pos);
  EXPECT_NEAR(interpolate_gps(fixes, 5.0).lat, 0.5, 1e-15);
  EXPECT_NEAR(interpolate_gps(fixes, 5.0).lon, 1.0, 1e-15);
}

TEST(Interpolation, RandomTrackLinearAndContinuous) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> gap(0.2, 2.0), step(-1e-4, 1e-4);
  std::vector<GpsFix> fixes;
  double t = 0.0;
  geo::GeoPoint p{-7.8, 110.4};
  double max_rate = 0.0;
  for (int i = 0; i < 200; ++i) {
    fixes.push_back({t, p, 0.0, std::nullopt, true, 0.0});
    const double dt = gap(gen);
    const geo::GeoPoint next{p.lat + step(gen), p.lon + step(gen)};
    max_rate = std::max(max_rate, std::max(std::abs(next.lat - p.lat), std::abs(next.lon - p.lon)) / dt);
    p = next;
    t += dt;
  }
  for (const auto& f : fixes) EXPECT_EQ(interpolate_gps(fixes, f.t), f.pos);

  std::uniform_real_distribution<double> when(0.0, fixes.back().t - 0.001);
  for (int i = 0; i < 1000; ++i) {
    const double q = when(gen);
    const geo::GeoPoint a = interpolate_gps(fixes, q);
    const geo::GeoPoint b = interpolate_gps(fixes, q + 0.001);
    EXPECT_LE(std::abs(a.lat - b.lat), max_rate * 0.001 * (1 + 1e-9) + 1e-12);
    EXPECT_LE(std::abs(a.lon - b.lon), max_rate * 0.001 * (1 + 1e-9) + 1e-12);

    // Pointwise linearity inside the bracket.
    auto hi = std::upper_bound(fixes.begin(), fixes.end(), q, [](double v, const GpsFix& f) { return v < f.t; });
    const GpsFix& h = *hi;
    const GpsFix& l = *(hi - 1);
    const double u = (q - l.t) / (h.t - l.t);
    EXPECT_NEAR(a.lat, l.pos.lat + u * (h.pos.lat - l.pos.lat), 1e-12);
    EXPECT_NEAR(a.lon, l.pos.lon + u * (h.pos.lon - l.pos.lon), 1e-12);
  }
}

TEST(Interpolation, Errors) {
  auto fixes = track({{1.0, 0.0}, {2.0, 1.0}, {3.0, 2.0}});
  try {
    interpolate_gps(fixes, 3.5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
  EXPECT_THROW(interpolate_gps(fixes, 0.999), Error);
  fixes[1].valid = false;
  EXPECT_NEAR(interpolate_gps(fixes, 2.0).lat, 1.0, 1e-15);
  fixes[2].valid = false;
  try {
    interpolate_gps(fixes, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(GpsVelocityTerm, BearingFromDistinctFixesAndStaleness) {
  NavConfig config;
  NavState state = make_nav_state(config);
  EXPECT_FALSE(gps_velocity(state, 0.0, config));
  nav_observe_fix(state, {0.0, {0, 0}, 5.0, 0.3, true, 0});
  EXPECT_FALSE(gps_velocity(state, 0.5, config));
  // Same position: the bearing keeps the older distinct pair.
  nav_observe_fix(state, {1.0, {0, 0.001}, 5.0, 0.3, true, 0});
  nav_observe_fix(state, {2.0, {0, 0.001}, 6.0, 0.3, true, 0});
  auto v = gps_velocity(state, 2.0, config);
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->bearing, kPi / 2, 1e-9);
  EXPECT_EQ(v->speed, 6.0);
  EXPECT_TRUE(gps_velocity(state, 5.0, config));
  EXPECT_FALSE(gps_velocity(state, 5.001, config));
  // Invalid fixes are ignored.
  nav_observe_fix(state, {3.0, {45, 45}, 99.0, std::nullopt, false, 0});
  EXPECT_EQ(state.newest_fix->speed, 6.0);
  EXPECT_THROW(nav_observe_fix(state, {2.0, {0, 0.002}, 1.0, std::nullopt, true, 0}), Error);
}

TEST(GpsVelocityTerm, FirstFixSeedsState) {
  NavState state = make_nav_state({});
  nav_observe_fix(state, {0.0, {1, 2}, 10.0, kPi / 2, true, 0});
  EXPECT_TRUE(state.initialized);
  EXPECT_EQ(state.pos, (geo::GeoPoint{1, 2}));
  EXPECT_NEAR(state.vel.north, 0.0, 1e-12);
  EXPECT_NEAR(state.vel.east, 10.0, 1e-12);
}

TEST(NavConfig, CutoffDefault) {
  NavConfig c;
  EXPECT_EQ(c.effective_cutoff_hz(), 10.0);
  c.sample_rate_hz = 30.0;
  EXPECT_EQ(c.effective_cutoff_hz(), 5.0);
  c.accel_cutoff_hz = 2.0;
  EXPECT_EQ(c.effective_cutoff_hz(), 2.0);
}

TEST(NavStep, Ordering) {
  NavState state = make_nav_state({});
  nav_observe_fix(state, {0.0, {0, 0}, 0.0, std::nullopt, true, 0});
  nav_step(state, {1.0, {0, 0, kGravity}, {}, {}}, {}, std::nullopt, {}, {});
  try {
    nav_step(state, {1.0, {0, 0, kGravity}, {}, {}}, {}, std::nullopt, {}, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrdering);
  }
}

struct StaticRun {
  double max_fused_m = 0.0;
  std::vector<double> dr_error_m;  // one entry per second
  std::vector<double> fused_error_m;
};

// Level, stationary vehicle at the origin with a small accelerometer bias.
StaticRun run_static(double seconds, double accel_sigma, double accel_bias, std::uint64_t seed) {
  FusionConfig fused_cfg;
  FusionConfig dr_cfg;
  dr_cfg.weights = {1.0, 1.0};
  // Gyro-only tilt, so the accelerometer bias is not read as a lean.
  dr_cfg.attitude.gains.gamma_rp = 1.0;
  FusionPipeline fused(fused_cfg), dr(dr_cfg);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> an(0.0, accel_sigma), gn(0.0, 0.005), pn(0.0, 1e-6);
  StaticRun out;
  const geo::GeoPoint origin{0, 0};
  const int n = static_cast<int>(seconds * 60);
  for (int k = 0; k <= n; ++k) {
    const double t = k / 60.0;
    if (k % 60 == 0) {
      const GpsFix fix{t, {pn(gen), pn(gen)}, 0.0, std::nullopt, true, 0.0};
      fused.push_fix(fix);
      if (k == 0) dr.push_fix(fix);
    }
    const ImuSample s{t, {accel_bias + an(gen), an(gen), kGravity + an(gen)}, {gn(gen), gn(gen), gn(gen)},
                      Vec3{0.3, 0.0, -0.1}};
    const FusedSample f = fused.push_imu(s);
    const FusedSample d = dr.push_imu(s);
    const double fe = meters_between(f.pos, origin);
    out.max_fused_m = std::max(out.max_fused_m, fe);
    if (k % 60 == 0) {
      out.fused_error_m.push_back(fe);
      out.dr_error_m.push_back(meters_between(d.pos, origin));
    }
  }
  return out;
}

TEST(NavPipeline, StaticStaysNearOrigin) {
  const StaticRun r = run_static(60.0, 0.05, 0.0, 7);
  EXPECT_LT(r.max_fused_m, 0.5);
}

TEST(NavPipeline, GpsBoundsErrorWhileDeadReckoningGrowsSuperlinearly) {
  const StaticRun r = run_static(120.0, 0.05, 0.05, 8);
  const double early = *std::max_element(r.fused_error_m.begin(), r.fused_error_m.begin() + 61);
  const double late = *std::max_element(r.fused_error_m.begin() + 60, r.fused_error_m.end());
  EXPECT_LT(late, 1.0);
  EXPECT_LT(late, 2.0 * early + 0.1);
  // Constant bias: the drift should roughly quadruple when time doubles.
  EXPECT_GT(r.dr_error_m[120], 3.0 * r.dr_error_m[60]);
  EXPECT_GT(r.dr_error_m[120], 100.0 * late);
}

std::vector<ImuSample> cruise_imu(double seconds, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<ImuSample> out;
  for (int k = 0; k <= seconds * 60; ++k) {
    out.push_back({k / 60.0, {0.2 + n(gen), n(gen), kGravity + n(gen)}, {n(gen) * 0.1, n(gen) * 0.1, 0.01 + n(gen) * 0.1},
                   Vec3{0.3, 0.0, -0.1}});
  }
  return out;
}

std::vector<GpsFix> cruise_fixes(double seconds, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 2e-5);
  std::vector<GpsFix> out;
  for (int k = 0; k <= seconds; ++k) {
    out.push_back({static_cast<double>(k), {k * 1.3e-4 + n(gen), k * 0.4e-4 + n(gen)}, 15.0 + 50 * n(gen), 0.3, true, 0});
  }
  return out;
}

TEST(NavPipeline, ZeroWeightsReproduceGpsTrack) {
  const auto imu = cruise_imu(30, 1);
  const auto fixes = cruise_fixes(30, 2);
  FusionConfig cfg;
  cfg.weights = {0.0, 0.0};
  cfg.reference = ReferenceMode::kInterpolated;
  FusionPipeline p(cfg);
  p.set_reference_track(fixes);
  std::size_t next = 0;
  for (const auto& s : imu) {
    while (next < fixes.size() && fixes[next].t <= s.t) p.push_fix(fixes[next++]);
    const FusedSample f = p.push_imu(s);
    ASSERT_EQ(f.pos, interpolate_gps(fixes, s.t)) << "t=" << s.t;
  }
}

TEST(NavPipeline, UnitWeightsReproduceDeadReckoning) {
  const auto imu = cruise_imu(30, 3);
  const auto fixes = cruise_fixes(30, 4);
  FusionConfig cfg;
  cfg.weights = {1.0, 1.0};
  cfg.reference = ReferenceMode::kInterpolated;
  FusionPipeline p(cfg);
  p.set_reference_track(fixes);

  // Independent double integration driven by the same attitude stream.
  AttitudeEstimator att(cfg.attitude);
  std::array<dsp::BiquadFilter, 3> lp;
  for (auto& f : lp) f = dsp::BiquadFilter(dsp::design_butterworth2_lp(10.0, 60.0));
  double vn = fixes[0].speed * std::cos(0.3), ve = fixes[0].speed * std::sin(0.3);
  double lat = fixes[0].pos.lat, lon = fixes[0].pos.lon;

  std::size_t next = 0;
  for (std::size_t i = 0; i < imu.size(); ++i) {
    const ImuSample& s = imu[i];
    while (next < fixes.size() && fixes[next].t <= s.t) p.push_fix(fixes[next++]);
    const FusedSample f = p.push_imu(s);
    att.update(s);
    if (i == 0) {
      lp[0].prime(s.accel.x);
      lp[1].prime(s.accel.y);
      lp[2].prime(s.accel.z);
    }
    const Vec3 body{lp[0].step(s.accel.x), lp[1].step(s.accel.y), lp[2].step(s.accel.z)};
    if (i == 0) continue;
    const Vec3 w = rotate_vector(att.state().q, body);
    const double dt = s.t - imu[i - 1].t;
    vn += w.x * dt;
    ve += -w.y * dt;
    lat += vn * dt * 180.0 / (kPi * kRe);
    lon += ve * dt * 180.0 / (kPi * kRe);
    ASSERT_NEAR(f.pos.lat, lat, 1e-11);
    ASSERT_NEAR(f.pos.lon, lon, 1e-11);
    ASSERT_NEAR(f.vel.north, vn, 1e-9);
    ASSERT_NEAR(f.vel.east, ve, 1e-9);
  }
}

TEST(NavPipeline, TrapezoidOptionDiffersButAgreesClosely) {
  const auto imu = cruise_imu(10, 5);
  const auto fixes = cruise_fixes(10, 6);
  FusionConfig euler_cfg;
  FusionConfig trap_cfg;
  trap_cfg.nav.integration = Integration::kTrapezoid;
  FusionPipeline a(euler_cfg), b(trap_cfg);
  std::size_t next = 0;
  double worst = 0.0;
  for (const auto& s : imu) {
    while (next < fixes.size() && fixes[next].t <= s.t) {
      a.push_fix(fixes[next]);
      b.push_fix(fixes[next]);
      ++next;
    }
    worst = std::max(worst, meters_between(a.push_imu(s).pos, b.push_imu(s).pos));
  }
  EXPECT_GT(worst, 0.0);
  EXPECT_LT(worst, 1.0);
}

}  // namespace
}  // namespace navfuse
