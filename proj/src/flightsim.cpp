#include "navfuse/flightsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "navfuse/error.hpp"

namespace navfuse::sim {

namespace {

constexpr std::uint64_t kGpsStream = 0x9E3779B97F4A7C15ULL;

struct Kinematics {
  double v = 0.0;      // horizontal ground speed
  double v_dot = 0.0;
  double c = 0.0;      // climb rate
  double c_dot = 0.0;
  double psi = 0.0;    // yaw, counter-clockwise from north
  double psi_dot = 0.0;
};

// Piecewise flight plan with closed-form speed, climb and heading.
class Plan {
 public:
  explicit Plan(const FlightProfile& p) : ramp_(p.ramp_s) {
    double t0 = 0.0;
    double v0 = p.start_speed_mps;
    double c0 = 0.0;
    double psi0 = wrap_pi(-p.start_course_rad);
    for (const auto& seg : p.segments) {
      Leg leg{seg, t0, v0, c0, psi0};
      legs_.push_back(leg);
      const Kinematics end = eval(leg, seg.duration_s);
      t0 += seg.duration_s;
      v0 = end.v;
      c0 = end.c;
      psi0 = end.psi;
    }
    // Level cruise after the last segment.
    Segment tail;
    tail.duration_s = 1e300;
    legs_.push_back({tail, t0, v0, c0, psi0});
  }

  Kinematics at(double t) const {
    auto it = std::upper_bound(legs_.begin(), legs_.end(), t,
                               [](double value, const Leg& l) { return value < l.t0; });
    const Leg& leg = it == legs_.begin() ? legs_.front() : *(it - 1);
    return eval(leg, t - leg.t0);
  }

 private:
  struct Leg {
    Segment seg;
    double t0;
    double v0;
    double c0;
    double psi0;
  };

  Kinematics eval(const Leg& leg, double tau) const {
    const double ramp = std::min(ramp_, leg.seg.duration_s);
    const double v1 = leg.seg.speed_mps >= 0.0 ? leg.seg.speed_mps : leg.v0;
    const double c1 = leg.seg.kind == SegmentKind::kClimb ? leg.seg.climb_rate_mps : 0.0;
    const double r = leg.seg.kind == SegmentKind::kTurn ? leg.seg.turn_rate_rad_s : 0.0;
    Kinematics k;
    if (ramp > 0.0 && tau < ramp) {
      const double u = tau / ramp;
      k.v = leg.v0 + (v1 - leg.v0) * u;
      k.v_dot = (v1 - leg.v0) / ramp;
      k.c = leg.c0 + (c1 - leg.c0) * u;
      k.c_dot = (c1 - leg.c0) / ramp;
    } else {
      k.v = v1;
      k.c = c1;
    }
    k.psi = leg.psi0 + r * tau;
    k.psi_dot = r;
    return k;
  }

  double ramp_;
  std::vector<Leg> legs_;
};

struct Position {
  double lat;  // degrees
  double lon;
  double alt;
};

Position derivative(const Position& p, const Kinematics& k, double radius) {
  const double to_deg = 180.0 / kPi;
  const double v_north = k.v * std::cos(k.psi);
  const double v_east = -k.v * std::sin(k.psi);
  const double cos_lat = std::cos(p.lat / to_deg);
  return {v_north / radius * to_deg, v_east / (radius * cos_lat) * to_deg, k.c};
}

Position rk4(const Plan& plan, const Position& p, double t, double h, double radius) {
  auto add = [](const Position& a, const Position& d, double s) {
    return Position{a.lat + d.lat * s, a.lon + d.lon * s, a.alt + d.alt * s};
  };
  const Position k1 = derivative(p, plan.at(t), radius);
  const Position k2 = derivative(add(p, k1, h / 2), plan.at(t + h / 2), radius);
  const Position k3 = derivative(add(p, k2, h / 2), plan.at(t + h / 2), radius);
  const Position k4 = derivative(add(p, k3, h), plan.at(t + h), radius);
  return {p.lat + h / 6 * (k1.lat + 2 * k2.lat + 2 * k3.lat + k4.lat),
          p.lon + h / 6 * (k1.lon + 2 * k2.lon + 2 * k3.lon + k4.lon),
          p.alt + h / 6 * (k1.alt + 2 * k2.alt + 2 * k3.alt + k4.alt)};
}

double pitch_of(const Kinematics& k) { return -std::atan2(k.c, k.v); }

double pitch_rate_of(const Kinematics& k) {
  const double den = k.v * k.v + k.c * k.c;
  if (den <= 0.0) return 0.0;
  return -(k.v * k.c_dot - k.c * k.v_dot) / den;
}

double imu_time(std::size_t k, double rate) {
  return std::round(static_cast<double>(k) * 1000.0 / rate) / 1000.0;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidProfile, what);
}

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SegmentKind kind_from(const std::string& s) {
  if (s == "straight") return SegmentKind::kStraight;
  if (s == "turn") return SegmentKind::kTurn;
  if (s == "climb") return SegmentKind::kClimb;
  throw Error(ErrorCode::kInvalidProfile, "unknown segment kind '" + s + "'");
}

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::kTurn: return "turn";
    case SegmentKind::kClimb: return "climb";
    default: return "straight";
  }
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
}

Vec3 vec_from(const json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

void FlightProfile::validate() const {
  require(std::isfinite(duration_s) && duration_s > 0.0, "duration must be positive");
  require(std::isfinite(imu_rate_hz) && imu_rate_hz > 0.0, "IMU rate must be positive");
  require(std::isfinite(gps_rate_hz) && gps_rate_hz > 0.0, "GPS rate must be positive");
  require(!segments.empty(), "profile has no segments");
  require(start.valid(), "start position out of range");
  require(std::isfinite(start_speed_mps) && start_speed_mps > 0.0, "start speed must be positive");
  require(ramp_s >= 0.0, "ramp time must be non-negative");
  for (const auto& s : segments) {
    require(std::isfinite(s.duration_s) && s.duration_s > 0.0, "segment duration must be positive");
    require(std::isfinite(s.speed_mps) && s.speed_mps != 0.0, "segment speed must be non-zero");
    require(std::isfinite(s.turn_rate_rad_s) && std::isfinite(s.climb_rate_mps),
            "segment rates must be finite");
  }
}

void SensorNoiseModel::validate() const {
  for (double s : {accel_sigma, gyro_sigma, mag_sigma, gps_sigma_m, gps_speed_sigma,
                   gps_course_sigma_rad}) {
    require(std::isfinite(s) && s >= 0.0, "noise sigma must be non-negative");
  }
  require(accel_bias.finite() && gyro_bias.finite(), "biases must be finite");
  require(gps_dropout >= 0.0 && gps_dropout <= 1.0, "dropout probability must be in [0, 1]");
}

SyntheticFlight generate_flight(const FlightProfile& profile, const SensorNoiseModel& noise) {
  profile.validate();
  noise.validate();
  const Plan plan(profile);
  const double radius = profile.earth.radius_m;
  const double incl = profile.mag.inclination_rad;
  const Vec3 mag_world{profile.mag.strength_gauss * std::cos(incl), 0.0,
                       -profile.mag.strength_gauss * std::sin(incl)};

  std::mt19937_64 imu_rng(profile.seed);
  std::mt19937_64 gps_rng(profile.seed ^ kGpsStream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::normal_distribution<double> gps_gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto noisy = [&](const Vec3& v, double sigma, const Vec3& bias) {
    const double nx = gauss(imu_rng);
    const double ny = gauss(imu_rng);
    const double nz = gauss(imu_rng);
    return Vec3{v.x + bias.x + sigma * nx, v.y + bias.y + sigma * ny, v.z + bias.z + sigma * nz};
  };

  SyntheticFlight out;
  const auto n = static_cast<std::size_t>(std::floor(profile.duration_s * profile.imu_rate_hz)) + 1;
  out.truth.reserve(n);
  out.imu.reserve(n);

  Position pos{profile.start.lat, profile.start.lon, profile.start_alt_m};
  double next_fix_t = 0.0;
  std::size_t fix_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = imu_time(k, profile.imu_rate_hz);
    if (k > 0) {
      const double t_prev = imu_time(k - 1, profile.imu_rate_hz);
      const double h = (t - t_prev) / 10.0;
      for (int i = 0; i < 10; ++i) pos = rk4(plan, pos, t_prev + i * h, h, radius);
    }
    const Kinematics kin = plan.at(t);
    const double theta = pitch_of(kin);
    const EulerAngles e{0.0, theta, wrap_pi(kin.psi)};
    const Quaternion q = from_euler(e);

    TruthSample truth;
    truth.t = t;
    truth.pos = {pos.lat, geo::wrap_lon(pos.lon)};
    truth.alt_m = pos.alt;
    truth.vel = {kin.v * std::cos(kin.psi), -kin.v * std::sin(kin.psi)};
    truth.climb_mps = kin.c;
    truth.q = q;
    truth.euler = e;
    out.truth.push_back(truth);

    const Vec3 specific_force{kin.v_dot * std::cos(kin.psi) - kin.v * kin.psi_dot * std::sin(kin.psi),
                              kin.v_dot * std::sin(kin.psi) + kin.v * kin.psi_dot * std::cos(kin.psi),
                              kin.c_dot + kGravity};
    const Vec3 rates{-kin.psi_dot * std::sin(theta), pitch_rate_of(kin),
                     kin.psi_dot * std::cos(theta)};
    const Quaternion inv = q.conjugate();
    ImuSample s;
    s.t = t;
    s.accel = noisy(rotate_vector(inv, specific_force), noise.accel_sigma, noise.accel_bias);
    s.gyro = noisy(rates, noise.gyro_sigma, noise.gyro_bias);
    const Vec3 mag = noisy(rotate_vector(inv, mag_world), noise.mag_sigma, Vec3{});
    if (noise.mag_enabled) s.mag = mag;

    std::optional<GpsFix> fix;
    if (t + 1e-9 >= next_fix_t) {
      GpsFix f;
      f.t = t;
      const double en = noise.gps_sigma_m * gps_gauss(gps_rng);
      const double ee = noise.gps_sigma_m * gps_gauss(gps_rng);
      const double ea = noise.gps_sigma_m * 1.5 * gps_gauss(gps_rng);
      const double es = noise.gps_speed_sigma * gps_gauss(gps_rng);
      const double ec = noise.gps_course_sigma_rad * gps_gauss(gps_rng);
      const double drop = uniform(gps_rng);
      const double to_deg = 180.0 / kPi;
      f.pos = {std::clamp(truth.pos.lat + en / radius * to_deg, -90.0, 90.0),
               geo::wrap_lon(truth.pos.lon +
                             ee / (radius * std::cos(truth.pos.lat / to_deg)) * to_deg)};
      f.alt_m = pos.alt + ea;
      f.speed = std::max(0.0, kin.v + es);
      double course = std::fmod(-kin.psi + ec, 2.0 * kPi);
      if (course < 0.0) course += 2.0 * kPi;
      f.course = course;
      f.valid = fix_count == 0 || drop >= noise.gps_dropout;
      ++fix_count;
      next_fix_t = static_cast<double>(fix_count) / profile.gps_rate_hz;
      fix = f;
    }

    const auto row = recording::canonical_row(s, fix);
    out.imu.push_back(row.imu);
    if (fix) {
      if (row.gps) {
        out.gps.push_back(*row.gps);
      } else {
        GpsFix dropped = *fix;
        dropped.t = row.imu.t;
        out.gps.push_back(dropped);
      }
    }
  }
  return out;
}

recording::FlightRecording SyntheticFlight::to_recording() const {
  recording::FlightRecording rec;
  rec.metadata.emplace_back("source", "flightsim");
  std::size_t g = 0;
  for (const auto& s : imu) {
    std::optional<GpsFix> fix;
    while (g < gps.size() && gps[g].t <= s.t) {
      if (gps[g].t == s.t && gps[g].valid) fix = gps[g];
      ++g;
    }
    rec.rows.push_back(recording::canonical_row(s, fix));
  }
  return rec;
}

FlightProfile standard_profile() {
  FlightProfile p;
  const double half_turn = kPi / 45.0;
  p.segments = {
      {SegmentKind::kStraight, 40.0, 15.0, 0.0, 0.0},
      {SegmentKind::kTurn, 45.0, 15.0, half_turn, 0.0},
      {SegmentKind::kStraight, 15.0, 15.0, 0.0, 0.0},
      {SegmentKind::kClimb, 15.0, 15.0, 0.0, 2.0},
      {SegmentKind::kStraight, 15.0, 15.0, 0.0, 0.0},
      {SegmentKind::kTurn, 45.0, 15.0, half_turn, 0.0},
      {SegmentKind::kStraight, 14.0, 15.0, 0.0, 0.0},
      {SegmentKind::kClimb, 15.0, 15.0, 0.0, -2.0},
      {SegmentKind::kStraight, 14.0, 15.0, 0.0, 0.0},
  };
  p.mag.inclination_rad = -10.0 * kPi / 180.0;
  return p;
}

SensorNoiseModel default_noise() { return {}; }

SensorNoiseModel zero_noise() {
  SensorNoiseModel n;
  n.accel_sigma = 0.0;
  n.gyro_sigma = 0.0;
  n.gyro_bias = {};
  n.mag_sigma = 0.0;
  n.gps_sigma_m = 0.0;
  n.gps_speed_sigma = 0.0;
  n.gps_course_sigma_rad = 0.0;
  n.gps_dropout = 0.0;
  return n;
}

FlightProfile profile_from_json(const std::string& text) {
  const json j = parse(text);
  FlightProfile p = standard_profile();
  try {
    read(j, "duration_s", p.duration_s);
    read(j, "imu_rate_hz", p.imu_rate_hz);
    read(j, "gps_rate_hz", p.gps_rate_hz);
    read(j, "seed", p.seed);
    read(j, "start_speed_mps", p.start_speed_mps);
    read(j, "ramp_s", p.ramp_s);
    read(j, "earth_radius_m", p.earth.radius_m);
    if (j.contains("start_course_deg")) p.start_course_rad = j["start_course_deg"].get<double>() / kDegPerRad;
    if (j.contains("start")) {
      const json& s = j["start"];
      read(s, "lat", p.start.lat);
      read(s, "lon", p.start.lon);
      read(s, "alt_m", p.start_alt_m);
    }
    if (j.contains("mag")) {
      const json& m = j["mag"];
      read(m, "strength_gauss", p.mag.strength_gauss);
      if (m.contains("inclination_deg")) p.mag.inclination_rad = m["inclination_deg"].get<double>() / kDegPerRad;
    }
    if (j.contains("segments")) {
      p.segments.clear();
      for (const json& s : j["segments"]) {
        Segment seg;
        seg.kind = kind_from(s.value("kind", std::string("straight")));
        read(s, "duration_s", seg.duration_s);
        read(s, "speed_mps", seg.speed_mps);
        read(s, "climb_rate_mps", seg.climb_rate_mps);
        if (s.contains("turn_rate_deg_s")) seg.turn_rate_rad_s = s["turn_rate_deg_s"].get<double>() / kDegPerRad;
        p.segments.push_back(seg);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidProfile, std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

SensorNoiseModel noise_from_json(const std::string& text) {
  const json doc = parse(text);
  SensorNoiseModel n = default_noise();
  if (!doc.contains("noise")) return n;
  const json& j = doc["noise"];
  try {
    read(j, "accel_sigma", n.accel_sigma);
    read(j, "gyro_sigma", n.gyro_sigma);
    read(j, "mag_sigma", n.mag_sigma);
    read(j, "mag_enabled", n.mag_enabled);
    read(j, "gps_sigma_m", n.gps_sigma_m);
    read(j, "gps_speed_sigma", n.gps_speed_sigma);
    read(j, "gps_dropout", n.gps_dropout);
    if (j.contains("accel_bias")) n.accel_bias = vec_from(j["accel_bias"]);
    if (j.contains("gyro_bias")) n.gyro_bias = vec_from(j["gyro_bias"]);
    if (j.contains("gps_course_sigma_deg")) n.gps_course_sigma_rad = j["gps_course_sigma_deg"].get<double>() / kDegPerRad;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidProfile, std::string("noise: ") + e.what());
  }
  n.validate();
  return n;
}

std::string to_json(const FlightProfile& p, const SensorNoiseModel& n) {
  json segs = json::array();
  for (const auto& s : p.segments) {
    segs.push_back({{"kind", kind_name(s.kind)},
                    {"duration_s", s.duration_s},
                    {"speed_mps", s.speed_mps},
                    {"turn_rate_deg_s", s.turn_rate_rad_s * kDegPerRad},
                    {"climb_rate_mps", s.climb_rate_mps}});
  }
  const json j = {
      {"duration_s", p.duration_s},
      {"imu_rate_hz", p.imu_rate_hz},
      {"gps_rate_hz", p.gps_rate_hz},
      {"seed", p.seed},
      {"start", {{"lat", p.start.lat}, {"lon", p.start.lon}, {"alt_m", p.start_alt_m}}},
      {"start_course_deg", p.start_course_rad * kDegPerRad},
      {"start_speed_mps", p.start_speed_mps},
      {"ramp_s", p.ramp_s},
      {"earth_radius_m", p.earth.radius_m},
      {"mag", {{"strength_gauss", p.mag.strength_gauss},
               {"inclination_deg", p.mag.inclination_rad * kDegPerRad}}},
      {"segments", segs},
      {"noise",
       {{"accel_sigma", n.accel_sigma},
        {"accel_bias", {n.accel_bias.x, n.accel_bias.y, n.accel_bias.z}},
        {"gyro_sigma", n.gyro_sigma},
        {"gyro_bias", {n.gyro_bias.x, n.gyro_bias.y, n.gyro_bias.z}},
        {"mag_sigma", n.mag_sigma},
        {"mag_enabled", n.mag_enabled},
        {"gps_sigma_m", n.gps_sigma_m},
        {"gps_speed_sigma", n.gps_speed_sigma},
        {"gps_course_sigma_deg", n.gps_course_sigma_rad * kDegPerRad},
        {"gps_dropout", n.gps_dropout}}},
  };
  return j.dump(2);
}

TrackError rms_error(std::span<const TrackPoint> estimate, std::span<const TruthSample> truth,
                     const geo::EarthModel& earth, double max_dt) {
  const double m_per_deg = kPi * earth.radius_m / 180.0;
  double sum_lat = 0.0;
  double sum_lon = 0.0;
  std::size_t count = 0;
  for (const auto& tr : truth) {
    auto it = std::lower_bound(estimate.begin(), estimate.end(), tr.t,
                               [](const TrackPoint& p, double t) { return p.t < t; });
    const TrackPoint* best = nullptr;
    if (it != estimate.end()) best = &*it;
    if (it != estimate.begin()) {
      const TrackPoint* prev = &*(it - 1);
      if (!best || tr.t - prev->t < best->t - tr.t) best = prev;
    }
    if (!best || std::abs(best->t - tr.t) > max_dt + 1e-9) continue;
    const double dlat = (best->pos.lat - tr.pos.lat) * m_per_deg;
    const double dlon =
        geo::wrap_lon(best->pos.lon - tr.pos.lon) * m_per_deg * std::cos(tr.pos.lat * kPi / 180.0);
    sum_lat += dlat * dlat;
    sum_lon += dlon * dlon;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kAlignment, "estimate and truth do not overlap in time");
  const double n = static_cast<double>(count);
  return {std::sqrt(sum_lat / n), std::sqrt(sum_lon / n), std::sqrt((sum_lat + sum_lon) / n)};
}

std::vector<TrackPoint> nav_track(std::span<const FusedSample> fused) {
  std::vector<TrackPoint> track;
  track.reserve(fused.size());
  for (const auto& f : fused) {
    if (f.nav_valid) track.push_back({f.t, f.pos});
  }
  return track;
}

std::vector<FusedSample> replay(const recording::FlightRecording& rec, FusionConfig config) {
  config.reference = ReferenceMode::kInterpolated;
  FusionPipeline pipeline(config);
  pipeline.set_reference_track(recording::fixes_of(rec));
  std::vector<FusedSample> out;
  out.reserve(rec.rows.size());
  for (const auto& row : rec.rows) {
    if (row.gps) pipeline.push_fix(*row.gps);
    out.push_back(pipeline.push_imu(row.imu));
  }
  return out;
}

std::vector<SweepCell> sweep_weights(const SyntheticFlight& flight, std::span<const double> alphas,
                                     std::span<const double> betas, const FusionConfig& base) {
  if (alphas.empty() || betas.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sweep grid");
  for (double v : alphas) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha outside [0, 1]");
  }
  for (double v : betas) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "beta outside [0, 1]");
  }
  const auto rec = flight.to_recording();
  const double max_dt = 1.0 / base.nav.sample_rate_hz;

  std::vector<SweepCell> cells;
  for (double a : alphas) {
    for (double b : betas) cells.push_back({a, b, {}});
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      FusionConfig config = base;
      config.weights = {cells[i].alpha, cells[i].beta};
      const auto fused = replay(rec, config);
      const auto track = nav_track(fused);
      cells[i].error = rms_error(track, flight.truth, base.nav.earth, max_dt);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(cells.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::jthread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  return cells;
}

std::vector<TrackPoint> sample_and_hold(const SyntheticFlight& flight) {
  std::vector<TrackPoint> track;
  std::optional<geo::GeoPoint> held;
  std::size_t g = 0;
  for (const auto& s : flight.imu) {
    while (g < flight.gps.size() && flight.gps[g].t <= s.t) {
      if (flight.gps[g].valid) held = flight.gps[g].pos;
      ++g;
    }
    if (held) track.push_back({s.t, *held});
  }
  return track;
}

std::vector<YawDriftRow> yaw_drift(const SyntheticFlight& flight, const AttitudeConfig& config) {
  std::vector<YawDriftRow> rows;
  if (flight.imu.empty()) return rows;
  AttitudeEstimator fused(config);
  Quaternion gyro_q = flight.truth.front().q;
  for (std::size_t k = 0; k < flight.imu.size(); ++k) {
    const ImuSample& s = flight.imu[k];
    fused.update(s);
    if (k > 0) {
      const double dt = s.t - flight.imu[k - 1].t;
      const double rate = s.gyro.norm();
      if (rate > 0.0) gyro_q = normalize(gyro_q * from_axis_angle((1.0 / rate) * s.gyro, rate * dt));
    }
    rows.push_back({s.t, flight.truth[k].euler.yaw, to_euler(gyro_q).yaw, fused.state().euler.yaw});
  }
  return rows;
}

}  // namespace navfuse::sim
