#include "navfuse/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "navfuse/error.hpp"
#include "navfuse/filters.hpp"

namespace navfuse::cli {

namespace {

std::uint64_t to_ms(double t) { return static_cast<std::uint64_t>(std::llround(t * 1000.0)); }

void report(std::ostream& err, const telemetry::Diagnostic& d) {
  err << "offset " << d.offset << ": " << to_string(d.code) << ": " << d.message << '\n';
}

void report(std::ostream& err, const Error& e) {
  err << "error: " << to_string(e.code());
  if (e.line()) err << " at line " << *e.line();
  if (e.offset()) err << " at offset " << *e.offset();
  err << ": " << e.what() << '\n';
}

bool is_std(const std::string& path) { return path.empty() || path == "-"; }

// Output sink that is either a file or a borrowed stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (is_std(path)) {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      stream_ = file_.get();
    }
  }
  bool ok() const { return static_cast<bool>(*stream_); }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string format_truth(const sim::TruthSample& s) {
  std::string line = std::to_string(to_ms(s.t));
  for (double v : {s.pos.lat, s.pos.lon, s.alt_m, s.vel.north, s.vel.east, s.q.w, s.q.x, s.q.y,
                   s.q.z, s.euler.roll * kDegPerRad, s.euler.pitch * kDegPerRad,
                   s.euler.yaw * kDegPerRad}) {
    line += ',';
    line += format_exact(v);
  }
  return line;
}

bool in_window(std::uint64_t ms, const RunConfig& config) {
  if (config.from_ms && ms < *config.from_ms) return false;
  if (config.to_ms && ms >= *config.to_ms) return false;
  return true;
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "live" || s == "fuse") return Mode::kLive;
  if (s == "record") return Mode::kRecord;
  if (s == "replay") return Mode::kReplay;
  if (s == "simulate") return Mode::kSimulate;
  if (s == "sweep") return Mode::kSweep;
  if (s == "filter-compare") return Mode::kFilterCompare;
  return std::nullopt;
}

void apply_config_json(RunConfig& config, const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  try {
    FusionConfig& f = config.fusion;
    if (j.contains("mode")) {
      const auto m = parse_mode(j["mode"].get<std::string>());
      if (!m) throw Error(ErrorCode::kParse, "config: unknown mode");
      config.mode = *m;
    }
    if (j.contains("alpha")) f.weights.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) f.weights.beta = j["beta"].get<double>();
    if (j.contains("gamma_rp")) f.attitude.gains.gamma_rp = j["gamma_rp"].get<double>();
    if (j.contains("gamma_yaw")) f.attitude.gains.gamma_yaw = j["gamma_yaw"].get<double>();
    if (j.contains("cutoff_hz")) f.nav.accel_cutoff_hz = j["cutoff_hz"].get<double>();
    if (j.contains("accel_lp_hz")) f.attitude.accel_lp_hz = j["accel_lp_hz"].get<double>();
    if (j.contains("gyro_hp_hz")) f.attitude.gyro_hp_hz = j["gyro_hp_hz"].get<double>();
    if (j.contains("sample_rate_hz")) {
      f.nav.sample_rate_hz = f.attitude.sample_rate_hz = j["sample_rate_hz"].get<double>();
    }
    if (j.contains("earth_radius_m")) f.nav.earth.radius_m = j["earth_radius_m"].get<double>();
    if (j.contains("lon_scale_correction")) {
      f.nav.lon_scale_correction = j["lon_scale_correction"].get<bool>();
    }
    if (j.contains("declination_deg")) {
      f.attitude.declination_rad = j["declination_deg"].get<double>() / kDegPerRad;
    }
    if (j.contains("input")) config.input = j["input"].get<std::string>();
    if (j.contains("output")) config.output = j["output"].get<std::string>();
    if (j.contains("recording")) config.recording = j["recording"].get<std::string>();
    if (j.contains("truth")) config.truth = j["truth"].get<std::string>();
    if (j.contains("frames")) config.frames = j["frames"].get<std::string>();
    if (j.contains("grid")) config.grid = parse_grid(j["grid"].get<std::string>());
    if (j.contains("profile")) {
      const std::string doc = j["profile"].dump();
      config.profile = sim::profile_from_json(doc);
      config.noise = sim::noise_from_json(doc);
    }
    if (j.contains("seed")) config.profile.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string_view cell(text.data() + start, comma - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "grid values must be numbers in [0, 1]");
    }
    grid.push_back(v);
    start = comma + 1;
  }
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty grid");
  return grid;
}

std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_fused(const FusedSample& s) {
  std::string line = std::to_string(to_ms(s.t));
  for (double v : {s.q.w, s.q.x, s.q.y, s.q.z, s.euler.roll * kDegPerRad,
                   s.euler.pitch * kDegPerRad, s.euler.yaw * kDegPerRad}) {
    line += ',';
    line += format_exact(v);
  }
  if (s.nav_valid) {
    for (double v : {s.pos.lat, s.pos.lon, s.vel.north, s.vel.east}) {
      line += ',';
      line += format_exact(v);
    }
  } else {
    line += ",,,,";
  }
  return line;
}

LiveStats fuse_stream(std::istream& in, const FusionConfig& config, std::ostream& fused_out,
                      std::ostream& diagnostics, recording::RecordingWriter* recorder) {
  LiveStats stats;
  FusionConfig live = config;
  live.reference = ReferenceMode::kLatestFix;
  FusionPipeline pipeline(live);
  telemetry::StreamScanner scanner;
  std::optional<GpsFix> pending_fix;
  std::optional<double> last_t;

  auto consume = [&](telemetry::ScanResult& chunk) {
    for (const auto& d : chunk.diagnostics) report(diagnostics, d);
    stats.diagnostics += chunk.diagnostics.size();
    stats.frames += chunk.frames.size();
    for (const auto& frame : chunk.frames) {
      if (frame.kind() == telemetry::FrameKind::kGps) {
        const GpsFix fix = telemetry::to_gps_fix(frame);
        if (fix.valid) pending_fix = fix;
        continue;
      }
      ++stats.imu_samples;
      auto row = recording::canonical_row(telemetry::to_imu_sample(frame), pending_fix);
      pending_fix.reset();
      if (last_t && !(row.imu.t > *last_t)) {
        diagnostics << "t_ms " << frame.t_ms << ": IMU sample out of order, dropped\n";
        ++stats.rejected;
        continue;
      }
      if (row.gps) {
        try {
          pipeline.push_fix(*row.gps);
        } catch (const Error& e) {
          report(diagnostics, e);
          ++stats.rejected;
          row.gps.reset();
        }
      }
      const FusedSample fused = pipeline.push_imu(row.imu);
      last_t = row.imu.t;
      if (recorder) recorder->write(row);
      fused_out << format_fused(fused) << '\n';
    }
    chunk.frames.clear();
    chunk.diagnostics.clear();
  };

  telemetry::ScanResult chunk;
  std::vector<std::uint8_t> buf(4096);
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    scanner.feed(std::span<const std::uint8_t>(buf.data(), got), chunk);
    consume(chunk);
    fused_out.flush();
  }
  scanner.finish(chunk);
  consume(chunk);
  return stats;
}

namespace {

int finish_live(const LiveStats& stats, std::ostream& out, std::ostream& err) {
  out.flush();
  if (!out) {
    err << "error: write to output failed\n";
    return kExitOutput;
  }
  if (stats.frames == 0) {
    err << "error: no valid frames in input\n";
    return kExitEmpty;
  }
  return kExitOk;
}

}  // namespace

int cmd_fuse(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  out << kFusedHeader << '\n';
  const LiveStats stats = fuse_stream(in, config.fusion, out, err);
  return finish_live(stats, out, err);
}

int cmd_record(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  if (config.recording.empty()) {
    err << "error: record mode needs --recording\n";
    return kExitInput;
  }
  std::ofstream rec_file(config.recording, std::ios::binary);
  if (!rec_file) {
    err << "error: cannot open " << config.recording << " for writing\n";
    return kExitOutput;
  }
  recording::RecordingWriter writer(rec_file, {{"source", "record"}});
  out << kFusedHeader << '\n';
  const LiveStats stats = fuse_stream(in, config.fusion, out, err, &writer);
  if (!rec_file) {
    err << "error: write to " << config.recording << " failed\n";
    return kExitOutput;
  }
  return finish_live(stats, out, err);
}

int cmd_replay(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  recording::FlightRecording rec;
  try {
    rec = recording::read_recording(in);
  } catch (const Error& e) {
    report(err, e);
    return kExitInput;
  }
  const bool windowed = config.from_ms || config.to_ms;
  if (rec.rows.empty() && !windowed) {
    err << "error: recording has no rows\n";
    return kExitEmpty;
  }
  std::erase_if(rec.rows, [&](const recording::RecordingRow& r) {
    return !in_window(to_ms(r.imu.t), config);
  });
  out << kFusedHeader << '\n';
  try {
    for (const auto& s : sim::replay(rec, config.fusion)) out << format_fused(s) << '\n';
  } catch (const Error& e) {
    report(err, e);
    return kExitInput;
  }
  out.flush();
  if (!out) {
    err << "error: write to output failed\n";
    return kExitOutput;
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  sim::SyntheticFlight flight;
  try {
    flight = sim::generate_flight(config.profile, config.noise);
  } catch (const Error& e) {
    report(err, e);
    return kExitInput;
  }
  auto rec = flight.to_recording();
  rec.metadata.emplace_back("seed", std::to_string(config.profile.seed));
  try {
    recording::write_recording(rec, out);
  } catch (const Error& e) {
    report(err, e);
    return kExitOutput;
  }
  out.flush();
  if (!out) {
    err << "error: write to output failed\n";
    return kExitOutput;
  }
  if (!config.truth.empty()) {
    std::ofstream truth(config.truth, std::ios::binary);
    truth << "t_ms,lat,lon,alt_m,v_north,v_east,qw,qx,qy,qz,roll_deg,pitch_deg,yaw_deg\n";
    for (const auto& s : flight.truth) truth << format_truth(s) << '\n';
    if (!truth) {
      err << "error: cannot write " << config.truth << '\n';
      return kExitOutput;
    }
  }
  if (!config.frames.empty()) {
    telemetry::FrameWriter writer;
    std::size_t g = 0;
    try {
      for (const auto& s : flight.imu) {
        while (g < flight.gps.size() && flight.gps[g].t <= s.t) writer.gps(flight.gps[g++]);
        writer.imu(s);
      }
    } catch (const Error& e) {
      report(err, e);
      return kExitInput;
    }
    std::ofstream frames(config.frames, std::ios::binary);
    const auto& bytes = writer.bytes();
    frames.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!frames) {
      err << "error: cannot write " << config.frames << '\n';
      return kExitOutput;
    }
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<sim::SweepCell> cells;
  try {
    if (config.grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty grid");
    const auto flight = sim::generate_flight(config.profile, config.noise);
    cells = sim::sweep_weights(flight, config.grid, config.grid, config.fusion);
  } catch (const Error& e) {
    report(err, e);
    return kExitInput;
  }
  out << "alpha,beta,lat_err_m,lon_err_m\n";
  for (const auto& c : cells) {
    out << format_exact(c.alpha) << ',' << format_exact(c.beta) << ',' << format_exact(c.error.lat_m)
        << ',' << format_exact(c.error.lon_m) << '\n';
  }
  out.flush();
  if (!out) {
    err << "error: write to output failed\n";
    return kExitOutput;
  }
  return kExitOk;
}

int cmd_filter_compare(const RunConfig& config, std::istream* in, std::ostream& out,
                       std::ostream& err) {
  std::vector<ImuSample> imu;
  try {
    if (in) {
      for (auto& row : recording::read_recording(*in).rows) imu.push_back(row.imu);
    } else {
      imu = sim::generate_flight(config.profile, config.noise).imu;
    }
  } catch (const Error& e) {
    report(err, e);
    return kExitInput;
  }
  if (imu.empty()) {
    err << "error: no samples\n";
    return kExitEmpty;
  }

  const NavConfig& nav = config.fusion.nav;
  NavConfig cheby_nav = nav;
  cheby_nav.prefilter = PreFilter::kChebyshev;
  NavConfig butter_nav = nav;
  butter_nav.prefilter = PreFilter::kButterworth;
  dsp::BiquadFilter bx(butter_nav.prefilter_coeffs()), by(butter_nav.prefilter_coeffs());
  dsp::BiquadFilter cx(cheby_nav.prefilter_coeffs()), cy(cheby_nav.prefilter_coeffs());
  bx.prime(imu.front().accel.x);
  by.prime(imu.front().accel.y);
  cx.prime(imu.front().accel.x);
  cy.prime(imu.front().accel.y);

  AttitudeEstimator fused(config.fusion.attitude);
  Quaternion gyro_q;
  out << "t_ms,ax_raw,ax_butterworth,ax_chebyshev,ay_raw,ay_butterworth,ay_chebyshev,"
         "yaw_gyro_deg,yaw_fused_deg\n";
  for (std::size_t k = 0; k < imu.size(); ++k) {
    const ImuSample& s = imu[k];
    try {
      fused.update(s);
    } catch (const Error& e) {
      report(err, e);
      return kExitInput;
    }
    if (k == 0) {
      gyro_q = fused.state().q;
    } else {
      const double rate = s.gyro.norm();
      const double dt = s.t - imu[k - 1].t;
      if (rate > 0.0) gyro_q = normalize(gyro_q * from_axis_angle((1.0 / rate) * s.gyro, rate * dt));
    }
    std::string line = std::to_string(to_ms(s.t));
    for (double v : {s.accel.x, bx.step(s.accel.x), cx.step(s.accel.x), s.accel.y, by.step(s.accel.y),
                     cy.step(s.accel.y), to_euler(gyro_q).yaw * kDegPerRad,
                     fused.state().euler.yaw * kDegPerRad}) {
      line += ',';
      line += format_exact(v);
    }
    out << line << '\n';
  }
  out.flush();
  if (!out) {
    err << "error: write to output failed\n";
    return kExitOutput;
  }
  return kExitOk;
}

int run(const RunConfig& config, std::istream& std_in, std::ostream& std_out, std::ostream& err) {
  std::unique_ptr<std::ifstream> in_file;
  std::istream* in = &std_in;
  const bool needs_input = config.mode == Mode::kLive || config.mode == Mode::kRecord ||
                           config.mode == Mode::kReplay ||
                           (config.mode == Mode::kFilterCompare && !config.input.empty());
  if (needs_input && !is_std(config.input)) {
    in_file = std::make_unique<std::ifstream>(config.input, std::ios::binary);
    if (!*in_file) {
      err << "error: cannot open " << config.input << '\n';
      return kExitInput;
    }
    in = in_file.get();
  }
  Sink sink(config.output, std_out);
  if (!sink.ok()) {
    err << "error: cannot open " << config.output << " for writing\n";
    return kExitOutput;
  }
  std::ostream& out = sink.get();

  switch (config.mode) {
    case Mode::kLive: return cmd_fuse(config, *in, out, err);
    case Mode::kRecord: return cmd_record(config, *in, out, err);
    case Mode::kReplay: return cmd_replay(config, *in, out, err);
    case Mode::kSimulate: return cmd_simulate(config, out, err);
    case Mode::kSweep: return cmd_sweep(config, out, err);
    case Mode::kFilterCompare:
      return cmd_filter_compare(config, config.input.empty() ? nullptr : in, out, err);
  }
  return kExitInput;
}

}  // namespace navfuse::cli
