#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "navfuse/flightsim.hpp"
#include "navfuse/fusion.hpp"
#include "navfuse/recording.hpp"
#include "navfuse/telemetry.hpp"

namespace navfuse::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitEmpty = 3,
  kExitOutput = 4,
};

enum class Mode { kLive, kRecord, kReplay, kSimulate, kSweep, kFilterCompare };

std::optional<Mode> parse_mode(const std::string& s);

struct RunConfig {
  Mode mode = Mode::kLive;
  FusionConfig fusion;
  std::string input;      // "" or "-" is standard input
  std::string output;     // "" or "-" is standard output
  std::string recording;  // record: CSV destination
  std::string truth;      // simulate: truth CSV destination
  std::string frames;     // simulate: binary frame stream destination
  std::optional<std::uint64_t> from_ms;
  std::optional<std::uint64_t> to_ms;
  std::vector<double> grid{0.1, 0.5, 0.9};
  sim::FlightProfile profile = sim::standard_profile();
  sim::SensorNoiseModel noise = sim::default_noise();
};

// Sets every field present in a JSON config document. Throws kParse.
void apply_config_json(RunConfig& config, const std::string& text);

// "0.1,0.5,0.9". Throws kInvalidArgument for empty lists or values
// outside [0, 1].
std::vector<double> parse_grid(const std::string& text);

inline constexpr std::string_view kFusedHeader =
    "t_ms,qw,qx,qy,qz,roll_deg,pitch_deg,yaw_deg,lat,lon,v_north,v_east";

// Shortest decimal that reads back as the same double.
std::string format_exact(double v);
std::string format_fused(const FusedSample& s);

struct LiveStats {
  std::size_t frames = 0;
  std::size_t imu_samples = 0;
  std::size_t diagnostics = 0;
  std::size_t rejected = 0;  // samples or fixes the pipeline refused
};

// Live fusion of a frame byte stream read to its end. Each GPS fix is held
// and attached to the next IMU sample, exactly as a recording stores it.
// Rows go to fused_out and, when given, to recorder as they are produced.
LiveStats fuse_stream(std::istream& in, const FusionConfig& config, std::ostream& fused_out,
                      std::ostream& diagnostics, recording::RecordingWriter* recorder = nullptr);

int cmd_fuse(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_record(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_replay(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_filter_compare(const RunConfig& config, std::istream* in, std::ostream& out,
                       std::ostream& err);

// Opens input/output as configured and dispatches on mode.
int run(const RunConfig& config, std::istream& std_in, std::ostream& std_out, std::ostream& err);

}  // namespace navfuse::cli
