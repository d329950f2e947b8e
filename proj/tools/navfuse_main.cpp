#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "navfuse/cli.hpp"
#include "navfuse/error.hpp"

using navfuse::cli::RunConfig;

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  RunConfig config;

  // Config file first so that flags override it.
  if (const char* path = std::getenv("NAVFUSE_CONFIG"); path && *path) {
    std::ifstream f(path);
    if (!f) {
      std::cerr << "error: cannot read config " << path << '\n';
      return navfuse::cli::kExitInput;
    }
    std::stringstream text;
    text << f.rdbuf();
    try {
      navfuse::cli::apply_config_json(config, text.str());
    } catch (const navfuse::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return navfuse::cli::kExitInput;
    }
  }

  CLI::App app{"IMU + GPS fusion: live, record, replay and synthetic studies"};
  std::string mode;
  std::string grid;
  std::uint64_t seed = 0;
  std::uint64_t from_ms = 0;
  std::uint64_t to_ms = 0;
  auto& nav = config.fusion.nav;
  auto& att = config.fusion.attitude;

  app.add_option("--mode", mode, "live | record | replay | simulate | sweep | filter-compare");
  app.add_option("--input", config.input, "frame stream (live, record) or recording CSV (replay)");
  app.add_option("--output", config.output, "output file; standard output by default");
  app.add_option("--recording", config.recording, "record: CSV recording destination");
  app.add_option("--truth", config.truth, "simulate: truth track destination");
  app.add_option("--frames", config.frames, "simulate: binary frame stream destination");
  app.add_option("--alpha", config.fusion.weights.alpha, "velocity weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--beta", config.fusion.weights.beta, "position weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--gamma-rp", att.gains.gamma_rp, "roll/pitch gyro weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--gamma-yaw", att.gains.gamma_yaw, "yaw gyro weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--cutoff-hz", nav.accel_cutoff_hz, "position accel low-pass cutoff");
  app.add_option("--accel-lp-hz", att.accel_lp_hz, "attitude accel low-pass cutoff");
  app.add_option("--gyro-hp-hz", att.gyro_hp_hz, "roll/pitch gyro high-pass cutoff, 0 disables");
  app.add_option("--earth-radius", nav.earth.radius_m, "sphere radius in meters");
  app.add_flag("--lon-scale-correction", nav.lon_scale_correction, "divide longitude steps by cos(lat)");
  auto* seed_opt = app.add_option("--seed", seed, "synthetic flight seed");
  auto* from_opt = app.add_option("--from-ms", from_ms, "replay window start, inclusive");
  auto* to_opt = app.add_option("--to-ms", to_ms, "replay window end, exclusive");
  auto* grid_opt = app.add_option("--grid", grid, "sweep values for alpha and beta, e.g. 0.1,0.5,0.9");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : navfuse::cli::kExitInput;
  }

  if (!mode.empty()) {
    const auto m = navfuse::cli::parse_mode(mode);
    if (!m) {
      std::cerr << "error: unknown mode '" << mode << "'\n";
      return navfuse::cli::kExitInput;
    }
    config.mode = *m;
  }
  if (*seed_opt) config.profile.seed = seed;
  if (*from_opt) config.from_ms = from_ms;
  if (*to_opt) config.to_ms = to_ms;
  if (*grid_opt) {
    try {
      config.grid = navfuse::cli::parse_grid(grid);
    } catch (const navfuse::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return navfuse::cli::kExitInput;
    }
  }

  try {
    return navfuse::cli::run(config, std::cin, std::cout, std::cerr);
  } catch (const navfuse::Error& e) {
    std::cerr << "error: " << navfuse::to_string(e.code()) << ": " << e.what() << '\n';
    return navfuse::cli::kExitInput;
  }
}
