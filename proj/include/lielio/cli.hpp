#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lielio/io.hpp"

namespace lielio {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitInput = 2, kExitNumerical = 3 };

struct InputOptions {
  PointsCsvMode points_mode = PointsCsvMode::kScanColumn;
  double raw_sigma = 0.02;    // m, isotropic point noise assigned to file input
  double max_imu_gap = 0.05;  // s, allowed gap between the last IMU sample and a scan end
};

/// Everything a command can be configured with. Each command reads the
/// sections it needs; unknown keys are rejected for all of them.
struct RunConfig {
  std::uint64_t seed = 1;
  FilterConfig filter;
  Vec15 p0_diag = Vec15::Constant(1e-6);
  Fig2Params fig2;
  Fig3Params fig3;
  SyntheticLioParams synthetic;
  InputOptions input;
  bool write_timing = false;
};

/// Defaults, then the JSON document at `path` (if any) applied on top.
/// Throws ConfigError.
RunConfig load_run_config(const std::optional<std::string>& path);
RunConfig parse_run_config(const std::string& json_text);

int cmd_fig2(const RunConfig& cfg, const std::string& out_dir);
int cmd_fig3(const RunConfig& cfg, const std::string& out_dir);
int cmd_lio(const RunConfig& cfg, const std::string& out_dir, bool synthetic,
            const std::string& imu_path, const std::string& points_path);
int cmd_undistort(const RunConfig& cfg, const std::string& out_dir, bool synthetic,
                  const std::string& imu_path, const std::string& points_path);

/// Full entry point: argument parsing, dispatch, and exception-to-exit-code
/// mapping.
int run_cli(int argc, char** argv);

}  // namespace lielio
