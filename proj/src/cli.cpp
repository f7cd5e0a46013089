#include "lielio/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lielio/errors.hpp"

namespace lielio {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

double num_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

void read_num(const json& j, const std::string& key, double& out, const std::string& where) {
  if (j.contains(key)) out = num_at(j, key, where);
}

template <typename Int>
void read_int(const json& j, const std::string& key, Int& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.get<long long>() < 0) throw ConfigError(where + "." + key + ": must be non-negative");
  }
  out = v.get<Int>();
}

void read_bool(const json& j, const std::string& key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  out = v.get<bool>();
}

template <int N>
void read_vec(const json& j, const std::string& key, Eigen::Matrix<double, N, 1>& out,
              const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
    throw ConfigError(where + "." + key + ": expected an array of " + std::to_string(N) + " numbers");
  }
  for (int i = 0; i < N; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) {
      throw ConfigError(where + "." + key + ": expected numbers");
    }
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
}

void read_noise(const json& j, ImuNoiseParams& p, const std::string& where) {
  check_keys(j, {"sigma_gyro", "sigma_acc", "sigma_bg_walk", "sigma_ba_walk", "gravity"}, where);
  read_num(j, "sigma_gyro", p.sigma_gyro, where);
  read_num(j, "sigma_acc", p.sigma_acc, where);
  read_num(j, "sigma_bg_walk", p.sigma_bg_walk, where);
  read_num(j, "sigma_ba_walk", p.sigma_ba_walk, where);
  read_vec(j, "gravity", p.gravity, where);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void read_profile(const json& j, TwistProfile& p, const std::string& where) {
  check_keys(j,
             {"preset", "lin_offset", "lin_amp", "lin_freq", "lin_phase", "ang_offset", "ang_amp",
              "ang_freq", "ang_phase"},
             where);
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError(where + ".preset: expected a string");
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "aggressive") {
      p = TwistProfile::aggressive();
    } else if (preset == "standard") {
      p = TwistProfile::standard();
    } else if (preset == "constant") {
      p = TwistProfile::constant(Twist6::Zero());
    } else if (preset == "sinusoidal") {
      p = TwistProfile{};
    } else {
      throw ConfigError(where + ".preset: unknown preset '" + preset + "'");
    }
  }
  read_vec(j, "lin_offset", p.lin_offset, where);
  read_vec(j, "lin_amp", p.lin_amp, where);
  read_vec(j, "lin_freq", p.lin_freq, where);
  read_vec(j, "lin_phase", p.lin_phase, where);
  read_vec(j, "ang_offset", p.ang_offset, where);
  read_vec(j, "ang_amp", p.ang_amp, where);
  read_vec(j, "ang_freq", p.ang_freq, where);
  read_vec(j, "ang_phase", p.ang_phase, where);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig cfg;
  cfg.filter.imu_noise = cfg.synthetic.imu_truth;
  if (json_text.empty()) return cfg;

  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root,
             {"seed", "profile", "imu_noise", "filter", "map", "extrinsic", "world", "lidar", "fig2",
              "fig3", "synthetic", "input", "output"},
             "config");

  read_int(root, "seed", cfg.seed, "config");

  if (root.contains("profile")) {
    // One profile drives fig3 and the synthetic runs; fig2 keeps its own
    // unless given under fig2.profile.
    TwistProfile p = cfg.synthetic.profile;
    read_profile(root["profile"], p, "profile");
    cfg.synthetic.profile = p;
    cfg.fig3.profile = p;
  }

  if (root.contains("imu_noise")) {
    ImuNoiseParams n = cfg.filter.imu_noise;
    read_noise(root["imu_noise"], n, "imu_noise");
    cfg.filter.imu_noise = n;
    cfg.fig3.noise = n;
    cfg.synthetic.imu_truth = n;
  }

  if (root.contains("filter")) {
    const json& f = root["filter"];
    const std::string w = "filter";
    check_keys(f,
               {"max_update_iters", "convergence_eps", "gate_chi2", "with_cross_terms",
                "with_se3_propagation", "with_uamc", "interpolate_poses", "reset_covariance",
                "p0_diag"},
               w);
    read_int(f, "max_update_iters", cfg.filter.max_update_iters, w);
    read_num(f, "convergence_eps", cfg.filter.convergence_eps, w);
    if (f.contains("gate_chi2") && f.at("gate_chi2").is_null()) {
      cfg.filter.gate_chi2 = std::numeric_limits<double>::infinity();
    } else {
      read_num(f, "gate_chi2", cfg.filter.gate_chi2, w);
    }
    read_bool(f, "with_cross_terms", cfg.filter.with_cross_terms, w);
    read_bool(f, "with_se3_propagation", cfg.filter.with_se3_propagation, w);
    read_bool(f, "with_uamc", cfg.filter.with_uamc, w);
    read_bool(f, "interpolate_poses", cfg.filter.interpolate_poses, w);
    read_bool(f, "reset_covariance", cfg.filter.reset_covariance, w);
    read_vec(f, "p0_diag", cfg.p0_diag, w);
    require((cfg.p0_diag.array() > 0).all(), "filter.p0_diag: entries must be positive");
  }

  if (root.contains("map")) {
    const json& m = root["map"];
    check_keys(m, {"voxel_size", "min_points", "max_plane_mse", "max_match_distance"}, "map");
    read_num(m, "voxel_size", cfg.filter.map.voxel_size, "map");
    read_int(m, "min_points", cfg.filter.map.min_points, "map");
    read_num(m, "max_plane_mse", cfg.filter.map.max_plane_mse, "map");
    read_num(m, "max_match_distance", cfg.filter.map.max_match_distance, "map");
  }

  if (root.contains("extrinsic")) {
    const json& e = root["extrinsic"];
    check_keys(e, {"translation", "rotation_vector"}, "extrinsic");
    Vec3 t = Vec3::Zero(), r = Vec3::Zero();
    read_vec(e, "translation", t, "extrinsic");
    read_vec(e, "rotation_vector", r, "extrinsic");
    cfg.filter.ext.T_imu_lidar = Pose3(so3_exp(r), t);
  }

  if (root.contains("world")) {
    const json& w = root["world"];
    check_keys(w, {"half_x", "half_y", "z_lo", "z_hi", "chamfer"}, "world");
    double hx = WorldModel::kDefaultHalfX, hy = WorldModel::kDefaultHalfY;
    double zl = WorldModel::kDefaultZLo, zh = WorldModel::kDefaultZHi;
    double ch = WorldModel::kDefaultChamfer;
    read_num(w, "half_x", hx, "world");
    read_num(w, "half_y", hy, "world");
    read_num(w, "z_lo", zl, "world");
    read_num(w, "z_hi", zh, "world");
    read_num(w, "chamfer", ch, "world");
    require(hx > 0 && hy > 0 && zh > zl, "world: empty room");
    require(ch >= 0 && ch < std::min(hx, hy), "world.chamfer: must lie in [0, min(half_x, half_y))");
    cfg.synthetic.world = WorldModel::room(Vec3(hx, hy, 0.0), zl, zh, ch);
  }

  if (root.contains("lidar")) {
    const json& l = root["lidar"];
    LidarModel& m = cfg.synthetic.lidar;
    check_keys(l, {"scan_period", "points_per_scan", "channels", "elev_min", "elev_max", "raw_sigma"},
               "lidar");
    read_num(l, "scan_period", m.scan_period, "lidar");
    read_int(l, "points_per_scan", m.points_per_scan, "lidar");
    read_int(l, "channels", m.channels, "lidar");
    read_num(l, "elev_min", m.elev_min, "lidar");
    read_num(l, "elev_max", m.elev_max, "lidar");
    read_num(l, "raw_sigma", m.raw_sigma, "lidar");
  }

  if (root.contains("fig2")) {
    const json& f = root["fig2"];
    check_keys(f, {"dt", "n_steps", "dt_gt", "profile", "synthesis"}, "fig2");
    read_num(f, "dt", cfg.fig2.dt, "fig2");
    read_int(f, "n_steps", cfg.fig2.n_steps, "fig2");
    read_num(f, "dt_gt", cfg.fig2.dt_gt, "fig2");
    if (f.contains("profile")) read_profile(f["profile"], cfg.fig2.profile, "fig2.profile");
    if (f.contains("synthesis")) {
      if (!f["synthesis"].is_string()) throw ConfigError("fig2.synthesis: expected a string");
      cfg.fig2.synthesis = imu_synthesis_from_string(f["synthesis"].get<std::string>());
    }
    require(cfg.fig2.dt > 0, "fig2.dt: must be positive");
    require(cfg.fig2.n_steps >= 1, "fig2.n_steps: must be at least 1");
    require(cfg.fig2.dt_gt > 0 && cfg.fig2.dt_gt <= 1e-3, "fig2.dt_gt: must lie in (0, 1e-3]");
  }

  if (root.contains("fig3")) {
    const json& f = root["fig3"];
    check_keys(f, {"dt", "n_inputs", "n_trials", "report_every", "p0_diag", "dt_gt"}, "fig3");
    read_num(f, "dt", cfg.fig3.dt, "fig3");
    read_int(f, "n_inputs", cfg.fig3.n_inputs, "fig3");
    read_int(f, "n_trials", cfg.fig3.n_trials, "fig3");
    read_int(f, "report_every", cfg.fig3.report_every, "fig3");
    read_vec(f, "p0_diag", cfg.fig3.p0_diag, "fig3");
    read_num(f, "dt_gt", cfg.fig3.dt_gt, "fig3");
    require(cfg.fig3.dt_gt > 0 && cfg.fig3.dt_gt <= 1e-3, "fig3.dt_gt: must lie in (0, 1e-3]");
  }

  if (root.contains("synthetic")) {
    const json& s = root["synthetic"];
    check_keys(s, {"imu_rate", "duration", "dt_gt", "imu_noise"}, "synthetic");
    read_num(s, "imu_rate", cfg.synthetic.imu_rate, "synthetic");
    read_num(s, "duration", cfg.synthetic.duration, "synthetic");
    read_num(s, "dt_gt", cfg.synthetic.dt_gt, "synthetic");
    if (s.contains("imu_noise")) read_noise(s["imu_noise"], cfg.synthetic.imu_truth, "synthetic.imu_noise");
    require(cfg.synthetic.dt_gt > 0 && cfg.synthetic.dt_gt <= 1e-3,
            "synthetic.dt_gt: must lie in (0, 1e-3]");
  }

  if (root.contains("input")) {
    const json& in = root["input"];
    check_keys(in, {"points_mode", "raw_sigma", "max_imu_gap"}, "input");
    if (in.contains("points_mode")) {
      if (!in.at("points_mode").is_string()) throw ConfigError("input.points_mode: expected a string");
      cfg.input.points_mode = points_mode_from_string(in.at("points_mode").get<std::string>());
    }
    read_num(in, "raw_sigma", cfg.input.raw_sigma, "input");
    read_num(in, "max_imu_gap", cfg.input.max_imu_gap, "input");
    require(cfg.input.raw_sigma > 0, "input.raw_sigma: must be positive");
    require(cfg.input.max_imu_gap >= 0, "input.max_imu_gap: must be non-negative");
  }

  if (root.contains("output")) {
    check_keys(root["output"], {"write_timing"}, "output");
    read_bool(root["output"], "write_timing", cfg.write_timing, "output");
  }

  cfg.fig3.seed = cfg.seed;
  cfg.filter.validate();
  cfg.fig3.validate();
  cfg.synthetic.validate();
  return cfg;
}

RunConfig load_run_config(const std::optional<std::string>& path) {
  if (!path) return parse_run_config("");
  std::ifstream f(*path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config '" + *path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  return parse_run_config(text.empty() ? std::string("{}") : text);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

fs::path prepare_out(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + out_dir + "': " + ec.message());
  return fs::path(out_dir);
}

struct SensorData {
  std::vector<std::vector<ImuSample>> imu_per_scan;
  std::vector<std::vector<RawPoint>> scans;
  NavState x0;
  double t0 = 0.0;
};

/// Splits a flat IMU stream into per-scan spans (t_{k-1}, t_k].
SensorData load_sensor_data(const RunConfig& cfg, const std::string& imu_path,
                            const std::string& points_path) {
  if (imu_path.empty()) throw ConfigError("--imu is required without --synthetic");
  if (points_path.empty()) throw ConfigError("--points is required without --synthetic");
  const auto imu = read_imu_csv(imu_path);
  if (imu.empty()) throw InputError("'" + imu_path + "' holds no IMU samples");
  SensorData d;
  d.scans = cfg.input.points_mode == PointsCsvMode::kScanColumn
                ? read_points_csv(points_path, cfg.input.raw_sigma)
                : read_points_dir(points_path, cfg.input.raw_sigma);
  d.t0 = imu.front().t;

  std::size_t next = 0;
  double t_prev = d.t0;
  for (std::size_t k = 0; k < d.scans.size(); ++k) {
    const auto& scan = d.scans[k];
    if (scan.empty()) throw InputError("scan " + std::to_string(k) + ": no points");
    double t_min = scan.front().t, t_max = scan.front().t;
    for (const RawPoint& p : scan) {
      t_min = std::min(t_min, p.t);
      t_max = std::max(t_max, p.t);
    }
    if (t_min < t_prev - kTimeTolerance || t_max <= t_prev) {
      throw InputError("scan " + std::to_string(k) + ": points before the previous scan end or IMU start");
    }
    std::vector<ImuSample> span;
    while (next < imu.size() && imu[next].t <= t_max + kTimeTolerance) span.push_back(imu[next++]);
    const double last = span.empty() ? (next > 0 ? imu[next - 1].t : d.t0) : span.back().t;
    if (t_max > last + cfg.input.max_imu_gap) {
      throw InputError("scan " + std::to_string(k) + ": scan end " + std::to_string(t_max) +
                       " outside the IMU span");
    }
    if (span.empty()) throw InputError("scan " + std::to_string(k) + ": empty IMU span");
    d.imu_per_scan.push_back(std::move(span));
    t_prev = t_max;
  }
  return d;
}

SensorData synthetic_sensor_data(const RunConfig& cfg, SyntheticDataset* keep) {
  SyntheticDataset ds = make_synthetic_dataset(cfg.synthetic, cfg.filter.ext, cfg.seed);
  SensorData d;
  d.imu_per_scan = ds.imu_per_scan;
  d.scans = ds.scans;
  d.x0 = ds.x0;
  d.t0 = ds.t0;
  if (keep) *keep = std::move(ds);
  return d;
}

std::string ablation_name(const FilterConfig& f) {
  if (!f.with_se3_propagation) return "baseline";
  return f.with_uamc ? "se3_uamc" : "se3";
}

}  // namespace

int cmd_fig2(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path out = prepare_out(out_dir);
  const auto rows = run_fig2_experiment(cfg.fig2);
  write_text_file((out / "fig2_errors.csv").string(), fig2_csv(rows));
  return kExitOk;
}

int cmd_fig3(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path out = prepare_out(out_dir);
  const McReport rep = run_fig3_experiment(cfg.fig3);
  write_text_file((out / "fig3_report.json").string(), fig3_json(rep));
  write_text_file((out / "fig3_covariances.csv").string(), fig3_lookback_csv(rep));
  write_text_file((out / "fig3_samples.csv").string(), fig3_samples_csv(rep));
  write_text_file((out / "fig3_trace.csv").string(), fig3_trace_csv(rep));
  return kExitOk;
}

int cmd_lio(const RunConfig& cfg, const std::string& out_dir, bool synthetic,
            const std::string& imu_path, const std::string& points_path) {
  SyntheticDataset ds;
  const SensorData d = synthetic ? synthetic_sensor_data(cfg, &ds)
                                 : load_sensor_data(cfg, imu_path, points_path);
  const fs::path out = prepare_out(out_dir);

  Filter filter(cfg.filter, d.t0, d.x0, cfg.p0_diag.asDiagonal());
  std::vector<ScanResult> results;
  for (std::size_t k = 0; k < d.scans.size(); ++k) {
    try {
      results.push_back(filter.process_scan(d.imu_per_scan[k], d.scans[k]));
    } catch (const InputError& e) {
      throw InputError("scan " + std::to_string(k) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw InputError("scan " + std::to_string(k) + ": " + e.what());
    }
  }

  write_trajectory_tum((out / "trajectory_tum.txt").string(), results);
  write_text_file((out / "scan_stats.csv").string(), scan_stats_csv(results));
  if (cfg.write_timing) write_text_file((out / "timing.csv").string(), timing_csv(results));

  json summary;
  summary["variant"] = ablation_name(cfg.filter);
  summary["n_scans"] = results.size();
  if (synthetic) {
    std::vector<TumRecord> gt;
    std::vector<Vec3> est, truth;
    for (const ScanResult& r : results) {
      gt.push_back({r.t, ds.gt.pose_at(r.t)});
      est.push_back(r.posterior.pose.trans());
      truth.push_back(gt.back().pose.trans());
    }
    write_trajectory_tum((out / "groundtruth_tum.txt").string(), gt);
    summary["ate_m"] = json::parse(fmt_num(absolute_trajectory_error(est, truth)));
  }
  write_text_file((out / "lio_summary.json").string(), summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_undistort(const RunConfig& cfg, const std::string& out_dir, bool synthetic,
                  const std::string& imu_path, const std::string& points_path) {
  const SensorData d = synthetic ? synthetic_sensor_data(cfg, nullptr)
                                 : load_sensor_data(cfg, imu_path, points_path);
  const fs::path out = prepare_out(out_dir);

  const PropagationModel model =
      cfg.filter.with_se3_propagation ? PropagationModel::kSe3 : PropagationModel::kBaseline;
  UamcOptions uo;
  uo.with_cross = cfg.filter.with_cross_terms;
  uo.with_relative_uncertainty = cfg.filter.with_uamc;
  uo.interpolate = cfg.filter.interpolate_poses;

  NavState x = d.x0;
  Mat15 P = cfg.p0_diag.asDiagonal();
  double t = d.t0;
  std::optional<ImuSample> held;
  std::vector<std::vector<ProbabilisticPoint>> all;
  for (std::size_t k = 0; k < d.scans.size(); ++k) {
    try {
      double t_k = t;
      for (const RawPoint& p : d.scans[k]) t_k = std::max(t_k, p.t);
      const auto window = scan_imu_window(d.imu_per_scan[k], held, t, t_k);
      PoseHistory hist(t, x, P);
      for (const auto& s : propagate_batch(x, P, window, t_k, cfg.filter.imu_noise, model)) {
        hist.advance(s);
      }
      all.push_back(undistort_scan(d.scans[k], hist, cfg.filter.ext, uo));
      x = hist.latest().state;
      P = hist.latest().P_marginal;
      t = t_k;
      held = d.imu_per_scan[k].back();
    } catch (const InputError& e) {
      throw InputError("scan " + std::to_string(k) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError("scan " + std::to_string(k) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw InputError("scan " + std::to_string(k) + ": " + e.what());
    }
  }
  write_text_file((out / "undistorted_points.csv").string(), probabilistic_points_csv(all));
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"LiDAR-inertial odometry with SE(3) propagation and uncertainty-aware deskewing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lielio 0.1.0");

  std::string config_path, out_dir = ".", imu_path, points_path;
  std::optional<std::uint64_t> seed;
  bool synthetic = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (created if missing)");
    sub->add_option("--seed", seed, "Random seed; overrides the config");
  };
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_flag("--synthetic", synthetic, "Generate inputs from the built-in simulator");
    sub->add_option("--imu", imu_path, "IMU CSV (t,gx,gy,gz,ax,ay,az)");
    sub->add_option("--points", points_path,
                    "Points CSV (t,x,y,z,scan) or a directory of scan_*.csv files");
  };

  CLI::App* fig2 = app.add_subcommand("fig2", "Propagation error of both models against ground truth");
  CLI::App* fig3 = app.add_subcommand("fig3", "Monte Carlo check of relative-pose covariances");
  CLI::App* und = app.add_subcommand("undistort", "Deskew scans and attach point covariances");
  CLI::App* lio = app.add_subcommand("lio", "Run the filter over a dataset");
  for (CLI::App* s : {fig2, fig3, und, lio}) add_common(s);
  add_inputs(und);
  add_inputs(lio);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    RunConfig cfg = load_run_config(config_path.empty() ? std::nullopt
                                                        : std::optional<std::string>(config_path));
    if (seed) {
      cfg.seed = *seed;
      cfg.fig3.seed = *seed;
    }
    if (synthetic && (!imu_path.empty() || !points_path.empty())) {
      throw ConfigError("--synthetic cannot be combined with --imu/--points");
    }
    if (*fig2) return cmd_fig2(cfg, out_dir);
    if (*fig3) return cmd_fig3(cfg, out_dir);
    if (*und) return cmd_undistort(cfg, out_dir, synthetic, imu_path, points_path);
    return cmd_lio(cfg, out_dir, synthetic, imu_path, points_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const OutOfChartError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace lielio
