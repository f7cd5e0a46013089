#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lielio/eskf.hpp"

namespace lielio {

enum class ProfileKind { kConstant, kSinusoidal, kAggressive };

/// Body twist xi(t) = (v(t), w(t)) with per-axis components
///   offset + amp * sin(2 pi freq t + phase).
struct TwistProfile {
  ProfileKind kind = ProfileKind::kSinusoidal;
  Vec3 lin_offset = Vec3::Zero();
  Vec3 lin_amp = Vec3::Zero();
  Vec3 lin_freq = Vec3::Zero();  // Hz
  Vec3 lin_phase = Vec3::Zero();  // rad
  Vec3 ang_offset = Vec3::Zero();
  Vec3 ang_amp = Vec3::Zero();
  Vec3 ang_freq = Vec3::Zero();
  Vec3 ang_phase = Vec3::Zero();

  Twist6 at(double t) const;
  Twist6 derivative(double t) const;

  static TwistProfile constant(const Twist6& xi);
  /// v = (2 sin 2pi t, 1.5 cos 4pi t, 0.5 sin 6pi t) m/s,
  /// w = (1.6 sin 3pi t, 1.2 cos 2pi t, 1.6 sin 5pi t) rad/s.
  static TwistProfile aggressive();
  /// v = (2 + 2 sin 1.4pi t, 1.2 sin 2.2pi t, 1.2 sin 2.6pi t) m/s,
  /// w = (2.4 sin 2.6pi t, 2.4 sin 1.8pi t, 0.8 + 2 sin 1.2pi t) rad/s.
  static TwistProfile standard();
};

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

/// One 4th-order Magnus step of dT/dt = T xi(t)^ from t to t + h.
Pose3 magnus_step(const TwistProfile& prof, const Pose3& T, double t, double h);

/// Dense ground truth sampled every dt from t0.
class GroundTruth {
 public:
  GroundTruth() = default;
  GroundTruth(TwistProfile prof, const Pose3& T0, double t0, double t_end, double dt);

  const TwistProfile& profile() const { return prof_; }
  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  double dt() const { return dt_; }
  std::size_t size() const { return poses_.size(); }
  const std::vector<Pose3>& poses() const { return poses_; }

  /// Pose at any t in [t0, t_end]: nearest earlier grid pose plus one partial
  /// Magnus step.
  Pose3 pose_at(double t) const;
  Vec3 vel_body_at(double t) const { return prof_.at(t).head<3>(); }
  Vec3 vel_world_at(double t) const;
  /// World-frame acceleration R (dv/dt + w x v).
  Vec3 acc_world_at(double t) const;

 private:
  TwistProfile prof_;
  double t0_ = 0.0, t_end_ = 0.0, dt_ = 1e-4;
  std::vector<Pose3> poses_;
};

/// Throws std::invalid_argument if dt_gt > 1e-3.
GroundTruth ground_truth_trajectory(const TwistProfile& prof, double t_end, double dt_gt,
                                    const Pose3& T0 = Pose3(), double t0 = 0.0);

struct SyntheticImu {
  std::vector<ImuSample> samples;
  /// Velocity the propagation should start from to be consistent with the
  /// samples: the mean body velocity over the first interval.
  Vec3 initial_vel_body = Vec3::Zero();
  std::vector<Vec3> bias_gyro;  // true biases per sample
  std::vector<Vec3> bias_acc;
};

enum class ImuSynthesis {
  /// Body twist of each interval from the log of the adjacent ground-truth
  /// poses, so a noiseless SE(3) propagation reproduces them exactly.
  kExactIncrement,
  /// Mean of the twist values at both interval ends.
  kTwistMean,
};

std::string to_string(ImuSynthesis s);
/// "exact_increment" or "twist_mean"; throws ConfigError otherwise.
ImuSynthesis imu_synthesis_from_string(const std::string& s);

/// Samples at t0 + i / rate for every interval [t_i, t_{i+2}] covered by the
/// ground truth. Gyro is the interval rotation rate; acc is chosen so that a
/// noiseless SE(3) propagation carries the interval body velocity of one
/// interval to the next. White noise has std density * sqrt(rate); biases
/// random-walk with std density / sqrt(rate) per sample.
SyntheticImu synthesize_imu(const GroundTruth& gt, const ImuNoiseParams& noise, double rate,
                            std::uint64_t seed,
                            ImuSynthesis scheme = ImuSynthesis::kExactIncrement);

struct Plane {
  Vec3 normal = Vec3::UnitZ();  // points into the free space
  double offset = 0.0;          // normal . x + offset = 0 on the plane
};

/// Convex room bounded by planes.
struct WorldModel {
  std::vector<Plane> planes;

  /// Range along unit `dir` from `origin` to the first plane. Throws
  /// std::runtime_error when the ray escapes.
  double ray_cast(const Vec3& origin, const Vec3& dir) const;
  bool contains(const Vec3& p, double margin = 0.0) const;

  /// Box [-half.x, half.x] x [-half.y, half.y] x [z_lo, z_hi] with the four
  /// vertical edges chamfered by `chamfer` metres.
  static WorldModel room(const Vec3& half_extent, double z_lo, double z_hi, double chamfer);
  /// Walls kept off the multiples of the default voxel size.
  static WorldModel default_room();
  static constexpr double kDefaultHalfX = 7.9, kDefaultHalfY = 5.85;
  static constexpr double kDefaultZLo = -1.85, kDefaultZHi = 3.9, kDefaultChamfer = 2.0;
};

struct LidarModel {
  double scan_period = 0.1;
  std::size_t points_per_scan = 3000;
  std::size_t channels = 16;
  double elev_min = -0.26;  // rad
  double elev_max = 0.26;
  double raw_sigma = 0.005;  // m, range noise
};

/// Points of one sweep over (t_start, t_start + period]; the last point is at
/// exactly t_start + period. Each point is in the sensor frame at its own
/// time.
std::vector<RawPoint> synthesize_scan(const GroundTruth& gt, const WorldModel& world,
                                      const ExtrinsicCalib& ext, const LidarModel& lidar,
                                      double t_start, std::uint64_t seed,
                                      std::uint64_t stream = 0);

/// Deterministic stream for (seed, stream index).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Propagation accuracy

struct Fig2Row {
  int step = 0;
  double t = 0.0;
  double se3_trans = 0.0, se3_rot = 0.0, se3_chordal = 0.0;
  double base_trans = 0.0, base_rot = 0.0, base_chordal = 0.0;
};

struct Fig2Params {
  TwistProfile profile = TwistProfile::aggressive();
  double dt = 1e-2;
  int n_steps = 10;
  double dt_gt = 1e-4;
  ImuSynthesis synthesis = ImuSynthesis::kExactIncrement;
};

std::vector<Fig2Row> run_fig2_experiment(const Fig2Params& p);

// ---------------------------------------------------------------------------
// Relative-pose covariance Monte Carlo

struct Fig3Params {
  TwistProfile profile = TwistProfile::standard();
  ImuNoiseParams noise;
  double dt = 1e-2;
  int n_inputs = 100;
  int n_trials = 1000;
  int report_every = 20;
  /// Diagonal of the initial covariance in error-state order.
  Vec15 p0_diag = Vec15::Constant(0.01 * 0.01);
  std::uint64_t seed = 1;
  double dt_gt = 1e-4;

  Fig3Params();
  void validate() const;
};

struct LookbackReport {
  int entry = 0;     // history index j of the target pose
  int lookback = 0;  // n_inputs - entry
  Cov6 cov_cross = Cov6::Zero();
  Cov6 cov_indep = Cov6::Zero();
  double nees_cross = 0.0;
  double nees_indep = 0.0;
  double coverage_cross = 0.0;  // fraction inside the predicted 95% region
  double coverage_indep = 0.0;
  double nees_ci_low = 0.0;
  double nees_ci_high = 0.0;
  std::vector<Twist6> errors;  // sampled relative-pose errors
};

struct McReport {
  int n_trials = 0;
  double nees_mean = 0.0;  // with cross terms, averaged over lookbacks
  double nees_ci_low = 0.0;
  double nees_ci_high = 0.0;
  double coverage_95 = 0.0;        // with cross terms, minimum over lookbacks
  double coverage_95_indep = 0.0;  // independence assumption, minimum over lookbacks
  std::vector<LookbackReport> lookbacks;
  /// trace of the cross-term relative covariance for every entry j = 0..n.
  std::vector<double> trace_cross;
};

McReport run_fig3_experiment(const Fig3Params& p);

/// chi-square(dof) quantile by the Wilson-Hilferty transform of a standard
/// normal quantile z.
double chi2_quantile_wh(double dof, double z);
/// 99% interval for the mean of n iid chi-square(dof) draws.
std::pair<double, double> chi2_mean_interval99(int dof, int n);
inline constexpr double kChi2_6_95 = 12.591587243743977;

// ---------------------------------------------------------------------------
// Synthetic LiDAR-inertial runs

struct SyntheticLioParams {
  TwistProfile profile = TwistProfile::standard();
  WorldModel world = WorldModel::default_room();
  LidarModel lidar;
  ImuNoiseParams imu_truth;  // noise injected into the measurements
  double imu_rate = 50.0;
  double duration = 10.0;
  double dt_gt = 1e-4;
  Pose3 start_pose;

  SyntheticLioParams();
  void validate() const;
};

struct SyntheticDataset {
  GroundTruth gt;
  SyntheticImu imu;
  std::vector<std::vector<RawPoint>> scans;
  std::vector<std::vector<ImuSample>> imu_per_scan;  // samples in (t_{k-1}, t_k]
  NavState x0;
  double t0 = 0.0;
};

SyntheticDataset make_synthetic_dataset(const SyntheticLioParams& p, const ExtrinsicCalib& ext,
                                        std::uint64_t seed);

/// Same dataset with a different ground truth trajectory (used by tests).
SyntheticDataset make_synthetic_dataset(const SyntheticLioParams& p, const ExtrinsicCalib& ext,
                                        std::uint64_t seed, GroundTruth gt);

struct LioRun {
  std::vector<ScanResult> results;
  std::vector<Pose3> truth;  // ground truth at each result time
  double ate = 0.0;
};

LioRun run_filter(const SyntheticDataset& data, const FilterConfig& cfg, const Mat15& P0);

/// RMSE of positions after the best rigid (no scale) alignment.
double absolute_trajectory_error(const std::vector<Vec3>& est, const std::vector<Vec3>& truth);

}  // namespace lielio
