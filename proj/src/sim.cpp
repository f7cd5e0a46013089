#include "lielio/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

#include "lielio/errors.hpp"

namespace lielio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 sines(const Vec3& off, const Vec3& amp, const Vec3& freq, const Vec3& phase, double t) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) out(i) = off(i) + amp(i) * std::sin(kTwoPi * freq(i) * t + phase(i));
  return out;
}

Vec3 sines_dot(const Vec3& amp, const Vec3& freq, const Vec3& phase, double t) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    const double w = kTwoPi * freq(i);
    out(i) = amp(i) * w * std::cos(w * t + phase(i));
  }
  return out;
}

Vec3 gaussian3(std::mt19937_64& rng, std::normal_distribution<double>& n) {
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return {a, b, c};
}

}  // namespace

// ---------------------------------------------------------------------------
// Profiles

Twist6 TwistProfile::at(double t) const {
  return make_twist(sines(lin_offset, lin_amp, lin_freq, lin_phase, t),
                    sines(ang_offset, ang_amp, ang_freq, ang_phase, t));
}

Twist6 TwistProfile::derivative(double t) const {
  return make_twist(sines_dot(lin_amp, lin_freq, lin_phase, t),
                    sines_dot(ang_amp, ang_freq, ang_phase, t));
}

TwistProfile TwistProfile::constant(const Twist6& xi) {
  TwistProfile p;
  p.kind = ProfileKind::kConstant;
  p.lin_offset = xi.head<3>();
  p.ang_offset = xi.tail<3>();
  return p;
}

TwistProfile TwistProfile::aggressive() {
  const double h = std::numbers::pi / 2;
  TwistProfile p;
  p.kind = ProfileKind::kAggressive;
  p.lin_amp = Vec3(2.0, 1.5, 0.5);
  p.lin_freq = Vec3(1.0, 2.0, 3.0);
  p.lin_phase = Vec3(0.0, h, 0.0);
  p.ang_amp = Vec3(1.6, 1.2, 1.6);
  p.ang_freq = Vec3(1.5, 1.0, 2.5);
  p.ang_phase = Vec3(0.0, h, 0.0);
  return p;
}

TwistProfile TwistProfile::standard() {
  TwistProfile p;
  p.kind = ProfileKind::kSinusoidal;
  p.lin_offset = Vec3(2.0, 0.0, 0.0);
  p.lin_amp = Vec3(2.0, 1.2, 1.2);
  p.lin_freq = Vec3(0.7, 1.1, 1.3);
  p.ang_offset = Vec3(0.0, 0.0, 0.8);
  p.ang_amp = Vec3(2.4, 2.4, 2.0);
  p.ang_freq = Vec3(1.3, 0.9, 0.6);
  return p;
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::kConstant: return "constant";
    case ProfileKind::kSinusoidal: return "sinusoidal";
    case ProfileKind::kAggressive: return "aggressive";
  }
  return "sinusoidal";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "constant") return ProfileKind::kConstant;
  if (s == "sinusoidal") return ProfileKind::kSinusoidal;
  if (s == "aggressive") return ProfileKind::kAggressive;
  throw ConfigError("unknown profile kind '" + s + "'");
}

std::string to_string(ImuSynthesis s) {
  return s == ImuSynthesis::kTwistMean ? "twist_mean" : "exact_increment";
}

ImuSynthesis imu_synthesis_from_string(const std::string& s) {
  if (s == "exact_increment") return ImuSynthesis::kExactIncrement;
  if (s == "twist_mean") return ImuSynthesis::kTwistMean;
  throw ConfigError("unknown IMU synthesis '" + s + "'");
}

// ---------------------------------------------------------------------------
// Ground truth

Pose3 magnus_step(const TwistProfile& prof, const Pose3& T, double t, double h) {
  // Two-point Gauss-Legendre nodes; the commutator sign is for right
  // multiplication T' = T A.
  const double c = std::sqrt(3.0) / 6.0;
  const Twist6 a1 = prof.at(t + (0.5 - c) * h);
  const Twist6 a2 = prof.at(t + (0.5 + c) * h);
  const Twist6 omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (curly_wedge(a1) * a2);
  return T * se3_exp(omega);
}

GroundTruth::GroundTruth(TwistProfile prof, const Pose3& T0, double t0, double t_end, double dt)
    : prof_(std::move(prof)), t0_(t0), t_end_(t_end), dt_(dt) {
  if (!(dt > 0)) throw std::invalid_argument("GroundTruth: dt must be positive");
  if (!(t_end >= t0)) throw std::invalid_argument("GroundTruth: t_end before t0");
  const auto n = static_cast<std::size_t>(std::ceil((t_end - t0) / dt - 1e-9));
  poses_.reserve(n + 1);
  poses_.push_back(T0);
  for (std::size_t i = 0; i < n; ++i) {
    poses_.push_back(magnus_step(prof_, poses_.back(), t0 + static_cast<double>(i) * dt, dt));
  }
}

Pose3 GroundTruth::pose_at(double t) const {
  if (poses_.empty()) throw std::logic_error("GroundTruth::pose_at on empty trajectory");
  if (t < t0_ - 1e-9 || t > t_end_ + 1e-9) {
    throw std::out_of_range("GroundTruth::pose_at: t=" + std::to_string(t) + " outside [" +
                            std::to_string(t0_) + ", " + std::to_string(t_end_) + "]");
  }
  const double u = std::max(0.0, (t - t0_) / dt_);
  auto i = static_cast<std::size_t>(std::floor(u));
  i = std::min(i, poses_.size() - 1);
  const double ti = t0_ + static_cast<double>(i) * dt_;
  const double h = t - ti;
  if (h == 0.0) return poses_[i];
  return magnus_step(prof_, poses_[i], ti, h);
}

Vec3 GroundTruth::vel_world_at(double t) const { return pose_at(t).R() * vel_body_at(t); }

Vec3 GroundTruth::acc_world_at(double t) const {
  const Twist6 xi = prof_.at(t);
  const Twist6 dxi = prof_.derivative(t);
  const Vec3 v = xi.head<3>();
  const Vec3 w = xi.tail<3>();
  return pose_at(t).R() * (dxi.head<3>() + w.cross(v));
}

GroundTruth ground_truth_trajectory(const TwistProfile& prof, double t_end, double dt_gt,
                                    const Pose3& T0, double t0) {
  if (!(dt_gt > 0) || dt_gt > 1e-3) {
    throw std::invalid_argument("ground_truth_trajectory: dt_gt must lie in (0, 1e-3]");
  }
  return GroundTruth(prof, T0, t0, t_end, dt_gt);
}

// ---------------------------------------------------------------------------
// IMU

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

SyntheticImu synthesize_imu(const GroundTruth& gt, const ImuNoiseParams& noise, double rate,
                            std::uint64_t seed, ImuSynthesis scheme) {
  if (!(rate > 0)) throw std::invalid_argument("synthesize_imu: rate must be positive");
  noise.validate();
  const double dt = 1.0 / rate;
  if (dt < gt.dt() - 1e-15) {
    throw std::invalid_argument("synthesize_imu: rate exceeds the ground-truth density");
  }
  // The acc of sample i needs the twist of interval i + 1.
  const auto n_iv = static_cast<std::size_t>(std::floor((gt.t_end() - gt.t0()) * rate + 1e-9));
  const std::size_t n = n_iv > 0 ? n_iv - 1 : 0;
  const TwistProfile& prof = gt.profile();

  auto time_of = [&](std::size_t i) { return gt.t0() + static_cast<double>(i) * dt; };
  auto interval_twist = [&](std::size_t i) -> Twist6 {
    if (scheme == ImuSynthesis::kTwistMean) return 0.5 * (prof.at(time_of(i)) + prof.at(time_of(i + 1)));
    return se3_log(gt.pose_at(time_of(i)).inverse() * gt.pose_at(time_of(i + 1))) / dt;
  };

  SyntheticImu out;
  out.samples.reserve(n);
  out.bias_gyro.reserve(n);
  out.bias_acc.reserve(n);
  if (n == 0) return out;

  std::mt19937_64 rng = make_rng(seed, 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double sq_rate = std::sqrt(rate);
  Vec3 bg = Vec3::Zero(), ba = Vec3::Zero();

  Twist6 cur = interval_twist(0);
  out.initial_vel_body = cur.head<3>();
  for (std::size_t i = 0; i < n; ++i) {
    const Twist6 next = interval_twist(i + 1);
    const Vec3 w = cur.tail<3>();
    const Mat3 R = gt.pose_at(time_of(i)).R();
    const Vec3 v_next = so3_exp(Vec3(w * dt)).matrix() * next.head<3>();
    const Vec3 acc = (v_next - cur.head<3>()) / dt - R.transpose() * noise.gravity;

    const Vec3 ng = gaussian3(rng, nd);
    const Vec3 na = gaussian3(rng, nd);
    const Vec3 nbg = gaussian3(rng, nd);
    const Vec3 nba = gaussian3(rng, nd);

    ImuSample s;
    s.t = time_of(i);
    s.gyro = w + bg + noise.sigma_gyro * sq_rate * ng;
    s.acc = acc + ba + noise.sigma_acc * sq_rate * na;
    out.samples.push_back(s);
    out.bias_gyro.push_back(bg);
    out.bias_acc.push_back(ba);

    bg += noise.sigma_bg_walk / sq_rate * nbg;
    ba += noise.sigma_ba_walk / sq_rate * nba;
    cur = next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// World and LiDAR

double WorldModel::ray_cast(const Vec3& origin, const Vec3& dir) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Plane& pl : planes) {
    const double denom = pl.normal.dot(dir);
    if (denom >= -1e-12) continue;
    const double s = -(pl.normal.dot(origin) + pl.offset) / denom;
    if (s > 0 && s < best) best = s;
  }
  if (!std::isfinite(best)) throw std::runtime_error("ray_cast: ray escapes the world");
  return best;
}

bool WorldModel::contains(const Vec3& p, double margin) const {
  for (const Plane& pl : planes) {
    if (pl.normal.dot(p) + pl.offset <= margin) return false;
  }
  return true;
}

WorldModel WorldModel::room(const Vec3& half, double z_lo, double z_hi, double chamfer) {
  WorldModel w;
  w.planes.push_back({Vec3::UnitX(), half.x()});
  w.planes.push_back({-Vec3::UnitX(), half.x()});
  w.planes.push_back({Vec3::UnitY(), half.y()});
  w.planes.push_back({-Vec3::UnitY(), half.y()});
  w.planes.push_back({Vec3::UnitZ(), -z_lo});
  w.planes.push_back({-Vec3::UnitZ(), z_hi});
  if (chamfer > 0) {
    for (const double sx : {-1.0, 1.0}) {
      for (const double sy : {-1.0, 1.0}) {
        const Vec3 n = -Vec3(sx, sy, 0.0).normalized();
        const Vec3 p0(sx * (half.x() - chamfer), sy * half.y(), 0.0);
        w.planes.push_back({n, -n.dot(p0)});
      }
    }
  }
  return w;
}

WorldModel WorldModel::default_room() { return room(Vec3(kDefaultHalfX, kDefaultHalfY, 0.0), kDefaultZLo, kDefaultZHi, kDefaultChamfer); }

std::vector<RawPoint> synthesize_scan(const GroundTruth& gt, const WorldModel& world,
                                      const ExtrinsicCalib& ext, const LidarModel& lidar,
                                      double t_start, std::uint64_t seed, std::uint64_t stream) {
  if (lidar.points_per_scan == 0 || lidar.channels == 0) {
    throw std::invalid_argument("synthesize_scan: empty scan pattern");
  }
  const std::size_t n = lidar.points_per_scan;
  const std::size_t cols = (n + lidar.channels - 1) / lidar.channels;
  std::mt19937_64 rng = make_rng(seed, stream);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Mat3 sigma_raw = Mat3::Identity() * lidar.raw_sigma * lidar.raw_sigma;

  std::vector<RawPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = i / lidar.channels;
    const std::size_t ch = i % lidar.channels;
    const double az = -kTwoPi * static_cast<double>(col) / static_cast<double>(cols);
    const double el =
        lidar.channels > 1
            ? lidar.elev_min + (lidar.elev_max - lidar.elev_min) * static_cast<double>(ch) /
                                   static_cast<double>(lidar.channels - 1)
            : 0.5 * (lidar.elev_min + lidar.elev_max);
    const Vec3 u(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));

    RawPoint p;
    p.t = i + 1 == n ? t_start + lidar.scan_period
                     : t_start + lidar.scan_period * static_cast<double>(i + 1) /
                                     static_cast<double>(n);
    const Pose3 T_wl = gt.pose_at(p.t) * ext.T_imu_lidar;
    const double range = world.ray_cast(T_wl.trans(), T_wl.R() * u);
    p.xyz = (range + lidar.raw_sigma * nd(rng)) * u;
    p.sigma_raw = sigma_raw;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Propagation accuracy

std::vector<Fig2Row> run_fig2_experiment(const Fig2Params& p) {
  if (!(p.dt > 0) || p.n_steps < 1) throw ConfigError("fig2: dt and n_steps must be positive");
  const double t_end = p.dt * p.n_steps;
  const GroundTruth gt = ground_truth_trajectory(p.profile, t_end + p.dt, p.dt_gt);
  ImuNoiseParams quiet;
  const SyntheticImu imu = synthesize_imu(gt, quiet, 1.0 / p.dt, 0, p.synthesis);

  NavState se3;
  se3.pose = gt.pose_at(0.0);
  se3.vel_body = imu.initial_vel_body;
  NavState base = se3;

  std::vector<Fig2Row> rows;
  for (int k = 0; k < p.n_steps && k < static_cast<int>(imu.samples.size()); ++k) {
    const ImuSample& u = imu.samples[static_cast<std::size_t>(k)];
    se3 = propagate(PropagationModel::kSe3, se3, u, quiet, p.dt);
    base = propagate(PropagationModel::kBaseline, base, u, quiet, p.dt);
    const double t = p.dt * (k + 1);
    const Pose3 truth = gt.pose_at(t);

    Fig2Row r;
    r.step = k + 1;
    r.t = t;
    r.se3_trans = (se3.pose.trans() - truth.trans()).norm();
    r.se3_rot = so3_log(Rot3(se3.pose.R().transpose() * truth.R())).norm();
    r.se3_chordal = chordal_distance(se3.pose, truth);
    r.base_trans = (base.pose.trans() - truth.trans()).norm();
    r.base_rot = so3_log(Rot3(base.pose.R().transpose() * truth.R())).norm();
    r.base_chordal = chordal_distance(base.pose, truth);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Relative-pose covariance Monte Carlo

Fig3Params::Fig3Params() {
  noise.sigma_gyro = 5e-3;
  noise.sigma_acc = 2e-2;
  noise.sigma_bg_walk = 1e-4;
  noise.sigma_ba_walk = 1e-3;
}

void Fig3Params::validate() const {
  noise.validate();
  if (!(dt > 0)) throw ConfigError("fig3: dt must be positive");
  if (n_inputs < 1) throw ConfigError("fig3: n_inputs must be at least 1");
  if (n_trials < 100) throw ConfigError("fig3: n_trials must be at least 100");
  if (report_every < 1) throw ConfigError("fig3: report_every must be at least 1");
  if ((p0_diag.array() < 0).any()) throw ConfigError("fig3: p0 entries must be non-negative");
}

double chi2_quantile_wh(double dof, double z) {
  const double a = 2.0 / (9.0 * dof);
  const double c = 1.0 - a + z * std::sqrt(a);
  return dof * c * c * c;
}

std::pair<double, double> chi2_mean_interval99(int dof, int n) {
  constexpr double kZ995 = 2.5758293035489004;
  const double k = static_cast<double>(dof) * n;
  return {chi2_quantile_wh(k, -kZ995) / n, chi2_quantile_wh(k, kZ995) / n};
}

namespace {

double nees_of(const Twist6& e, const Cov6& cov, const Eigen::LDLT<Cov6>& ldlt) {
  if (cov.trace() == 0.0) return 0.0;
  return e.dot(ldlt.solve(e));
}

}  // namespace

McReport run_fig3_experiment(const Fig3Params& p) {
  p.validate();
  const double t_end = p.dt * p.n_inputs;
  const GroundTruth gt = ground_truth_trajectory(p.profile, t_end + p.dt, p.dt_gt);
  const SyntheticImu imu = synthesize_imu(gt, ImuNoiseParams{}, 1.0 / p.dt, 0);
  const std::span<const ImuSample> samples(imu.samples.data(),
                                           std::min<std::size_t>(imu.samples.size(),
                                                                 static_cast<std::size_t>(p.n_inputs)));

  NavState x0;
  x0.pose = gt.pose_at(0.0);
  x0.vel_body = imu.initial_vel_body;
  const Mat15 P0 = p.p0_diag.asDiagonal();
  const auto steps = propagate_batch(x0, P0, samples, t_end, p.noise, PropagationModel::kSe3);
  PoseHistory hist(0.0, x0, P0);
  for (const auto& s : steps) hist.advance(s);
  const std::size_t k = hist.size() - 1;

  McReport rep;
  rep.n_trials = p.n_trials;
  std::tie(rep.nees_ci_low, rep.nees_ci_high) = chi2_mean_interval99(6, p.n_trials);
  for (std::size_t j = 0; j <= k; ++j) rep.trace_cross.push_back(relative_cov(hist, j, true).cov.trace());

  std::vector<std::size_t> entries;
  for (std::size_t j = 0; j < k; j += static_cast<std::size_t>(p.report_every)) entries.push_back(j);

  std::vector<Eigen::LDLT<Cov6>> ldl_cross, ldl_indep;
  for (const std::size_t j : entries) {
    LookbackReport lb;
    lb.entry = static_cast<int>(j);
    lb.lookback = static_cast<int>(k - j);
    lb.cov_cross = relative_cov(hist, j, true).cov;
    lb.cov_indep = relative_cov(hist, j, false).cov;
    lb.nees_ci_low = rep.nees_ci_low;
    lb.nees_ci_high = rep.nees_ci_high;
    ldl_cross.emplace_back(lb.cov_cross);
    ldl_indep.emplace_back(lb.cov_indep);
    rep.lookbacks.push_back(std::move(lb));
  }

  const Vec15 p0_sd = p.p0_diag.cwiseSqrt();
  std::vector<Pose3> truth(k + 1);
  for (int trial = 0; trial < p.n_trials; ++trial) {
    std::mt19937_64 rng = make_rng(p.seed, static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec15 e0;
    for (int i = 0; i < 15; ++i) e0(i) = p0_sd(i) * nd(rng);
    NavState x = boxplus(x0, e0);
    truth[0] = x.pose;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Vec12 sd = discrete_process_noise(p.noise, steps[i].dt).diagonal().cwiseSqrt();
      ProcessNoise w;
      for (int c = 0; c < 12; ++c) w(c) = sd(c) * nd(rng);
      x = propagate_se3(x, samples[i], p.noise, steps[i].dt, w);
      truth[i + 1] = x.pose;
    }
    for (std::size_t l = 0; l < entries.size(); ++l) {
      const std::size_t j = entries[l];
      const Pose3 rel_nom = hist[k].pose().inverse() * hist[j].pose();
      const Pose3 rel_true = truth[k].inverse() * truth[j];
      const Twist6 e = se3_log(rel_nom.inverse() * rel_true);
      LookbackReport& lb = rep.lookbacks[l];
      const double nc = nees_of(e, lb.cov_cross, ldl_cross[l]);
      const double ni = nees_of(e, lb.cov_indep, ldl_indep[l]);
      lb.nees_cross += nc;
      lb.nees_indep += ni;
      lb.coverage_cross += nc <= kChi2_6_95 ? 1.0 : 0.0;
      lb.coverage_indep += ni <= kChi2_6_95 ? 1.0 : 0.0;
      lb.errors.push_back(e);
    }
  }

  rep.coverage_95 = 1.0;
  rep.coverage_95_indep = 1.0;
  for (LookbackReport& lb : rep.lookbacks) {
    const double n = static_cast<double>(p.n_trials);
    lb.nees_cross /= n;
    lb.nees_indep /= n;
    lb.coverage_cross /= n;
    lb.coverage_indep /= n;
    rep.nees_mean += lb.nees_cross;
    rep.coverage_95 = std::min(rep.coverage_95, lb.coverage_cross);
    rep.coverage_95_indep = std::min(rep.coverage_95_indep, lb.coverage_indep);
  }
  if (!rep.lookbacks.empty()) rep.nees_mean /= static_cast<double>(rep.lookbacks.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Synthetic LiDAR-inertial runs

SyntheticLioParams::SyntheticLioParams() {
  imu_truth.sigma_gyro = 1e-2;
  imu_truth.sigma_acc = 5e-2;
  imu_truth.sigma_bg_walk = 1e-4;
  imu_truth.sigma_ba_walk = 1e-3;
}

void SyntheticLioParams::validate() const {
  imu_truth.validate();
  if (!(imu_rate > 0)) throw ConfigError("imu_rate must be positive");
  if (!(duration > 0)) throw ConfigError("duration must be positive");
  if (!(lidar.scan_period > 0)) throw ConfigError("scan_period must be positive");
  if (lidar.points_per_scan == 0) throw ConfigError("points_per_scan must be positive");
  if (lidar.channels == 0) throw ConfigError("channels must be positive");
  if (!(lidar.raw_sigma >= 0)) throw ConfigError("raw_sigma must be non-negative");
  if (lidar.scan_period * imu_rate < 1.0) throw ConfigError("fewer than one IMU sample per scan");
  if (world.planes.size() < 4) throw ConfigError("world needs at least four planes");
}

SyntheticDataset make_synthetic_dataset(const SyntheticLioParams& p, const ExtrinsicCalib& ext,
                                        std::uint64_t seed) {
  p.validate();
  return make_synthetic_dataset(
      p, ext, seed,
      ground_truth_trajectory(p.profile, p.duration + 1.0 / p.imu_rate, p.dt_gt, p.start_pose));
}

SyntheticDataset make_synthetic_dataset(const SyntheticLioParams& p, const ExtrinsicCalib& ext,
                                        std::uint64_t seed, GroundTruth gt) {
  p.validate();
  for (std::size_t i = 0; i < gt.size(); i += 100) {
    if (!p.world.contains((gt.poses()[i] * ext.T_imu_lidar).trans(), 0.5)) {
      throw ConfigError("synthetic trajectory leaves the world at t=" +
                        std::to_string(gt.t0() + static_cast<double>(i) * gt.dt()));
    }
  }

  SyntheticDataset d;
  d.t0 = gt.t0();
  d.imu = synthesize_imu(gt, p.imu_truth, p.imu_rate, seed);
  d.x0.pose = gt.pose_at(d.t0);
  d.x0.vel_body = d.imu.initial_vel_body;

  const auto n_scans = static_cast<std::size_t>(std::floor(p.duration / p.lidar.scan_period + 1e-9));
  std::size_t next = 0;
  const auto& samples = d.imu.samples;
  for (std::size_t s = 0; s < n_scans; ++s) {
    const double t_start = d.t0 + p.lidar.scan_period * static_cast<double>(s);
    const double t_stop = d.t0 + p.lidar.scan_period * static_cast<double>(s + 1);
    d.scans.push_back(synthesize_scan(gt, p.world, ext, p.lidar, t_start, seed, s + 1));
    std::vector<ImuSample> window;
    while (next < samples.size() && samples[next].t <= t_stop + 1e-12) window.push_back(samples[next++]);
    d.imu_per_scan.push_back(std::move(window));
  }
  d.gt = std::move(gt);
  return d;
}

double absolute_trajectory_error(const std::vector<Vec3>& est, const std::vector<Vec3>& truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("ATE: size mismatch");
  if (est.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(est.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = est[static_cast<std::size_t>(i)];
    dst.col(i) = truth[static_cast<std::size_t>(i)];
  }
  Mat4 T = Mat4::Identity();
  if (n >= 3) T = Eigen::umeyama(src, dst, false);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 a = T.topLeftCorner<3, 3>() * src.col(i) + T.topRightCorner<3, 1>();
    sq += (a - dst.col(i)).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(n));
}

LioRun run_filter(const SyntheticDataset& data, const FilterConfig& cfg, const Mat15& P0) {
  Filter f(cfg, data.t0, data.x0, P0);
  LioRun run;
  std::vector<Vec3> est, truth;
  for (std::size_t s = 0; s < data.scans.size(); ++s) {
    run.results.push_back(f.process_scan(data.imu_per_scan[s], data.scans[s]));
    const Pose3 gt = data.gt.pose_at(run.results.back().t);
    run.truth.push_back(gt);
    est.push_back(run.results.back().posterior.pose.trans());
    truth.push_back(gt.trans());
  }
  run.ate = absolute_trajectory_error(est, truth);
  return run;
}

}  // namespace lielio
