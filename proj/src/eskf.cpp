#include "lielio/eskf.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "lielio/errors.hpp"

namespace lielio {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void FilterConfig::validate() const {
  imu_noise.validate();
  if (max_update_iters < 1) throw ConfigError("max_update_iters must be at least 1");
  if (!(convergence_eps >= 0)) throw ConfigError("convergence_eps must be non-negative");
  if (!(gate_chi2 > 0)) throw ConfigError("gate_chi2 must be positive");
  if (!(map.voxel_size > 0)) throw ConfigError("voxel_size must be positive");
  if (map.min_points < 3) throw ConfigError("min_points must be at least 3");
}

PlaneResidual residual_and_jacobians(const NavState& x, const ProbabilisticPoint& pt,
                                     const PlaneFeature& plane) {
  const Mat3& R = x.pose.R();
  const Vec3 nR = R.transpose() * plane.normal;  // n^T R as a column

  PlaneResidual out;
  out.r = plane.signed_distance(x.pose * pt.xyz);
  // d(T Exp(d) p)/d d = [R, -R [p]x] for the right perturbation.
  out.H.segment<3>(idx::kPos) = nR.transpose();
  out.H.segment<3>(idx::kRot) = -nR.transpose() * skew(pt.xyz);
  out.noise_var = nR.dot(pt.cov * nR);
  return out;
}

Eigen::VectorXd map_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& delta,
                              const Eigen::MatrixXd& H, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& r_var) {
  const Eigen::MatrixXd P_inv = P.ldlt().solve(Eigen::MatrixXd::Identity(P.rows(), P.cols()));
  const Eigen::VectorXd r_inv = r_var.cwiseInverse();
  const Eigen::MatrixXd S = P_inv + H.transpose() * r_inv.asDiagonal() * H;
  const Eigen::VectorXd g = P_inv * delta + H.transpose() * (r_inv.asDiagonal() * z);
  return -S.ldlt().solve(g);
}

Eigen::MatrixXd joseph_posterior(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                                 const Eigen::VectorXd& r_var) {
  const Eigen::Index n = P.rows();
  const Eigen::MatrixXd P_inv = P.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd HtRH = H.transpose() * r_var.cwiseInverse().asDiagonal() * H;
  const Eigen::MatrixXd S_inv =
      (P_inv + HtRH).ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  // K H = S^-1 H^T R^-1 H and K R K^T = S^-1 H^T R^-1 H S^-1.
  const Eigen::MatrixXd I_KH = Eigen::MatrixXd::Identity(n, n) - S_inv * HtRH;
  Eigen::MatrixXd out = I_KH * P * I_KH.transpose() + S_inv * HtRH * S_inv;
  return 0.5 * (out + out.transpose());
}

UpdateResult update(const NavState& x_prior, const Mat15& P_prior,
                    std::span<const ProbabilisticPoint> pts, std::span<const PlaneFeature> planes,
                    const FilterConfig& cfg) {
  if (pts.size() != planes.size()) throw std::invalid_argument("update: points/planes size mismatch");
  if (pts.empty()) throw std::invalid_argument("update: no residuals");

  const Eigen::Index m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd H(m, 15);
  Eigen::VectorXd z(m), r_var(m);

  UpdateResult res;
  NavState x = x_prior;
  Vec15 delta = Vec15::Zero();
  for (int it = 0; it < cfg.max_update_iters; ++it) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const PlaneResidual pr = residual_and_jacobians(x, pts[j], planes[j]);
      H.row(j) = pr.H;
      z(j) = pr.r;
      r_var(j) = pr.noise_var;
    }
    if (!(r_var.minCoeff() > 0)) throw NumericalError("update: non-positive measurement variance");
    const Vec15 step = map_increment(P_prior, delta, H, z, r_var);
    if (!step.allFinite()) throw NumericalError("update: non-finite increment");
    x = boxplus(x, step);
    delta = boxminus(x, x_prior).vector();
    res.iterations = it + 1;
    if (step.norm() < cfg.convergence_eps) {
      res.converged = true;
      break;
    }
  }

  res.x_post = x;
  res.delta = delta;
  res.P_joseph = joseph_posterior(P_prior, H, r_var);
  res.P_post = res.P_joseph;
  if (cfg.reset_covariance) {
    Mat15 G = Mat15::Identity();
    G.topLeftCorner<6, 6>() = se3_right_jacobian(Twist6(delta.segment<6>(idx::kPose)));
    res.P_post = G * res.P_joseph * G.transpose();
    res.P_post = 0.5 * (res.P_post + res.P_post.transpose()).eval();
  }
  return res;
}

std::vector<ImuSample> scan_imu_window(std::span<const ImuSample> imu,
                                       const std::optional<ImuSample>& held, double t_prev,
                                       double t_k) {
  if (imu.empty()) throw InputError("empty IMU span");
  std::vector<ImuSample> window;
  std::optional<ImuSample> start = held;
  for (std::size_t i = 0; i < imu.size(); ++i) {
    const ImuSample& s = imu[i];
    if (s.t < t_prev - kTimeTolerance || s.t > t_k + kTimeTolerance) {
      throw InputError("IMU sample " + std::to_string(i) + " at t=" + std::to_string(s.t) +
                       " outside (" + std::to_string(t_prev) + ", " + std::to_string(t_k) + "]");
    }
    if (i > 0 && !(s.t > imu[i - 1].t)) {
      throw InputError("non-increasing IMU timestamp at sample " + std::to_string(i));
    }
    if (s.t <= t_prev + kTimeTolerance) {
      start = s;
    } else if (s.t < t_k) {
      window.push_back(s);
    }
  }
  if (!start) {
    if (window.empty()) throw InputError("no IMU sample before the scan end");
    start = window.front();
    window.erase(window.begin());
  }
  start->t = t_prev;
  window.insert(window.begin(), *start);
  return window;
}

Filter::Filter(FilterConfig cfg, double t0, const NavState& x0, const Mat15& P0)
    : cfg_(std::move(cfg)), t_(t0), x_(x0), P_(P0), map_(cfg_.map) {
  cfg_.validate();
}

ScanResult Filter::process_scan(std::span<const ImuSample> imu,
                                const std::vector<RawPoint>& scan) {
  if (scan.empty()) throw InputError("process_scan: empty scan");
  double t_k = scan.front().t;
  for (const RawPoint& p : scan) {
    if (p.t < t_ - kTimeTolerance) {
      throw InputError("process_scan: point time " + std::to_string(p.t) +
                       " precedes the previous scan end " + std::to_string(t_));
    }
    t_k = std::max(t_k, p.t);
  }
  if (!(t_k > t_)) throw InputError("process_scan: scan does not advance time");

  const std::vector<ImuSample> window = scan_imu_window(imu, held_, t_, t_k);

  ScanResult out;
  out.n_points = scan.size();

  auto t0 = Clock::now();
  const PropagationModel model =
      cfg_.with_se3_propagation ? PropagationModel::kSe3 : PropagationModel::kBaseline;
  const auto steps = propagate_batch(x_, P_, window, t_k, cfg_.imu_noise, model);
  PoseHistory hist(t_, x_, P_);
  for (const auto& s : steps) hist.advance(s);
  out.timing.propagation_s = seconds_since(t0);

  t0 = Clock::now();
  UamcOptions uo;
  uo.with_cross = cfg_.with_cross_terms;
  uo.with_relative_uncertainty = cfg_.with_uamc;
  uo.interpolate = cfg_.interpolate_poses;
  const std::vector<ProbabilisticPoint> pts = undistort_scan(scan, hist, cfg_.ext, uo);
  out.timing.undistortion_s = seconds_since(t0);

  const NavState x_prior = hist.latest().state;
  const Mat15 P_prior = hist.latest().P_marginal;

  t0 = Clock::now();
  std::vector<ProbabilisticPoint> used;
  std::vector<PlaneFeature> planes;
  NavState x_post = x_prior;
  Mat15 P_post = P_prior;
  if (map_.num_planes() > 0) {
    const Vec3 viewpoint = x_prior.pose.trans();
    for (const ProbabilisticPoint& p : pts) {
      const auto pl = map_.match_plane(x_prior.pose * p.xyz, viewpoint);
      if (!pl) {
        ++out.n_unmatched;
        continue;
      }
      const PlaneResidual pr = residual_and_jacobians(x_prior, p, *pl);
      const double innov = pr.noise_var + pr.H * P_prior * pr.H.transpose();
      if (pr.r * pr.r > cfg_.gate_chi2 * innov) {
        ++out.n_rejected;
        continue;
      }
      used.push_back(p);
      planes.push_back(*pl);
    }
    if (!used.empty()) {
      const UpdateResult ur = update(x_prior, P_prior, used, planes, cfg_);
      x_post = ur.x_post;
      P_post = ur.P_post;
      out.iterations = ur.iterations;
      out.updated = true;
    }
  }
  out.n_residuals = used.size();
  out.timing.update_s = seconds_since(t0);

  t0 = Clock::now();
  if (out.updated || map_.num_planes() == 0) {
    std::vector<Vec3> world;
    world.reserve(pts.size());
    for (const ProbabilisticPoint& p : pts) world.push_back(x_post.pose * p.xyz);
    map_.insert_points(world);
  }
  out.timing.map_s = seconds_since(t0);

  if (!x_post.pose.matrix().allFinite() || !P_post.allFinite()) {
    throw NumericalError("process_scan: non-finite posterior");
  }
  t_ = t_k;
  x_ = x_post;
  P_ = P_post;
  held_ = imu.back();

  out.t = t_k;
  out.posterior = x_post;
  out.P_post = P_post;
  return out;
}

}  // namespace lielio
