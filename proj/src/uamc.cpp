#include "lielio/uamc.hpp"

#include <algorithm>
#include <string>

namespace lielio {

TimedPose pose_at_time(const PoseHistory& h, double rho, bool interpolate) {
  if (h.empty()) throw TimeSpanError("pose_at_time: empty history", 0);
  const auto& es = h.entries();
  const double t0 = es.front().t;
  const double t1 = es.back().t;
  if (rho < t0 - kTimeTolerance || rho > t1 + kTimeTolerance) {
    throw TimeSpanError("pose_at_time: time " + std::to_string(rho) + " outside [" +
                            std::to_string(t0) + ", " + std::to_string(t1) + "]",
                        0);
  }
  rho = std::clamp(rho, t0, t1);
  if (rho >= t1) return {es.back().pose(), es.size() - 1};

  // First entry with t > rho; its predecessor brackets rho.
  const auto it = std::upper_bound(es.begin(), es.end(), rho,
                                   [](double t, const HistoryEntry& e) { return t < e.t; });
  const std::size_t i = static_cast<std::size_t>(it - es.begin()) - 1;
  const HistoryEntry& a = es[i];
  const HistoryEntry& b = es[i + 1];
  if (!interpolate || rho == a.t) return {a.pose(), i};

  const double s = (rho - a.t) / (b.t - a.t);
  const Twist6 xi = se3_log(a.pose().inverse() * b.pose());
  return {a.pose() * se3_exp(Twist6(s * xi)), i};
}

Mat3 undistorted_covariance(const Pose3& rel, const Vec3& p_imu, const Cov6& sigma_rel,
                            const Mat3& rot_raw, const Mat3& sigma_raw) {
  const Eigen::Matrix<double, 3, 6> A =
      (rel.matrix() * dot_operator(homogeneous(p_imu))).topRows<3>();
  Mat3 cov = A * sigma_rel * A.transpose() + rot_raw * sigma_raw * rot_raw.transpose();
  return 0.5 * (cov + cov.transpose());
}

namespace {

ProbabilisticPoint undistort_with(const RawPoint& pt, const PoseHistory& h,
                                  const ExtrinsicCalib& ext, const Cov6& sigma_rel, const TimedPose& tp) {
  const Pose3 rel = h.latest().pose().inverse() * tp.pose;
  const Vec3 p_imu = ext.T_imu_lidar * pt.xyz;
  ProbabilisticPoint out;
  out.t = pt.t;
  out.xyz = rel * p_imu;
  const Mat3 rot_raw = rel.R() * ext.T_imu_lidar.R();
  out.cov = undistorted_covariance(rel, p_imu, sigma_rel, rot_raw, pt.sigma_raw);
  return out;
}

}  // namespace

ProbabilisticPoint undistort_point(const RawPoint& pt, const PoseHistory& h,
                                   const ExtrinsicCalib& ext, const UamcOptions& opt) {
  const TimedPose tp = pose_at_time(h, pt.t, opt.interpolate);
  Cov6 sigma_rel = Cov6::Zero();
  if (opt.with_relative_uncertainty) sigma_rel = relative_cov(h, tp.index, opt.with_cross).cov;
  return undistort_with(pt, h, ext, sigma_rel, tp);
}

std::vector<ProbabilisticPoint> undistort_scan(const std::vector<RawPoint>& scan,
                                               const PoseHistory& h, const ExtrinsicCalib& ext,
                                               const UamcOptions& opt) {
  std::vector<ProbabilisticPoint> out;
  if (scan.empty()) return out;

  std::vector<std::optional<Cov6>> rel_cov(h.size());
  out.reserve(scan.size());
  for (std::size_t n = 0; n < scan.size(); ++n) {
    TimedPose tp;
    try {
      tp = pose_at_time(h, scan[n].t, opt.interpolate);
    } catch (const TimeSpanError& e) {
      throw TimeSpanError("undistort_scan: point " + std::to_string(n) + ": " + e.what(), n);
    }
    Cov6 sigma_rel = Cov6::Zero();
    if (opt.with_relative_uncertainty) {
      auto& cached = rel_cov[tp.index];
      if (!cached) cached = relative_cov(h, tp.index, opt.with_cross).cov;
      sigma_rel = *cached;
    }
    out.push_back(undistort_with(scan[n], h, ext, sigma_rel, tp));
  }
  return out;
}

}  // namespace lielio
