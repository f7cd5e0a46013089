#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "lielio/jointcov.hpp"

namespace lielio {

/// A LiDAR return in the sensor frame at its acquisition time.
struct RawPoint {
  Vec3 xyz = Vec3::Zero();
  double t = 0.0;
  Mat3 sigma_raw = Mat3::Identity() * 0.02 * 0.02;
};

/// A deskewed point in the IMU frame at the scan reference time.
struct ProbabilisticPoint {
  Vec3 xyz = Vec3::Zero();
  Mat3 cov = Mat3::Zero();
  double t = 0.0;
};

struct ExtrinsicCalib {
  Pose3 T_imu_lidar;  // IMU <- LiDAR
};

struct UamcOptions {
  /// Subtract the cross-covariance terms (joint distribution) when forming
  /// the relative-transform covariance.
  bool with_cross = true;
  /// Add the relative-transform covariance to the point noise at all. When
  /// false only the rotated raw noise is kept (plain deskewing).
  bool with_relative_uncertainty = true;
  /// Geodesic interpolation between bracketing poses; otherwise snap to the
  /// earlier entry.
  bool interpolate = true;
};

class TimeSpanError : public std::out_of_range {
 public:
  TimeSpanError(const std::string& what, std::size_t index)
      : std::out_of_range(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct TimedPose {
  Pose3 pose;
  std::size_t index = 0;  // bracketing entry i with t_i <= rho < t_{i+1}
};

/// Timestamps within this distance of the history span are clamped onto it.
inline constexpr double kTimeTolerance = 1e-9;

TimedPose pose_at_time(const PoseHistory& h, double rho, bool interpolate = true);

ProbabilisticPoint undistort_point(const RawPoint& pt, const PoseHistory& h,
                                   const ExtrinsicCalib& ext, const UamcOptions& opt = {});

/// Point covariance in the reference frame: A S_rel A^T + R S_raw R^T.
Mat3 undistorted_covariance(const Pose3& rel, const Vec3& p_imu, const Cov6& sigma_rel,
                            const Mat3& rot_raw, const Mat3& sigma_raw);

/// Order-preserving undistort_point over a scan. The relative covariance of
/// each history entry is computed once. Throws TimeSpanError naming the first
/// out-of-span point.
std::vector<ProbabilisticPoint> undistort_scan(const std::vector<RawPoint>& scan,
                                               const PoseHistory& h, const ExtrinsicCalib& ext,
                                               const UamcOptions& opt = {});

}  // namespace lielio
