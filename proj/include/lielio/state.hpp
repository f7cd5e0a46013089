#pragma once

#include <stdexcept>
#include <string>

#include "lielio/liegroup.hpp"

namespace lielio {

using Vec15 = Eigen::Matrix<double, 15, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;

/// Error-state slot offsets: [translation, rotation, velocity, gyro bias, accel bias].
namespace idx {
inline constexpr int kPos = 0;
inline constexpr int kRot = 3;
inline constexpr int kPose = 0;  // 6-wide pose block (linear, angular)
inline constexpr int kVel = 6;
inline constexpr int kBg = 9;
inline constexpr int kBa = 12;
}  // namespace idx

/// Process-noise slot offsets: [gyro, accel, gyro-bias walk, accel-bias walk].
namespace nidx {
inline constexpr int kGyro = 0;
inline constexpr int kAcc = 3;
inline constexpr int kBgWalk = 6;
inline constexpr int kBaWalk = 9;
}  // namespace nidx

class OutOfChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filter state: world<-body pose, body-frame velocity, IMU biases.
struct NavState {
  Pose3 pose;
  Vec3 vel_body = Vec3::Zero();
  Vec3 bias_gyro = Vec3::Zero();
  Vec3 bias_acc = Vec3::Zero();

  Vec3 vel_world() const { return pose.R() * vel_body; }
};

/// Conventional state with rotation and translation kept apart and velocity
/// expressed in the world frame.
struct BaselineNavState {
  Rot3 rot;
  Vec3 trans = Vec3::Zero();
  Vec3 vel_world = Vec3::Zero();
  Vec3 bias_gyro = Vec3::Zero();
  Vec3 bias_acc = Vec3::Zero();
};

BaselineNavState to_baseline(const NavState& x);
NavState from_baseline(const BaselineNavState& x);

struct ErrorState15 {
  Twist6 dpose = Twist6::Zero();
  Vec3 dvel = Vec3::Zero();
  Vec3 dbg = Vec3::Zero();
  Vec3 dba = Vec3::Zero();

  Vec15 vector() const;
  static ErrorState15 from_vector(const Vec15& v);
};

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
};

/// Continuous-time noise densities. Units: rad/s/sqrt(Hz), m/s^2/sqrt(Hz),
/// rad/s^2/sqrt(Hz), m/s^3/sqrt(Hz).
struct ImuNoiseParams {
  double sigma_gyro = 0.0;
  double sigma_acc = 0.0;
  double sigma_bg_walk = 0.0;
  double sigma_ba_walk = 0.0;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  void validate() const;
};

NavState boxplus(const NavState& x, const ErrorState15& dx);
NavState boxplus(const NavState& x, const Vec15& dx);

/// x boxminus y, i.e. the dx with y boxplus dx = x. Throws OutOfChartError
/// when the relative rotation is too close to pi for the chart.
ErrorState15 boxminus(const NavState& x, const NavState& y);

/// Discretized process-noise covariance; variance = density^2 * dt.
Mat12 discrete_process_noise(const ImuNoiseParams& p, double dt);

}  // namespace lielio
