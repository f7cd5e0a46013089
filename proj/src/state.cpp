#include "lielio/state.hpp"

#include <numbers>

namespace lielio {

BaselineNavState to_baseline(const NavState& x) {
  BaselineNavState b;
  b.rot = x.pose.rot();
  b.trans = x.pose.trans();
  b.vel_world = x.vel_world();
  b.bias_gyro = x.bias_gyro;
  b.bias_acc = x.bias_acc;
  return b;
}

NavState from_baseline(const BaselineNavState& b) {
  NavState x;
  x.pose = Pose3(b.rot, b.trans);
  x.vel_body = b.rot.matrix().transpose() * b.vel_world;
  x.bias_gyro = b.bias_gyro;
  x.bias_acc = b.bias_acc;
  return x;
}

Vec15 ErrorState15::vector() const {
  Vec15 v;
  v << dpose, dvel, dbg, dba;
  return v;
}

ErrorState15 ErrorState15::from_vector(const Vec15& v) {
  ErrorState15 e;
  e.dpose = v.segment<6>(idx::kPose);
  e.dvel = v.segment<3>(idx::kVel);
  e.dbg = v.segment<3>(idx::kBg);
  e.dba = v.segment<3>(idx::kBa);
  return e;
}

void ImuNoiseParams::validate() const {
  if (sigma_gyro < 0 || sigma_acc < 0 || sigma_bg_walk < 0 || sigma_ba_walk < 0) {
    throw std::invalid_argument("IMU noise densities must be non-negative");
  }
}

NavState boxplus(const NavState& x, const ErrorState15& dx) {
  NavState y;
  y.pose = x.pose * se3_exp(dx.dpose);
  y.vel_body = x.vel_body + dx.dvel;
  y.bias_gyro = x.bias_gyro + dx.dbg;
  y.bias_acc = x.bias_acc + dx.dba;
  return y;
}

NavState boxplus(const NavState& x, const Vec15& dx) {
  return boxplus(x, ErrorState15::from_vector(dx));
}

ErrorState15 boxminus(const NavState& x, const NavState& y) {
  const Pose3 rel = y.pose.inverse() * x.pose;
  const Vec3 w = so3_log(rel.rot());
  if (w.norm() >= std::numbers::pi - 1e-6) {
    throw OutOfChartError("boxminus: relative rotation outside the local chart");
  }
  ErrorState15 e;
  e.dpose = se3_log(rel);
  e.dvel = x.vel_body - y.vel_body;
  e.dbg = x.bias_gyro - y.bias_gyro;
  e.dba = x.bias_acc - y.bias_acc;
  return e;
}

Mat12 discrete_process_noise(const ImuNoiseParams& p, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("discrete_process_noise: dt must be positive");
  Mat12 q = Mat12::Zero();
  q.block<3, 3>(nidx::kGyro, nidx::kGyro).diagonal().setConstant(p.sigma_gyro * p.sigma_gyro * dt);
  q.block<3, 3>(nidx::kAcc, nidx::kAcc).diagonal().setConstant(p.sigma_acc * p.sigma_acc * dt);
  q.block<3, 3>(nidx::kBgWalk, nidx::kBgWalk).diagonal().setConstant(p.sigma_bg_walk * p.sigma_bg_walk * dt);
  q.block<3, 3>(nidx::kBaWalk, nidx::kBaWalk).diagonal().setConstant(p.sigma_ba_walk * p.sigma_ba_walk * dt);
  return q;
}

}  // namespace lielio
