#include "lielio/propagation.hpp"

#include <stdexcept>

namespace lielio {

namespace {

struct BiasCorrected {
  Vec3 phi;    // angle increment (rad)
  Vec3 alpha;  // specific-force velocity increment (m/s)
};

BiasCorrected corrected_increments(const Vec3& bg, const Vec3& ba, const ImuSample& u, double dt,
                                   const ProcessNoise& w) {
  return {(u.gyro - bg) * dt - w.segment<3>(nidx::kGyro),
          (u.acc - ba) * dt - w.segment<3>(nidx::kAcc)};
}

// Maps baseline error coordinates (dt_world, dtheta, dv_world, dbg, dba) at x
// into NavState error coordinates (drho, dphi, dv_body, dbg, dba).
Mat15 baseline_to_se3(const NavState& x) {
  const Mat3 Rt = x.pose.R().transpose();
  Mat15 M = Mat15::Identity();
  M.block<3, 3>(idx::kPos, idx::kPos) = Rt;
  M.block<3, 3>(idx::kVel, idx::kVel) = Rt;
  M.block<3, 3>(idx::kVel, idx::kRot) = skew(x.vel_body);
  return M;
}

Mat15 se3_to_baseline(const NavState& x) {
  const Mat3& R = x.pose.R();
  Mat15 M = Mat15::Identity();
  M.block<3, 3>(idx::kPos, idx::kPos) = R;
  M.block<3, 3>(idx::kVel, idx::kVel) = R;
  M.block<3, 3>(idx::kVel, idx::kRot) = -R * skew(x.vel_body);
  return M;
}

}  // namespace

NavState propagate_se3(const NavState& x, const ImuSample& u, const ImuNoiseParams& p, double dt,
                       const ProcessNoise& w) {
  const auto [phi, alpha] = corrected_increments(x.bias_gyro, x.bias_acc, u, dt, w);
  const Mat3& R = x.pose.R();

  NavState y;
  y.pose = x.pose * se3_exp(make_twist(x.vel_body * dt, phi));
  y.vel_body = so3_exp(Vec3(-phi)).matrix() * (x.vel_body + alpha + R.transpose() * p.gravity * dt);
  y.bias_gyro = x.bias_gyro + w.segment<3>(nidx::kBgWalk);
  y.bias_acc = x.bias_acc + w.segment<3>(nidx::kBaWalk);
  return y;
}

BaselineNavState propagate_baseline(const BaselineNavState& x, const ImuSample& u,
                                    const ImuNoiseParams& p, double dt, const ProcessNoise& w) {
  const auto [phi, alpha] = corrected_increments(x.bias_gyro, x.bias_acc, u, dt, w);

  BaselineNavState y;
  y.rot = x.rot * so3_exp(phi);
  y.trans = x.trans + x.vel_world * dt;
  y.vel_world = x.vel_world + x.rot.matrix() * alpha + p.gravity * dt;
  y.bias_gyro = x.bias_gyro + w.segment<3>(nidx::kBgWalk);
  y.bias_acc = x.bias_acc + w.segment<3>(nidx::kBaWalk);
  return y;
}

NavState propagate(PropagationModel model, const NavState& x, const ImuSample& u,
                   const ImuNoiseParams& p, double dt, const ProcessNoise& w) {
  if (model == PropagationModel::kSe3) return propagate_se3(x, u, p, dt, w);
  return from_baseline(propagate_baseline(to_baseline(x), u, p, dt, w));
}

ErrorJacobians error_jacobians(const NavState& x, const ImuSample& u, const ImuNoiseParams& p,
                               double dt) {
  const Vec3 phi = (u.gyro - x.bias_gyro) * dt;
  const Vec3 alpha = (u.acc - x.bias_acc) * dt;
  const Mat3& R = x.pose.R();
  const Vec3 g_body = R.transpose() * p.gravity;
  const Twist6 step = make_twist(x.vel_body * dt, phi);

  const Mat6 Jr = se3_right_jacobian(step);
  const Mat3 E = so3_exp(Vec3(-phi)).matrix();
  const Vec3 u_vel = x.vel_body + alpha + g_body * dt;
  const Mat3 E_u_Jl = E * skew(u_vel) * so3_left_jacobian(phi);

  ErrorJacobians J;
  J.F_x.setIdentity();
  J.F_w.setZero();

  // pose rows
  J.F_x.block<6, 6>(idx::kPose, idx::kPose) = adjoint(se3_exp(Twist6(-step)));
  J.F_x.block<6, 3>(idx::kPose, idx::kVel) = Jr.leftCols<3>() * dt;
  J.F_x.block<6, 3>(idx::kPose, idx::kBg) = -Jr.rightCols<3>() * dt;
  J.F_w.block<6, 3>(idx::kPose, nidx::kGyro) = -Jr.rightCols<3>();

  // velocity rows
  J.F_x.block<3, 3>(idx::kVel, idx::kRot) = E * skew(g_body) * dt;
  J.F_x.block<3, 3>(idx::kVel, idx::kVel) = E;
  J.F_x.block<3, 3>(idx::kVel, idx::kBg) = -E_u_Jl * dt;
  J.F_x.block<3, 3>(idx::kVel, idx::kBa) = -E * dt;
  J.F_w.block<3, 3>(idx::kVel, nidx::kGyro) = -E_u_Jl;
  J.F_w.block<3, 3>(idx::kVel, nidx::kAcc) = -E;

  // bias random walks
  J.F_w.block<3, 3>(idx::kBg, nidx::kBgWalk).setIdentity();
  J.F_w.block<3, 3>(idx::kBa, nidx::kBaWalk).setIdentity();
  return J;
}

ErrorJacobians error_jacobians_baseline(const NavState& x, const ImuSample& u,
                                        const ImuNoiseParams& p, double dt) {
  const Vec3 phi = (u.gyro - x.bias_gyro) * dt;
  const Vec3 alpha = (u.acc - x.bias_acc) * dt;
  const Mat3& R = x.pose.R();
  const Mat3 Jr = so3_right_jacobian(phi);

  // In baseline coordinates: (dt_world, dtheta, dv_world, dbg, dba).
  Mat15 Fb = Mat15::Identity();
  Mat15x12 Gb = Mat15x12::Zero();
  Fb.block<3, 3>(idx::kPos, idx::kVel) = Mat3::Identity() * dt;
  Fb.block<3, 3>(idx::kRot, idx::kRot) = so3_exp(Vec3(-phi)).matrix();
  Fb.block<3, 3>(idx::kRot, idx::kBg) = -Jr * dt;
  Fb.block<3, 3>(idx::kVel, idx::kRot) = -R * skew(alpha);
  Fb.block<3, 3>(idx::kVel, idx::kBa) = -R * dt;
  Gb.block<3, 3>(idx::kRot, nidx::kGyro) = -Jr;
  Gb.block<3, 3>(idx::kVel, nidx::kAcc) = -R;
  Gb.block<3, 3>(idx::kBg, nidx::kBgWalk).setIdentity();
  Gb.block<3, 3>(idx::kBa, nidx::kBaWalk).setIdentity();

  const NavState y = propagate(PropagationModel::kBaseline, x, u, p, dt);
  const Mat15 M_out = baseline_to_se3(y);
  ErrorJacobians J;
  J.F_x = M_out * Fb * se3_to_baseline(x);
  J.F_w = M_out * Gb;
  return J;
}

ErrorJacobians error_jacobians(PropagationModel model, const NavState& x, const ImuSample& u,
                               const ImuNoiseParams& p, double dt) {
  if (model == PropagationModel::kSe3) return error_jacobians(x, u, p, dt);
  return error_jacobians_baseline(x, u, p, dt);
}

Mat15 propagate_covariance(const Mat15& P, const Mat15& F_x, const Mat15x12& F_w, const Mat12& Q) {
  Mat15 out = F_x * P * F_x.transpose() + F_w * Q * F_w.transpose();
  return 0.5 * (out + out.transpose());
}

std::vector<PropagationStep> propagate_batch(const NavState& x0, const Mat15& P0,
                                             std::span<const ImuSample> imu, double t_end,
                                             const ImuNoiseParams& p, PropagationModel model) {
  if (imu.empty()) throw std::invalid_argument("propagate_batch: empty IMU stream");
  for (size_t i = 1; i < imu.size(); ++i) {
    if (!(imu[i].t > imu[i - 1].t)) {
      throw std::invalid_argument("propagate_batch: non-increasing IMU timestamp at index " +
                                  std::to_string(i));
    }
  }
  if (!(t_end > imu.back().t)) {
    throw std::invalid_argument("propagate_batch: end time must follow the last sample");
  }

  std::vector<PropagationStep> steps;
  steps.reserve(imu.size());
  NavState x = x0;
  Mat15 P = P0;
  for (size_t i = 0; i < imu.size(); ++i) {
    const double t_next = (i + 1 < imu.size()) ? imu[i + 1].t : t_end;
    const double dt = t_next - imu[i].t;
    const ErrorJacobians J = error_jacobians(model, x, imu[i], p, dt);
    const Mat12 Q = discrete_process_noise(p, dt);

    PropagationStep s;
    s.t = t_next;
    s.dt = dt;
    s.state_after = propagate(model, x, imu[i], p, dt);
    s.F_x = J.F_x;
    s.F_w = J.F_w;
    s.Q_d = J.F_w * Q * J.F_w.transpose();
    s.Q_d = 0.5 * (s.Q_d + s.Q_d.transpose()).eval();
    s.P_after = propagate_covariance(P, J.F_x, J.F_w, Q);
    x = s.state_after;
    P = s.P_after;
    steps.push_back(std::move(s));
  }
  return steps;
}

}  // namespace lielio
