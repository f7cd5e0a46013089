#include <gtest/gtest.h>

#include <numbers>

#include "lielio/propagation.hpp"
#include "oracles.hpp"

using namespace lielio;

namespace {

ImuNoiseParams noise() {
  ImuNoiseParams p;
  p.sigma_gyro = 0.01;
  p.sigma_acc = 0.1;
  p.sigma_bg_walk = 1e-3;
  p.sigma_ba_walk = 1e-2;
  return p;
}

// Entry-wise comparison: absolute slack for structural zeros, relative for the rest.
void expect_jacobian_near(const Eigen::MatrixXd& a, const Eigen::MatrixXd& fd) {
  ASSERT_EQ(a.rows(), fd.rows());
  ASSERT_EQ(a.cols(), fd.cols());
  EXPECT_LT(oracle::rel_err(a, fd), 1e-5);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      EXPECT_NEAR(a(i, j), fd(i, j), 1e-7 + 1e-5 * std::abs(fd(i, j))) << i << "," << j;
}

struct FdJacobians {
  Eigen::MatrixXd F_x, F_w;
};

FdJacobians fd_jacobians(PropagationModel model, const NavState& x, const ImuSample& u,
                         const ImuNoiseParams& p, double dt) {
  const NavState ref = propagate(model, x, u, p, dt);
  FdJacobians out;
  out.F_x = oracle::central_diff(
      [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
        return boxminus(propagate(model, boxplus(x, Vec15(d)), u, p, dt), ref).vector();
      },
      15);
  out.F_w = oracle::central_diff(
      [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        return boxminus(propagate(model, x, u, p, dt, ProcessNoise(w)), ref).vector();
      },
      12);
  return out;
}

}  // namespace

TEST(PropagateSe3, ZeroMotion) {
  ImuNoiseParams p;
  p.gravity.setZero();
  NavState x;
  x.pose = Pose3(so3_exp(Vec3(0.1, 0.2, 0.3)), Vec3(1, 2, 3));
  const NavState y = propagate_se3(x, ImuSample{}, p, 0.01);
  EXPECT_EQ(y.pose.matrix(), x.pose.matrix());
  EXPECT_EQ(y.vel_body, x.vel_body);
}

TEST(PropagateSe3, PureRotationCompensatedGravity) {
  ImuNoiseParams p;
  NavState x;
  x.pose = Pose3(so3_exp(Vec3(0.3, -0.2, 0.1)), Vec3::Zero());
  ImuSample u;
  u.gyro = Vec3(0, 0, 1);
  u.acc = -(x.pose.R().transpose() * p.gravity);
  const double dt = 0.01;
  const NavState y = propagate_se3(x, u, p, dt);
  EXPECT_LT(y.pose.trans().norm(), 1e-15);
  EXPECT_LT((y.pose.R() - (x.pose.rot() * so3_exp(Vec3(u.gyro * dt))).matrix()).norm(), 1e-15);
  EXPECT_LT(y.vel_body.norm(), 1e-15);
}

TEST(PropagateSe3, QuarterTurnTranslation) {
  ImuNoiseParams p;
  p.gravity.setZero();
  NavState x;
  x.vel_body = Vec3(1, 0, 0);
  ImuSample u;
  u.gyro = Vec3(0, 0, std::numbers::pi / 2);
  const NavState y = propagate_se3(x, u, p, 1.0);
  const Vec3 expect = oracle::so3_left_jacobian_quad(u.gyro) * Vec3::UnitX();
  EXPECT_LT((y.pose.trans() - expect).norm(), 1e-8);
}

TEST(PropagateBaseline, Formulas) {
  ImuNoiseParams p;
  oracle::Rng rng(1);
  const BaselineNavState x = to_baseline(rng.nav_state());
  const ImuSample u = rng.imu();
  const double dt = 0.02;
  const BaselineNavState y = propagate_baseline(x, u, p, dt);
  const Vec3 w = u.gyro - x.bias_gyro;
  const Vec3 a = u.acc - x.bias_acc;
  EXPECT_LT((y.rot.matrix() - (x.rot * so3_exp(Vec3(w * dt))).matrix()).norm(), 1e-15);
  EXPECT_LT((y.trans - (x.trans + x.vel_world * dt)).norm(), 1e-14);
  EXPECT_LT((y.vel_world - (x.vel_world + (x.rot * a + p.gravity) * dt)).norm(), 1e-13);

  ImuNoiseParams q;
  q.gravity.setZero();
  const BaselineNavState z = propagate_baseline(BaselineNavState{}, ImuSample{}, q, dt);
  EXPECT_TRUE(z.rot.matrix().isIdentity(0.0));
  EXPECT_TRUE(z.trans.isZero(0.0));
}

TEST(Propagation, TranslationIdentity) {
  oracle::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 R = so3_exp(rng.rotvec(3.0)).matrix();
    const Vec3 w = rng.vec3(3.0);
    const Vec3 v = rng.vec3(3.0);
    const double dt = rng.uniform(1e-3, 0.1);
    const Vec3 lhs = R * so3_left_jacobian(Vec3(w * dt)) * v * dt;
    const Vec3 rhs = so3_left_jacobian(Vec3(R * w * dt)) * (R * v) * dt;
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
  }
}

TEST(Propagation, ModelsAgreeWithoutRotation) {
  ImuNoiseParams p;
  oracle::Rng rng(3);
  NavState a = rng.nav_state();
  a.bias_gyro.setZero();
  NavState b = a;
  for (int i = 0; i < 1000; ++i) {
    ImuSample u;
    u.acc = rng.vec3(2.0) + Vec3(0, 0, 9.81);
    a = propagate(PropagationModel::kSe3, a, u, p, 0.01);
    b = propagate(PropagationModel::kBaseline, b, u, p, 0.01);
  }
  EXPECT_LT((a.pose.matrix() - b.pose.matrix()).norm(), 1e-12 * (1 + a.pose.trans().norm()));
  EXPECT_LT((a.pose.R() - b.pose.R()).norm(), 1e-12);
}

TEST(ErrorJacobians, MatchFiniteDifferences) {
  const ImuNoiseParams p = noise();
  oracle::Rng rng(4);
  for (PropagationModel model : {PropagationModel::kSe3, PropagationModel::kBaseline}) {
    for (int i = 0; i < 20; ++i) {
      const NavState x = rng.nav_state();
      const ImuSample u = rng.imu();
      const double dt = rng.uniform(0.005, 0.05);
      const ErrorJacobians J = error_jacobians(model, x, u, p, dt);
      const FdJacobians fd = fd_jacobians(model, x, u, p, dt);
      expect_jacobian_near(J.F_x, fd.F_x);
      expect_jacobian_near(J.F_w, fd.F_w);
    }
  }
}

TEST(ErrorJacobians, SmallStepLimit) {
  oracle::Rng rng(5);
  const NavState x = rng.nav_state();
  const double dt = 1e-9;
  const ErrorJacobians J = error_jacobians(x, rng.imu(), noise(), dt);
  EXPECT_LT((J.F_x - Mat15::Identity()).norm(), 1e-6);
  // F_w acts on integrated increments; the injected covariance is what vanishes.
  const Mat15 Qd = J.F_w * discrete_process_noise(noise(), dt) * J.F_w.transpose();
  EXPECT_LT(Qd.norm(), 1e-9);
}

TEST(ErrorJacobians, GyroNoiseColumnSparsity) {
  oracle::Rng rng(6);
  const NavState x = rng.nav_state();
  const ImuSample u = rng.imu();
  const ImuNoiseParams p = noise();
  const ErrorJacobians J = error_jacobians(x, u, p, 0.01);
  const FdJacobians fd = fd_jacobians(PropagationModel::kSe3, x, u, p, 0.01);
  const auto gyro = J.F_w.middleCols<3>(nidx::kGyro);
  EXPECT_GT(gyro.middleRows<3>(idx::kRot).norm(), 0.1);
  EXPECT_GT(gyro.middleRows<3>(idx::kVel).norm(), 0.0);
  EXPECT_TRUE(gyro.middleRows<6>(idx::kBg).isZero(0.0));
  EXPECT_LT(fd.F_w.middleCols<3>(nidx::kGyro).middleRows<6>(idx::kBg).norm(), 1e-9);
  // The translation row sees the gyro noise only through the O(dt) coupling
  // of the left Jacobian.
  EXPECT_LT(gyro.middleRows<3>(idx::kPos).norm(), 0.05);
}

TEST(PropagateCovariance, Examples) {
  EXPECT_TRUE(propagate_covariance(Mat15::Zero(), Mat15::Identity(), Mat15x12::Random(),
                                   Mat12::Zero())
                  .isZero(0.0));
  const Mat15x12 Fw = Mat15x12::Random();
  const Mat15 P = Mat15::Identity() * 0.5;
  const Mat15 out = propagate_covariance(P, Mat15::Identity(), Fw, Mat12::Identity());
  EXPECT_LT((out - (P + Fw * Fw.transpose())).norm(), 1e-14);
}

TEST(PropagateCovariance, StaysPsdOverLongRuns) {
  const ImuNoiseParams p = noise();
  oracle::Rng rng(7);
  std::vector<ImuSample> imu(10000);
  for (std::size_t i = 0; i < imu.size(); ++i) {
    imu[i] = rng.imu();
    imu[i].t = 0.005 * static_cast<double>(i);
  }
  const Mat15 P0 = Mat15::Identity() * 1e-4;
  const auto steps = propagate_batch(NavState{}, P0, imu, imu.back().t + 0.005, p);
  const Mat15& P = steps.back().P_after;
  EXPECT_EQ((P - P.transpose()).norm(), 0.0);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat15>(P).eigenvalues().minCoeff(), -1e-10);
}

TEST(PropagateCovariance, MatchesMonteCarlo) {
  ImuNoiseParams p;
  p.sigma_gyro = 0.05;
  p.sigma_acc = 0.2;
  p.sigma_bg_walk = 0.01;
  p.sigma_ba_walk = 0.05;
  const double dt = 0.01;
  oracle::Rng rng(8);
  const NavState x = rng.nav_state();
  const ImuSample u = rng.imu();

  Vec15 sd;
  sd << Vec3::Constant(0.02), Vec3::Constant(0.01), Vec3::Constant(0.05),
      Vec3::Constant(1e-3), Vec3::Constant(1e-2);
  const Mat15 P0 = Mat15(sd.cwiseAbs2().asDiagonal());
  const Mat12 Q = discrete_process_noise(p, dt);
  const ErrorJacobians J = error_jacobians(x, u, p, dt);
  const Mat15 P1 = propagate_covariance(P0, J.F_x, J.F_w, Q);

  const NavState ref = propagate_se3(x, u, p, dt);
  const Vec12 qsd = Q.diagonal().cwiseSqrt();
  const int n = 1000;
  Mat15 emp = Mat15::Zero();
  for (int s = 0; s < n; ++s) {
    Vec15 d;
    for (int i = 0; i < 15; ++i) d(i) = sd(i) * rng.normal();
    ProcessNoise w;
    for (int i = 0; i < 12; ++i) w(i) = qsd(i) * rng.normal();
    const Vec15 e = boxminus(propagate_se3(boxplus(x, d), u, p, dt, w), ref).vector();
    emp += e * e.transpose();
  }
  emp /= n;
  EXPECT_LT(oracle::rel_err(emp, P1), 0.15);
}

TEST(PropagateBatch, MatchesStepwise) {
  const ImuNoiseParams p = noise();
  oracle::Rng rng(9);
  const NavState x0 = rng.nav_state();
  std::vector<ImuSample> imu = {rng.imu(), rng.imu()};
  imu[0].t = 1.0;
  imu[1].t = 1.01;
  const Mat15 P0 = Mat15::Identity() * 1e-4;

  const auto one = propagate_batch(x0, P0, std::span(imu).first(1), 1.01, p);
  ASSERT_EQ(one.size(), 1u);
  const NavState y1 = propagate_se3(x0, imu[0], p, 0.01);
  EXPECT_LT((one[0].state_after.pose.matrix() - y1.pose.matrix()).norm(), 1e-14);

  const auto two = propagate_batch(x0, P0, imu, 1.03, p);
  ASSERT_EQ(two.size(), 2u);
  const NavState y2 = propagate_se3(y1, imu[1], p, 0.02);
  EXPECT_LT((two[1].state_after.pose.matrix() - y2.pose.matrix()).norm(), 1e-14);
  EXPECT_NEAR(two[1].dt, 0.02, 1e-15);
  EXPECT_NEAR(two[1].t, 1.03, 1e-15);

  const ErrorJacobians J = error_jacobians(y1, imu[1], p, 0.02);
  const Mat15 P2 =
      propagate_covariance(two[0].P_after, J.F_x, J.F_w, discrete_process_noise(p, 0.02));
  EXPECT_LT((two[1].P_after - P2).norm(), 1e-14 * P2.norm());
}

TEST(PropagateBatch, RejectsBadStreams) {
  const ImuNoiseParams p = noise();
  std::vector<ImuSample> imu(2);
  imu[0].t = 1.0;
  imu[1].t = 1.0;
  EXPECT_THROW(propagate_batch(NavState{}, Mat15::Identity(), imu, 2.0, p),
               std::invalid_argument);
  EXPECT_THROW(propagate_batch(NavState{}, Mat15::Identity(), std::span<const ImuSample>(), 2.0, p),
               std::invalid_argument);
}
