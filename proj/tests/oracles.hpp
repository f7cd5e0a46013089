#pragma once

// Independent references used by the unit and acceptance tests. Nothing here
// calls the closed forms under test.

#include <functional>
#include <random>

#include "lielio/liegroup.hpp"
#include "lielio/state.hpp"

namespace oracle {

using lielio::Mat3;
using lielio::Mat4;
using lielio::Mat6;
using lielio::Vec3;
using lielio::Vec6;

/// Truncated power series of the matrix exponential.
inline Eigen::MatrixXd expm_series(const Eigen::MatrixXd& a, int terms = 20) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd term = out;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    out += term;
  }
  return out;
}

inline Mat3 skew3(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// 4x4 hat of a (linear, angular) twist, written out by hand.
inline Mat4 hat4(const Vec6& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = skew3(xi.tail<3>());
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m;
}

/// Composite Simpson rule of a matrix-valued integrand on [0, 1].
inline Eigen::MatrixXd simpson01(const std::function<Eigen::MatrixXd(double)>& f, int n = 2000) {
  const double h = 1.0 / n;
  Eigen::MatrixXd acc = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

/// SO(3) left Jacobian: int_0^1 exp(s [w]x) ds.
inline Mat3 so3_left_jacobian_quad(const Vec3& w) {
  return simpson01([&](double s) { return expm_series(s * skew3(w), 30); });
}

/// 6x6 ad matrix from the 4x4 commutator, column by column.
inline Mat6 ad_from_bracket(const Vec6& xi) {
  Mat6 out;
  const Mat4 X = hat4(xi);
  for (int c = 0; c < 6; ++c) {
    const Mat4 Y = hat4(Vec6::Unit(c));
    const Mat4 B = X * Y - Y * X;
    out.col(c) << B(0, 3), B(1, 3), B(2, 3), B(2, 1), B(0, 2), B(1, 0);
  }
  return out;
}

/// SE(3) left Jacobian: int_0^1 exp(s ad(xi)) ds.
inline Mat6 se3_left_jacobian_quad(const Vec6& xi) {
  const Mat6 ad = ad_from_bracket(xi);
  return simpson01([&](double s) { return expm_series(s * ad, 40); });
}

/// Central differences of f: R^n -> R^m at 0.
inline Eigen::MatrixXd central_diff(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                    int n, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd J(f0.size(), n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = h;
    J.col(i) = (f(e) - f(-e)) / (2 * h);
  }
  return J;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).norm() / std::max(ref.norm(), 1e-300);
}

// Random draws --------------------------------------------------------------

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }

  Vec3 vec3(double scale = 1.0) { return Vec3(normal(), normal(), normal()) * scale; }
  Vec6 vec6(double scale = 1.0) {
    Vec6 v;
    for (int i = 0; i < 6; ++i) v(i) = normal() * scale;
    return v;
  }
  /// Uniform direction times an angle drawn from [0, max_angle).
  Vec3 rotvec(double max_angle) {
    Vec3 d = vec3();
    while (d.norm() < 1e-6) d = vec3();
    return d.normalized() * uniform(0.0, max_angle);
  }
  Vec6 twist(double max_angle, double trans_scale = 1.0) {
    Vec6 xi;
    xi.head<3>() = vec3(trans_scale);
    xi.tail<3>() = rotvec(max_angle);
    return xi;
  }
  lielio::Pose3 pose(double trans_scale = 2.0) {
    return lielio::Pose3(lielio::so3_exp(rotvec(3.0)), vec3(trans_scale));
  }
  lielio::NavState nav_state() {
    lielio::NavState x;
    x.pose = pose();
    x.vel_body = vec3(2.0);
    x.bias_gyro = vec3(0.01);
    x.bias_acc = vec3(0.1);
    return x;
  }
  lielio::ImuSample imu() {
    lielio::ImuSample u;
    u.gyro = vec3(1.0);
    u.acc = vec3(3.0) + Vec3(0, 0, 9.81);
    return u;
  }
};

}  // namespace oracle
