#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>
#include <numbers>

// SO(3)/SE(3) primitives. Twists are ordered (linear, angular) everywhere:
//   xi = [v; w],  xi^ = [ [w]x  v ; 0 0 ].
// All functions are templated on the scalar type; double aliases live at the
// bottom of the file.

namespace lielio {

template <typename S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4T = Eigen::Matrix<S, 4, 1>;
template <typename S> using Vec6T = Eigen::Matrix<S, 6, 1>;
template <typename S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat4T = Eigen::Matrix<S, 4, 4>;
template <typename S> using Mat6T = Eigen::Matrix<S, 6, 6>;
template <typename S> using Mat46T = Eigen::Matrix<S, 4, 6>;

/// Below this rotation angle (rad) the closed forms switch to Taylor series.
inline constexpr double kSmallAngle = 1e-4;

/// Rotations are re-orthonormalized after this many chained compositions.
inline constexpr int kReorthoEvery = 1000;

template <typename S>
Mat3T<S> skew(const Vec3T<S>& v) {
  Mat3T<S> m;
  m << S(0), -v.z(), v.y(),
       v.z(), S(0), -v.x(),
      -v.y(), v.x(), S(0);
  return m;
}

template <typename S>
Vec3T<S> vee(const Mat3T<S>& m) {
  return Vec3T<S>(m(2, 1), m(0, 2), m(1, 0));
}

/// Nearest rotation in the Frobenius sense (polar factor via SVD).
template <typename S>
Mat3T<S> orthonormalize(const Mat3T<S>& m) {
  Eigen::JacobiSVD<Mat3T<S>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3T<S> r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < S(0)) {
    Mat3T<S> u = svd.matrixU();
    u.col(2) *= S(-1);
    r = u * svd.matrixV().transpose();
  }
  return r;
}

/// Rotation stored as a 3x3 matrix. Tracks how many products produced it so
/// drift from SO(3) is bounded over long propagation chains.
template <typename S>
class Rot3T {
 public:
  Rot3T() : m_(Mat3T<S>::Identity()) {}
  explicit Rot3T(const Mat3T<S>& m, int depth = 0) : m_(m), depth_(depth) {}

  static Rot3T identity() { return Rot3T(); }

  const Mat3T<S>& matrix() const { return m_; }
  int depth() const { return depth_; }

  Rot3T inverse() const { return Rot3T(m_.transpose(), depth_); }

  Rot3T operator*(const Rot3T& o) const {
    const int d = std::max(depth_, o.depth_) + 1;
    if (d >= kReorthoEvery) return Rot3T(orthonormalize<S>(m_ * o.m_), 0);
    return Rot3T(m_ * o.m_, d);
  }

  Vec3T<S> operator*(const Vec3T<S>& p) const { return m_ * p; }

 private:
  Mat3T<S> m_;
  int depth_ = 0;
};

template <typename S>
class Pose3T {
 public:
  Pose3T() : trans_(Vec3T<S>::Zero()) {}
  Pose3T(const Rot3T<S>& r, const Vec3T<S>& t) : rot_(r), trans_(t) {}
  Pose3T(const Mat3T<S>& r, const Vec3T<S>& t) : rot_(r), trans_(t) {}

  static Pose3T identity() { return Pose3T(); }

  static Pose3T from_matrix(const Mat4T<S>& m) {
    return Pose3T(Mat3T<S>(m.template topLeftCorner<3, 3>()),
                  Vec3T<S>(m.template topRightCorner<3, 1>()));
  }

  const Rot3T<S>& rot() const { return rot_; }
  const Mat3T<S>& R() const { return rot_.matrix(); }
  const Vec3T<S>& trans() const { return trans_; }

  Mat4T<S> matrix() const {
    Mat4T<S> m = Mat4T<S>::Identity();
    m.template topLeftCorner<3, 3>() = R();
    m.template topRightCorner<3, 1>() = trans_;
    return m;
  }

  Pose3T inverse() const {
    const Rot3T<S> ri = rot_.inverse();
    return Pose3T(ri, -(ri.matrix() * trans_));
  }

  Pose3T operator*(const Pose3T& o) const {
    return Pose3T(rot_ * o.rot_, R() * o.trans_ + trans_);
  }

  Vec3T<S> operator*(const Vec3T<S>& p) const { return R() * p + trans_; }

 private:
  Rot3T<S> rot_;
  Vec3T<S> trans_;
};

// ---------------------------------------------------------------------------
// SO(3)

template <typename S>
Rot3T<S> so3_exp(const Vec3T<S>& w) {
  const S theta = w.norm();
  const Mat3T<S> W = skew<S>(w);
  if (theta < S(kSmallAngle)) {
    return Rot3T<S>(Mat3T<S>::Identity() + W + S(0.5) * W * W);
  }
  const S half = S(0.5) * theta;
  const S s = std::sin(half) / half;
  // 1 - cos(theta) = 2 sin^2(theta/2)
  const S a = std::sin(theta) / theta;
  const S b = S(0.5) * s * s;
  return Rot3T<S>(Mat3T<S>::Identity() + a * W + b * W * W);
}

/// Rotation vector with angle in [0, pi]. At exactly pi the axis sign is
/// chosen so its largest-magnitude component is non-negative.
template <typename S>
Vec3T<S> so3_log(const Rot3T<S>& r) {
  const Mat3T<S>& m = r.matrix();
  const Vec3T<S> a = S(0.5) * vee<S>(Mat3T<S>(m - m.transpose()));  // sin(theta) n
  const S c = std::clamp(S(0.5) * (m.trace() - S(1)), S(-1), S(1));
  const S s = a.norm();
  const S theta = std::atan2(s, c);

  if (theta < S(kSmallAngle)) {
    // theta / sin(theta) = 1 + theta^2/6 + ...
    return (S(1) + s * s / S(6)) * a;
  }
  if (theta < S(std::numbers::pi) - S(1e-4)) {
    return (theta / s) * a;
  }

  // Near pi: (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) n n^T.
  const Mat3T<S> B = S(0.5) * (m + m.transpose()) - c * Mat3T<S>::Identity();
  int k = 0;
  B.diagonal().maxCoeff(&k);
  Vec3T<S> n = B.col(k).normalized();
  if (s > S(1e-12)) {
    if (n.dot(a) < S(0)) n = -n;
  } else {
    int j = 0;
    n.cwiseAbs().maxCoeff(&j);
    if (n(j) < S(0)) n = -n;
  }
  return theta * n;
}

template <typename S>
Mat3T<S> so3_left_jacobian(const Vec3T<S>& w) {
  const S theta = w.norm();
  const Mat3T<S> W = skew<S>(w);
  if (theta < S(kSmallAngle)) {
    return Mat3T<S>::Identity() + S(0.5) * W + W * W / S(6);
  }
  const S t2 = theta * theta;
  const S half = S(0.5) * theta;
  const S sh = std::sin(half);
  const S a = S(2) * sh * sh / t2;  // (1 - cos) / theta^2
  const S b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3T<S>::Identity() + a * W + b * W * W;
}

template <typename S>
Mat3T<S> so3_right_jacobian(const Vec3T<S>& w) {
  return so3_left_jacobian<S>(Vec3T<S>(-w));
}

template <typename S>
Mat3T<S> so3_left_jacobian_inv(const Vec3T<S>& w) {
  const S theta = w.norm();
  const Mat3T<S> W = skew<S>(w);
  if (theta < S(kSmallAngle)) {
    return Mat3T<S>::Identity() - S(0.5) * W + W * W / S(12);
  }
  const S half = S(0.5) * theta;
  const S cot_half = std::cos(half) / std::sin(half);
  const S c = S(1) / (theta * theta) - cot_half / (S(2) * theta);
  return Mat3T<S>::Identity() - S(0.5) * W + c * W * W;
}

// ---------------------------------------------------------------------------
// SE(3)

template <typename S>
Mat4T<S> se3_hat(const Vec6T<S>& xi) {
  Mat4T<S> m = Mat4T<S>::Zero();
  m.template topLeftCorner<3, 3>() = skew<S>(Vec3T<S>(xi.template tail<3>()));
  m.template topRightCorner<3, 1>() = xi.template head<3>();
  return m;
}

template <typename S>
Pose3T<S> se3_exp(const Vec6T<S>& xi) {
  const Vec3T<S> v = xi.template head<3>();
  const Vec3T<S> w = xi.template tail<3>();
  return Pose3T<S>(so3_exp<S>(w), Vec3T<S>(so3_left_jacobian<S>(w) * v));
}

template <typename S>
Vec6T<S> se3_log(const Pose3T<S>& p) {
  const Vec3T<S> w = so3_log<S>(p.rot());
  Vec6T<S> xi;
  xi.template head<3>() = so3_left_jacobian_inv<S>(w) * p.trans();
  xi.template tail<3>() = w;
  return xi;
}

/// Ad_T = [R  [t]x R; 0  R] acting on (linear, angular) twists.
template <typename S>
Mat6T<S> adjoint(const Pose3T<S>& p) {
  Mat6T<S> ad = Mat6T<S>::Zero();
  ad.template topLeftCorner<3, 3>() = p.R();
  ad.template topRightCorner<3, 3>() = skew<S>(p.trans()) * p.R();
  ad.template bottomRightCorner<3, 3>() = p.R();
  return ad;
}

/// Lie-algebra adjoint ad_xi = [[w]x [v]x; 0 [w]x].
template <typename S>
Mat6T<S> curly_wedge(const Vec6T<S>& xi) {
  Mat6T<S> ad = Mat6T<S>::Zero();
  const Mat3T<S> W = skew<S>(Vec3T<S>(xi.template tail<3>()));
  ad.template topLeftCorner<3, 3>() = W;
  ad.template topRightCorner<3, 3>() = skew<S>(Vec3T<S>(xi.template head<3>()));
  ad.template bottomRightCorner<3, 3>() = W;
  return ad;
}

/// p^odot with xi^ p = p^odot xi for homogeneous p = (eps, eta).
template <typename S>
Mat46T<S> dot_operator(const Vec4T<S>& ph) {
  Mat46T<S> m = Mat46T<S>::Zero();
  m.template topLeftCorner<3, 3>() = ph(3) * Mat3T<S>::Identity();
  m.template topRightCorner<3, 3>() = -skew<S>(Vec3T<S>(ph.template head<3>()));
  return m;
}

/// Embeds a 3D noise vector as a homogeneous direction.
template <typename S>
Vec4T<S> dilation(const Vec3T<S>& n) {
  Vec4T<S> d;
  d << n, S(0);
  return d;
}

template <typename S>
Vec4T<S> homogeneous(const Vec3T<S>& p) {
  Vec4T<S> d;
  d << p, S(1);
  return d;
}

namespace detail {

// Coefficients of the Q block of the SE(3) left Jacobian. The closed forms
// cancel catastrophically for small angles, so the series is used up to a
// much larger angle than kSmallAngle.
template <typename S>
void se3_q_coefficients(S theta, S& c1, S& c2, S& c3) {
  const S t2 = theta * theta;
  if (theta < S(0.1)) {
    const S t4 = t2 * t2;
    const S t6 = t4 * t2;
    c1 = S(1) / S(6) - t2 / S(120) + t4 / S(5040) - t6 / S(362880);
    c2 = S(1) / S(24) - t2 / S(720) + t4 / S(40320) - t6 / S(3628800);
    c3 = S(1) / S(120) - t2 / S(2520) + t4 / S(120960) - t6 / S(9979200);
    return;
  }
  const S s = std::sin(theta);
  const S c = std::cos(theta);
  c1 = (theta - s) / (t2 * theta);
  c2 = (t2 + S(2) * c - S(2)) / (S(2) * t2 * t2);
  c3 = (S(2) * theta - S(3) * s + theta * c) / (S(2) * t2 * t2 * theta);
}

}  // namespace detail

/// Left Jacobian of the SE(3) exponential: Exp(xi + d) ~ Exp(J_l d) Exp(xi).
template <typename S>
Mat6T<S> se3_left_jacobian(const Vec6T<S>& xi) {
  const Vec3T<S> rho = xi.template head<3>();
  const Vec3T<S> phi = xi.template tail<3>();
  const Mat3T<S> P = skew<S>(phi);
  const Mat3T<S> Rh = skew<S>(rho);
  S c1, c2, c3;
  detail::se3_q_coefficients<S>(phi.norm(), c1, c2, c3);
  const Mat3T<S> PR = P * Rh;
  const Mat3T<S> RP = Rh * P;
  const Mat3T<S> PRP = PR * P;
  const Mat3T<S> Q = S(0.5) * Rh + c1 * (PR + RP + PRP) +
                     c2 * (P * PR + RP * P - S(3) * PRP) +
                     c3 * (PRP * P + P * PRP);
  Mat6T<S> J = Mat6T<S>::Zero();
  const Mat3T<S> Jl = so3_left_jacobian<S>(phi);
  J.template topLeftCorner<3, 3>() = Jl;
  J.template topRightCorner<3, 3>() = Q;
  J.template bottomRightCorner<3, 3>() = Jl;
  return J;
}

/// Right Jacobian: Exp(xi + d) ~ Exp(xi) Exp(J_r d).
template <typename S>
Mat6T<S> se3_right_jacobian(const Vec6T<S>& xi) {
  return se3_left_jacobian<S>(Vec6T<S>(-xi));
}

// ---------------------------------------------------------------------------
// double-precision aliases

using Vec3 = Vec3T<double>;
using Vec4 = Vec4T<double>;
using Vec6 = Vec6T<double>;
using Mat3 = Mat3T<double>;
using Mat4 = Mat4T<double>;
using Mat6 = Mat6T<double>;
using Mat46 = Mat46T<double>;
using Rot3 = Rot3T<double>;
using Pose3 = Pose3T<double>;
using Twist6 = Vec6;
using Cov6 = Mat6;

inline Twist6 make_twist(const Vec3& v, const Vec3& w) {
  Twist6 xi;
  xi << v, w;
  return xi;
}

/// ||A - B||_F on the homogeneous matrices.
inline double chordal_distance(const Pose3& a, const Pose3& b) {
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace lielio
