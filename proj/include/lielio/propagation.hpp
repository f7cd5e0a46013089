#pragma once

#include <span>
#include <vector>

#include "lielio/state.hpp"

namespace lielio {

enum class PropagationModel { kSe3, kBaseline };

/// One propagation step. F_x and F_w are expressed in the SE(3)-tangent error
/// coordinates of NavState regardless of which model produced the step.
struct PropagationStep {
  double t = 0.0;  // time at the end of the step
  double dt = 0.0;
  NavState state_after;
  Mat15 F_x = Mat15::Identity();
  Mat15x12 F_w = Mat15x12::Zero();
  Mat15 P_after = Mat15::Zero();
  Mat15 Q_d = Mat15::Zero();  // F_w Q F_w^T
};

/// Process noise realization for one step, in the integrated-increment units
/// that discrete_process_noise describes:
///   gyro: angle increment (rad), acc: velocity increment (m/s),
///   bias walks: bias increments.
using ProcessNoise = Vec12;

/// SE(3) propagation: T' = T Exp((v, w) dt),
///                    v' = Exp(-w dt) (v + (a + R^T g) dt).
NavState propagate_se3(const NavState& x, const ImuSample& u, const ImuNoiseParams& p, double dt,
                       const ProcessNoise& w = ProcessNoise::Zero());

/// Conventional propagation with separate rotation/translation.
BaselineNavState propagate_baseline(const BaselineNavState& x, const ImuSample& u,
                                    const ImuNoiseParams& p, double dt,
                                    const ProcessNoise& w = ProcessNoise::Zero());

/// Either model applied to a NavState (the baseline round-trips through
/// BaselineNavState).
NavState propagate(PropagationModel model, const NavState& x, const ImuSample& u,
                   const ImuNoiseParams& p, double dt,
                   const ProcessNoise& w = ProcessNoise::Zero());

struct ErrorJacobians {
  Mat15 F_x;
  Mat15x12 F_w;
};

/// Jacobians of f(x boxplus dx, u, w) boxminus f(x, u, 0) at dx = 0, w = 0.
ErrorJacobians error_jacobians(const NavState& x, const ImuSample& u, const ImuNoiseParams& p,
                               double dt);

/// Same map for the baseline model, conjugated into NavState error coordinates.
ErrorJacobians error_jacobians_baseline(const NavState& x, const ImuSample& u,
                                        const ImuNoiseParams& p, double dt);

ErrorJacobians error_jacobians(PropagationModel model, const NavState& x, const ImuSample& u,
                               const ImuNoiseParams& p, double dt);

/// F_x P F_x^T + F_w Q F_w^T, symmetrized.
Mat15 propagate_covariance(const Mat15& P, const Mat15& F_x, const Mat15x12& F_w, const Mat12& Q);

/// Propagates over a sample stream. Sample i drives [t_i, t_{i+1}) with
/// t_n = t_end; the initial state is at imu.front().t. Throws
/// std::invalid_argument on an empty stream or non-increasing timestamps.
std::vector<PropagationStep> propagate_batch(const NavState& x0, const Mat15& P0,
                                             std::span<const ImuSample> imu, double t_end,
                                             const ImuNoiseParams& p,
                                             PropagationModel model = PropagationModel::kSe3);

}  // namespace lielio
