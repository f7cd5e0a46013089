#pragma once

// Shared scenario builders for the unit tests.

#include "lielio/sim.hpp"

namespace fixture {

inline lielio::ImuNoiseParams imu_noise() {
  lielio::ImuNoiseParams p;
  p.sigma_gyro = 5e-3;
  p.sigma_acc = 2e-2;
  p.sigma_bg_walk = 1e-4;
  p.sigma_ba_walk = 1e-3;
  return p;
}

/// Noiseless IMU stream of the standard profile at `rate` Hz covering [0, t_end].
inline std::vector<lielio::ImuSample> standard_imu(double t_end, double rate,
                                                   lielio::Vec3* v0 = nullptr,
                                                   lielio::GroundTruth* gt_out = nullptr) {
  const lielio::GroundTruth gt = lielio::ground_truth_trajectory(
      lielio::TwistProfile::standard(), t_end + 2.0 / rate, 1e-4);
  lielio::SyntheticImu imu = lielio::synthesize_imu(gt, lielio::ImuNoiseParams{}, rate, 1);
  std::vector<lielio::ImuSample> out;
  for (const auto& s : imu.samples)
    if (s.t < t_end - 1e-12) out.push_back(s);
  if (v0) *v0 = imu.initial_vel_body;
  if (gt_out) *gt_out = gt;
  return out;
}

/// History over `n` steps of the standard profile, with the given process
/// noise and initial covariance.
inline lielio::PoseHistory standard_history(int n, double dt, const lielio::ImuNoiseParams& p,
                                            const lielio::Mat15& P0) {
  lielio::Vec3 v0;
  const auto imu = standard_imu(n * dt, 1.0 / dt, &v0);
  lielio::NavState x0;
  x0.vel_body = v0;
  lielio::PoseHistory h(0.0, x0, P0);
  for (const auto& s : lielio::propagate_batch(x0, P0, imu, n * dt, p)) h.advance(s);
  return h;
}

}  // namespace fixture
