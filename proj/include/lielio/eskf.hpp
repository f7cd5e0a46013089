#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lielio/planarmap.hpp"
#include "lielio/uamc.hpp"

namespace lielio {

using RowVec15 = Eigen::Matrix<double, 1, 15>;

struct FilterConfig {
  ImuNoiseParams imu_noise;
  ExtrinsicCalib ext;
  int max_update_iters = 3;
  double convergence_eps = 1e-9;
  /// Residuals with r^2 / (noise_var + H P H^T) above this are dropped.
  /// Infinity disables gating.
  double gate_chi2 = 16.0;
  bool with_cross_terms = true;
  bool with_se3_propagation = true;
  /// Fold the relative-transform covariance into the point noise.
  bool with_uamc = true;
  bool interpolate_poses = true;
  /// Transport the posterior covariance into the tangent space at the
  /// posterior mean.
  bool reset_covariance = true;
  PlanarMapConfig map;

  void validate() const;
};

struct PlaneResidual {
  double r = 0.0;
  RowVec15 H = RowVec15::Zero();
  double noise_var = 0.0;
};

/// Point-to-plane residual of an IMU-frame point placed with x.pose.
PlaneResidual residual_and_jacobians(const NavState& x, const ProbabilisticPoint& pt,
                                     const PlaneFeature& plane);

/// Normal-equation solve of one iteration:
///   dx = -(P^-1 + H^T R^-1 H)^-1 (P^-1 delta + H^T R^-1 z),
/// where delta is the current offset from the prior and R = diag(r_var).
Eigen::VectorXd map_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& delta,
                              const Eigen::MatrixXd& H, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& r_var);

/// Joseph-form posterior (I-KH) P (I-KH)^T + K R K^T, symmetrized.
Eigen::MatrixXd joseph_posterior(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                                 const Eigen::VectorXd& r_var);

struct UpdateResult {
  NavState x_post;
  Mat15 P_post = Mat15::Zero();
  Mat15 P_joseph = Mat15::Zero();  // before the tangent-space reset
  Vec15 delta = Vec15::Zero();     // x_post boxminus x_prior
  int iterations = 0;
  bool converged = false;
};

/// Iterated update against fixed plane associations. Each point is
/// re-linearized about the current iterate.
UpdateResult update(const NavState& x_prior, const Mat15& P_prior,
                    std::span<const ProbabilisticPoint> pts, std::span<const PlaneFeature> planes,
                    const FilterConfig& cfg);

/// Samples driving [t_prev, t_k) for one scan. `imu` holds the samples in
/// (t_prev, t_k]; the sample at or before t_prev (else `held`, else the first
/// new one) is re-timed to t_prev. A sample at exactly t_k is left for the
/// next window. Throws InputError on an empty or misaligned span.
std::vector<ImuSample> scan_imu_window(std::span<const ImuSample> imu,
                                       const std::optional<ImuSample>& held, double t_prev,
                                       double t_k);

struct ScanTiming {
  double propagation_s = 0.0;
  double undistortion_s = 0.0;
  double update_s = 0.0;
  double map_s = 0.0;
};

struct ScanResult {
  double t = 0.0;
  NavState posterior;
  Mat15 P_post = Mat15::Zero();
  std::size_t n_points = 0;
  std::size_t n_residuals = 0;
  std::size_t n_rejected = 0;  // gated out
  std::size_t n_unmatched = 0;
  int iterations = 0;
  bool updated = false;  // false for the map-seeding scan or when nothing survived gating
  ScanTiming timing;
};

class Filter {
 public:
  Filter(FilterConfig cfg, double t0, const NavState& x0, const Mat15& P0);

  /// One scan: propagate over the IMU samples in (t_prev, t_k], deskew, match,
  /// update, and insert the deskewed points into the map. t_k is the latest
  /// point time. The first scan only seeds the map.
  ScanResult process_scan(std::span<const ImuSample> imu, const std::vector<RawPoint>& scan);

  const FilterConfig& config() const { return cfg_; }
  double time() const { return t_; }
  const NavState& state() const { return x_; }
  const Mat15& covariance() const { return P_; }
  const PlanarMap& map() const { return map_; }

 private:
  FilterConfig cfg_;
  double t_;
  NavState x_;
  Mat15 P_;
  PlanarMap map_;
  std::optional<ImuSample> held_;  // last sample seen, drives the start of the next window
};

}  // namespace lielio
