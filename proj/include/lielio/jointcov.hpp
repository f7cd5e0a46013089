#pragma once

#include <cstddef>
#include <vector>

#include "lielio/propagation.hpp"

namespace lielio {

/// One predicted state inside a scan interval.
struct HistoryEntry {
  double t = 0.0;
  NavState state;
  Mat15 P_marginal = Mat15::Zero();
  /// Cov(dx_this, dx_latest).
  Mat15 C_to_latest = Mat15::Zero();
  /// Transition and injected noise of the step that produced this entry
  /// (identity / zero for the first entry). Kept for the dense oracle.
  Mat15 F_in = Mat15::Identity();
  Mat15 Q_in = Mat15::Zero();

  const Pose3& pose() const { return state.pose; }
};

/// Joint distribution of all predicted error states since the last update,
/// kept as marginals plus cross-covariances to the newest entry.
class PoseHistory {
 public:
  PoseHistory() = default;
  PoseHistory(double t0, const NavState& x0, const Mat15& P0);

  /// Appends the state produced by `step`; every stored cross block is
  /// carried forward as C <- C F_x^T.
  void advance(const PropagationStep& step);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const HistoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const HistoryEntry& latest() const { return entries_.back(); }
  const std::vector<HistoryEntry>& entries() const { return entries_; }

  void clear() { entries_.clear(); }

 private:
  std::vector<HistoryEntry> entries_;
};

PoseHistory advance_history(PoseHistory h, const PropagationStep& step);

struct RelCovResult {
  Pose3 rel_pose;  // T_latest^{-1} T_j
  Cov6 cov = Cov6::Zero();
  bool used_cross_terms = false;
  bool psd_repaired = false;
  double repair_norm = 0.0;  // ||cov_raw_sym - cov||_F when repaired
};

/// Covariance of the relative transform from the latest entry to entry j,
/// truncated after the second-order terms. Throws std::out_of_range.
RelCovResult relative_cov(const PoseHistory& h, std::size_t j, bool with_cross);

/// Pose-block combination used by relative_cov, exposed for direct testing:
///   A S_k A^T + S_j - (A S_jk^T + S_jk A^T) with A = Ad(rel^{-1}).
Cov6 relative_pose_covariance(const Pose3& rel, const Cov6& sigma_j, const Cov6& sigma_k,
                              const Cov6& sigma_jk, bool with_cross);

/// Symmetrizes and floors eigenvalues at zero. Returns true if any eigenvalue
/// had to be raised.
bool repair_psd(Cov6& m, double* change_norm = nullptr);

/// Upper bound on history length accepted by stack_joint_covariance.
inline constexpr std::size_t kMaxDenseEntries = 200;

/// Explicit (15n x 15n) joint covariance built from the block-triangular
/// stacking of transitions and injected noises. Test oracle only.
Eigen::MatrixXd stack_joint_covariance(const PoseHistory& h);

}  // namespace lielio
