#include "lielio/jointcov.hpp"

#include <stdexcept>
#include <string>

namespace lielio {

PoseHistory::PoseHistory(double t0, const NavState& x0, const Mat15& P0) {
  HistoryEntry e;
  e.t = t0;
  e.state = x0;
  e.P_marginal = P0;
  e.C_to_latest = P0;
  entries_.push_back(e);
}

void PoseHistory::advance(const PropagationStep& step) {
  if (entries_.empty()) throw std::logic_error("PoseHistory::advance on empty history");
  if (!(step.t > entries_.back().t)) {
    throw std::invalid_argument("PoseHistory::advance: step does not follow the last entry");
  }
  const Mat15 Ft = step.F_x.transpose();
  for (auto& e : entries_) e.C_to_latest = (e.C_to_latest * Ft).eval();

  HistoryEntry e;
  e.t = step.t;
  e.state = step.state_after;
  e.P_marginal = step.P_after;
  e.C_to_latest = step.P_after;
  e.F_in = step.F_x;
  e.Q_in = step.Q_d;
  entries_.push_back(std::move(e));
}

PoseHistory advance_history(PoseHistory h, const PropagationStep& step) {
  h.advance(step);
  return h;
}

bool repair_psd(Cov6& m, double* change_norm) {
  const Cov6 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Cov6> es(sym);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() >= 0.0) {
    m = sym;
    if (change_norm) *change_norm = 0.0;
    return false;
  }
  const Vec6 floored = ev.cwiseMax(0.0);
  m = es.eigenvectors() * floored.asDiagonal() * es.eigenvectors().transpose();
  m = 0.5 * (m + m.transpose()).eval();
  if (change_norm) *change_norm = (m - sym).norm();
  // Roundoff-level negatives are floored silently.
  return ev.minCoeff() < -(1e-12 * sym.norm() + 1e-15);
}

Cov6 relative_pose_covariance(const Pose3& rel, const Cov6& sigma_j, const Cov6& sigma_k,
                              const Cov6& sigma_jk, bool with_cross) {
  const Mat6 A = adjoint(rel.inverse());
  Cov6 cov = A * sigma_k * A.transpose() + sigma_j;
  if (with_cross) cov -= A * sigma_jk.transpose() + sigma_jk * A.transpose();
  return cov;
}

RelCovResult relative_cov(const PoseHistory& h, std::size_t j, bool with_cross) {
  if (j >= h.size()) {
    throw std::out_of_range("relative_cov: entry " + std::to_string(j) + " of " +
                            std::to_string(h.size()));
  }
  const HistoryEntry& ej = h[j];
  const HistoryEntry& ek = h.latest();

  RelCovResult r;
  r.rel_pose = ek.pose().inverse() * ej.pose();
  r.used_cross_terms = with_cross;
  r.cov = relative_pose_covariance(r.rel_pose, ej.P_marginal.topLeftCorner<6, 6>(),
                                   ek.P_marginal.topLeftCorner<6, 6>(),
                                   ej.C_to_latest.topLeftCorner<6, 6>(), with_cross);
  r.psd_repaired = repair_psd(r.cov, &r.repair_norm);
  return r;
}

Eigen::MatrixXd stack_joint_covariance(const PoseHistory& h) {
  const std::size_t n = h.size();
  if (n == 0) return {};
  if (n > kMaxDenseEntries) {
    throw std::length_error("stack_joint_covariance: history longer than " +
                            std::to_string(kMaxDenseEntries) + " entries");
  }
  const Eigen::Index N = static_cast<Eigen::Index>(15 * n);

  // Source covariance: initial error followed by the noise injected per step.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
  S.topLeftCorner<15, 15>() = h[0].P_marginal;
  for (std::size_t i = 1; i < n; ++i) S.block<15, 15>(15 * i, 15 * i) = h[i].Q_in;

  // Row i, column m holds the transition from entry m to entry i.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t m = 0; m < n; ++m) {
    Mat15 phi = Mat15::Identity();
    A.block<15, 15>(15 * m, 15 * m) = phi;
    for (std::size_t i = m + 1; i < n; ++i) {
      phi = h[i].F_in * phi;
      A.block<15, 15>(15 * i, 15 * m) = phi;
    }
  }
  Eigen::MatrixXd joint = A * S * A.transpose();
  return 0.5 * (joint + joint.transpose());
}

}  // namespace lielio
