// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Usage: acceptance <path-to-lielio-binary> [--skip-ablation]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "lielio/eskf.hpp"
#include "lielio/io.hpp"
#include "lielio/jointcov.hpp"
#include "lielio/sim.hpp"
#include "lielio/uamc.hpp"
#include "oracles.hpp"

using namespace lielio;
namespace fs = std::filesystem;

namespace {

// Regression values recorded from the first verified run.
namespace frozen {
constexpr double kFig2BaseTransStep1 = 6.83378189e-06;   // m
constexpr double kFig2BaseTransStep10 = 4.06620030e-04;  // m
constexpr double kFig2RelTol = 1e-6;
constexpr double kFig2Se3TransMax = 1e-12;  // m, every step

// Median ATE over seeds 1..20 (m) and the allowed relative drift.
constexpr double kAteSe3Uamc = 0.00577837804;
constexpr double kAteSe3 = 0.00738097986;
constexpr double kAteBaseline = 0.00921933528;
constexpr double kAteRelTol = 0.02;
}  // namespace frozen

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome lie_exactness() {
  oracle::Rng rng(101);
  double roundtrip = 0, homo = 0, dot = 0, bracket = 0, expad = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec6 xi = rng.twist(3.0, 2.0);
    const Pose3 T = se3_exp(xi);
    roundtrip = std::max(roundtrip, (se3_log(T) - xi).norm() / std::max(1.0, xi.norm()));
    roundtrip = std::max(roundtrip, (se3_exp(se3_log(T)).matrix() - T.matrix()).norm() /
                                        std::max(1.0, T.matrix().norm()));

    const Pose3 U = rng.pose();
    const Mat6 AB = adjoint(T * U), AA = adjoint(T) * adjoint(U);
    homo = std::max(homo, (AB - AA).norm() / AB.norm());

    const Vec4 ph = homogeneous(rng.vec3(5.0));
    const Vec6 eta = rng.vec6();
    dot = std::max(dot, (se3_hat(eta) * ph - dot_operator(ph) * eta).norm() /
                            std::max(1.0, eta.norm() * ph.norm()));

    // [hat(xi), hat(eta)] = hat(ad(xi) eta), and its integrated form
    // Ad(exp(xi)) = exp(ad(xi)).
    const Mat4 comm = se3_hat(xi) * se3_hat(eta) - se3_hat(eta) * se3_hat(xi);
    const Vec6 ad_eta = curly_wedge(xi) * eta;
    bracket = std::max(bracket, (comm - se3_hat(ad_eta)).norm() / std::max(1.0, comm.norm()));
    const Mat6 e = Mat6(curly_wedge(xi)).exp();
    const Mat6 a = adjoint(T);
    expad = std::max(expad, (e - a).norm() / a.norm());
  }
  const bool ok = roundtrip < 1e-9 && homo < 1e-12 && dot < 1e-12 && bracket < 1e-12 && expad < 1e-9;
  return {ok, fmt("roundtrip %.2e (<1e-9), Ad homomorphism %.2e (<1e-12), dot identity %.2e "
                  "(<1e-12), bracket %.2e (<1e-12), exp(ad) vs Ad %.2e (<1e-9)",
                  roundtrip, homo, dot, bracket, expad)};
}

Outcome translation_identity() {
  oracle::Rng rng(202);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = so3_exp(rng.rotvec(3.1)).matrix();
    const Vec3 w = rng.vec3(3.0), v = rng.vec3(5.0);
    const double dt = rng.uniform(1e-4, 0.1);
    const Vec3 lhs = R * so3_left_jacobian(Vec3(w * dt)) * v * dt;
    const Vec3 rhs = so3_left_jacobian(Vec3(R * w * dt)) * R * v * dt;
    worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, (v * dt).norm()));
  }
  return {worst < 1e-12, fmt("max deviation %.2e over 1e4 inputs (<1e-12)", worst)};
}

Outcome fig2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_fig2_experiment(Fig2Params{});
  const double rt = seconds_since(t0);
  bool ok = rows.size() == 10;
  for (const Fig2Row& r : rows) {
    ok &= r.se3_trans <= r.base_trans && r.se3_chordal <= r.base_chordal;
    ok &= r.se3_rot <= r.base_rot + 1e-15;
    ok &= r.se3_trans < frozen::kFig2Se3TransMax;
  }
  const Fig2Row& first = rows.front();
  const Fig2Row& last = rows.back();
  ok &= last.base_trans >= 2 * last.se3_trans && last.se3_chordal < last.base_chordal;
  const double d1 = std::abs(first.base_trans / frozen::kFig2BaseTransStep1 - 1);
  const double d10 = std::abs(last.base_trans / frozen::kFig2BaseTransStep10 - 1);
  ok &= d1 < frozen::kFig2RelTol && d10 < frozen::kFig2RelTol && rt < 1.0;

  // Informational: IMU synthesized from the interval-mean twist instead.
  Fig2Params tm;
  tm.synthesis = ImuSynthesis::kTwistMean;
  const auto rows_tm = run_fig2_experiment(tm);
  return {ok, fmt("final trans err se3 %.3e vs baseline %.3e m; frozen drift %.1e/%.1e; "
                  "%.3f s (<1 s); twist-mean synthesis final %.3e vs %.3e (info)",
                  last.se3_trans, last.base_trans, d1, d10, rt, rows_tm.back().se3_trans,
                  rows_tm.back().base_trans)};
}

Outcome jacobians() {
  const auto t0 = std::chrono::steady_clock::now();
  oracle::Rng rng(404);
  ImuNoiseParams p;
  p.sigma_gyro = 0.01;
  p.sigma_acc = 0.1;
  p.sigma_bg_walk = 1e-3;
  p.sigma_ba_walk = 1e-2;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const NavState x = rng.nav_state();
    const ImuSample u = rng.imu();
    const double dt = rng.uniform(0.002, 0.02);
    for (PropagationModel m : {PropagationModel::kSe3, PropagationModel::kBaseline}) {
      const NavState ref = propagate(m, x, u, p, dt);
      const ErrorJacobians J = error_jacobians(m, x, u, p, dt);
      const Eigen::MatrixXd fx = oracle::central_diff(
          [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
            return boxminus(propagate(m, boxplus(x, Vec15(d)), u, p, dt), ref).vector();
          },
          15);
      const Eigen::MatrixXd fw = oracle::central_diff(
          [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
            return boxminus(propagate(m, x, u, p, dt, ProcessNoise(w)), ref).vector();
          },
          12);
      worst = std::max({worst, oracle::rel_err(J.F_x, fx), oracle::rel_err(J.F_w, fw)});
    }

    ProbabilisticPoint pt;
    pt.xyz = rng.vec3(5.0);
    pt.cov = Mat3::Identity() * 1e-4;
    PlaneFeature pl;
    pl.normal = rng.vec3().normalized();
    pl.centroid = rng.vec3(3.0);
    const PlaneResidual pr = residual_and_jacobians(x, pt, pl);
    const Eigen::MatrixXd fh = oracle::central_diff(
        [&](const Eigen::VectorXd& d) {
          return Eigen::VectorXd::Constant(1, residual_and_jacobians(boxplus(x, Vec15(d)), pt, pl).r);
        },
        15);
    worst = std::max(worst, oracle::rel_err(pr.H, fh));
  }
  const double rt = seconds_since(t0);
  return {worst < 1e-5 && rt < 10.0,
          fmt("max relative error %.2e over 100 states, F_x/F_w both models and H (<1e-5); "
              "%.2f s (<10 s)",
              worst, rt)};
}

Outcome joint_covariance() {
  oracle::Rng rng(505);
  const ImuNoiseParams p = fixture::imu_noise();
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ImuSample> imu(20);
    for (int i = 0; i < 20; ++i) {
      imu[i] = rng.imu();
      imu[i].t = 0.01 * i;
    }
    const NavState x0 = rng.nav_state();
    Eigen::Matrix<double, 15, 15> a;
    for (int i = 0; i < 15; ++i)
      for (int j = 0; j < 15; ++j) a(i, j) = rng.normal();
    Mat15 P0 = 1e-4 * (a * a.transpose() / 15.0 + Mat15::Identity());
    P0 = 0.5 * (P0 + P0.transpose()).eval();
    const auto steps = propagate_batch(x0, P0, imu, 0.2, p);

    // Dense stacking by explicit products of the stored transition matrices.
    const int n = static_cast<int>(steps.size());
    std::vector<Mat15> marg(n + 1);
    marg[0] = P0;
    for (int k = 0; k < n; ++k) marg[k + 1] = steps[k].P_after;
    PoseHistory h(0.0, x0, P0);
    for (const auto& s : steps) h.advance(s);
    const Eigen::MatrixXd dense = stack_joint_covariance(h);
    for (int j = 0; j <= n; ++j) {
      Mat15 phi = Mat15::Identity();
      for (int k = n - 1; k >= j; --k) phi = phi * steps[k].F_x;
      const Mat15 cross = marg[j] * phi.transpose();  // Cov(x_j, x_n)
      const double scale = marg[j].norm();
      worst = std::max(worst, (dense.block(15 * j, 15 * n, 15, 15) - cross).norm() / scale);
      worst = std::max(worst, (dense.block(15 * j, 15 * j, 15, 15) - marg[j]).norm() / scale);
      worst = std::max(worst, (h[j].C_to_latest - cross).norm() / scale);
    }
  }
  return {worst < 1e-12, fmt("max relative deviation %.2e, 50 trials x 20 steps (<1e-12)", worst)};
}

Outcome fig3() {
  const auto t0 = std::chrono::steady_clock::now();
  const Fig3Params prm;
  const McReport rep = run_fig3_experiment(prm);
  const double rt = seconds_since(t0);
  // Exact chi-square(6n)/n bounds.
  const boost::math::chi_squared dist(6.0 * prm.n_trials);
  const double lo = boost::math::quantile(dist, 0.005) / prm.n_trials;
  const double hi = boost::math::quantile(dist, 0.995) / prm.n_trials;
  double cov_min = 1.0;
  for (const LookbackReport& lb : rep.lookbacks) cov_min = std::min(cov_min, lb.coverage_indep);
  const bool ok = prm.n_trials == 1000 && prm.n_inputs == 100 && !rep.lookbacks.empty() &&
                  rep.nees_mean > lo && rep.nees_mean < hi && cov_min > 0.95 && rt < 60.0;
  return {ok, fmt("NEES mean %.4f in [%.4f, %.4f]; min independence coverage %.3f (>0.95) over "
                  "%zu lookbacks; %.1f s (<60 s)",
                  rep.nees_mean, lo, hi, cov_min, rep.lookbacks.size(), rt)};
}

Outcome lookback_monotone() {
  const PoseHistory h =
      fixture::standard_history(100, 0.01, fixture::imu_noise(), Mat15::Identity() * 1e-4);
  double prev = std::numeric_limits<double>::infinity();
  int violations = 0, repaired = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const RelCovResult r = relative_cov(h, j, true);
    repaired += r.psd_repaired;
    const double tr = r.cov.trace();
    violations += tr > prev;
    prev = tr;
  }
  const double first = relative_cov(h, 0, true).cov.trace();
  return {violations == 0 && h.size() == 101 && first > 0,
          fmt("%d increases over 100 lookbacks; trace %.3e at the oldest entry; %d PSD repairs",
              violations, first, repaired)};
}

Outcome uamc() {
  oracle::Rng rng(808);
  double worst = 0;
  for (int c = 0; c < 5; ++c) {
    const Pose3 rel(so3_exp(rng.rotvec(0.3)), rng.vec3(0.3));
    const Vec3 p = rng.vec3(6.0);
    Vec6 sd;
    for (int k = 0; k < 3; ++k) sd(k) = rng.uniform(0.005, 0.02);
    for (int k = 3; k < 6; ++k) sd(k) = rng.uniform(0.005, 0.02);
    const double raw_sd = 0.01;
    const Mat3 pred = undistorted_covariance(rel, p, Cov6(sd.cwiseAbs2().asDiagonal()), rel.R(),
                                             Mat3::Identity() * raw_sd * raw_sd);
    const int n = 20000;
    std::vector<Vec3> xs(n);
    Vec3 mean = Vec3::Zero();
    for (Vec3& x : xs) {
      Vec6 d;
      for (int k = 0; k < 6; ++k) d(k) = sd(k) * rng.normal();
      x = rel * se3_exp(d) * (p + rng.vec3(raw_sd));
      mean += x / n;
    }
    Mat3 emp = Mat3::Zero();
    for (const Vec3& x : xs) emp += (x - mean) * (x - mean).transpose() / (n - 1);
    worst = std::max(worst, oracle::rel_err(emp, pred));
  }

  const PoseHistory h =
      fixture::standard_history(10, 0.01, fixture::imu_noise(), Mat15::Identity() * 1e-4);
  std::vector<RawPoint> scan;
  for (int i = 0; i <= 100; ++i) {
    RawPoint pt;
    pt.xyz = Vec3(6, -2, 1);
    pt.t = 0.001 * i;
    pt.sigma_raw = Mat3::Identity() * 1e-6;
    scan.push_back(pt);
  }
  const auto out = undistort_scan(scan, h, ExtrinsicCalib{});
  const double early = out.front().cov.trace(), late = out.back().cov.trace();
  return {worst < 0.2 && early > late,
          fmt("max Frobenius deviation %.3f over 5 configurations (<0.2); trace early %.3e > late %.3e",
              worst, early, late)};
}

Outcome fixed_point() {
  SyntheticLioParams p;
  p.profile = TwistProfile::constant(Twist6::Zero());
  p.imu_truth = ImuNoiseParams{};
  p.lidar.raw_sigma = 0.0;
  p.duration = 5.0;
  SyntheticDataset ds = make_synthetic_dataset(p, ExtrinsicCalib{}, 1);
  for (auto& scan : ds.scans)
    for (RawPoint& q : scan) q.sigma_raw = Mat3::Identity() * 1e-12;
  FilterConfig c;
  c.imu_noise.sigma_gyro = 1e-6;
  c.imu_noise.sigma_acc = 1e-6;
  c.imu_noise.sigma_bg_walk = 1e-8;
  c.imu_noise.sigma_ba_walk = 1e-8;
  c.map.max_plane_mse = 1e-12;
  const LioRun run = run_filter(ds, c, Mat15::Identity() * 1e-12);
  double worst = 0;
  for (std::size_t i = 0; i < run.results.size(); ++i)
    worst = std::max(worst, se3_log(run.truth[i].inverse() * run.results[i].posterior.pose).norm());
  return {run.results.size() >= 50 && worst < 1e-9,
          fmt("max pose error %.2e over %zu scans (<1e-9)", worst, run.results.size())};
}

double quantile(std::vector<double> x, double f) {
  std::sort(x.begin(), x.end());
  const double i = f * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(i);
  const double w = i - static_cast<double>(lo);
  return lo + 1 < x.size() ? x[lo] * (1 - w) + x[lo + 1] * w : x[lo];
}

Outcome ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  const SyntheticLioParams p;
  FilterConfig base;
  base.imu_noise = p.imu_truth;
  const Mat15 P0 = Mat15::Identity() * 1e-6;
  std::vector<double> ate[3];  // se3 + uamc, se3, baseline
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SyntheticDataset ds = make_synthetic_dataset(p, ExtrinsicCalib{}, seed);
    for (int v = 0; v < 3; ++v) {
      FilterConfig c = base;
      c.with_uamc = v == 0;
      c.with_se3_propagation = v != 2;
      ate[v].push_back(run_filter(ds, c, P0).ate);
    }
  }
  const double rt = seconds_since(t0);
  double med[3], iqr[3];
  for (int v = 0; v < 3; ++v) {
    med[v] = quantile(ate[v], 0.5);
    iqr[v] = quantile(ate[v], 0.75) - quantile(ate[v], 0.25);
  }
  const double max_iqr = std::max({iqr[0], iqr[1], iqr[2]});
  const double gap = med[2] - med[1];
  const double frz[3] = {frozen::kAteSe3Uamc, frozen::kAteSe3, frozen::kAteBaseline};
  double drift = 0;
  for (int v = 0; v < 3; ++v) drift = std::max(drift, std::abs(med[v] / frz[v] - 1));
  const bool ok = med[0] <= med[1] && med[1] <= med[2] && gap > max_iqr &&
                  drift < frozen::kAteRelTol && rt < 300.0;
  return {ok, fmt("median ATE %.9g / %.9g / %.9g m (se3+uamc, se3, baseline); gap %.3e > max IQR "
                  "%.3e; frozen drift %.1e (<%.0e); %.1f s (<300 s)",
                  med[0], med[1], med[2], gap, max_iqr, drift, frozen::kAteRelTol, rt)};
}

// ---------------------------------------------------------------------------
// Determinism through the command-line tool.

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Runs `args` twice into fresh directories; returns a mismatch message or "".
std::string run_twice(const std::string& tool, const fs::path& root, const std::string& name,
                      const std::string& args) {
  std::string dirs[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path out = root / (name + "_" + std::to_string(r));
    fs::remove_all(out);
    dirs[r] = out.string();
    const std::string cmd = "\"" + tool + "\" " + args + " --out \"" + dirs[r] + "\" > \"" +
                            (root / (name + ".log")).string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return name + ": command failed";
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    const fs::path other = fs::path(dirs[1]) / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      return name + ": " + e.path().filename().string() + " differs";
    }
    ++files;
  }
  if (files == 0) return name + ": no outputs";
  return "";
}

Outcome determinism(const std::string& tool) {
  const fs::path root = fs::temp_directory_path() / "lielio_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  // File inputs exported from a short synthetic run.
  SyntheticLioParams p;
  p.duration = 2.0;
  p.lidar.points_per_scan = 1000;
  const SyntheticDataset ds = make_synthetic_dataset(p, ExtrinsicCalib{}, 9);
  std::vector<ImuSample> imu;
  for (const auto& span : ds.imu_per_scan)
    for (const ImuSample& s : span)
      if (imu.empty() || s.t > imu.back().t) imu.push_back(s);
  write_imu_csv((root / "imu.csv").string(), imu);
  write_points_csv((root / "points.csv").string(), ds.scans);
  fs::create_directories(root / "scans");
  write_points_csv_per_file((root / "scans").string(), ds.scans);

  std::ofstream(root / "short.json")
      << R"({"synthetic": {"duration": 2.0}, "lidar": {"points_per_scan": 1000},
             "output": {"write_timing": false}})";
  std::ofstream(root / "per_file.json") << R"({"input": {"points_mode": "per_file"}})";
  const std::string files = " --imu \"" + (root / "imu.csv").string() + "\" --points \"" +
                            (root / "points.csv").string() + "\"";
  const std::string dir_files = " --imu \"" + (root / "imu.csv").string() + "\" --points \"" +
                                (root / "scans").string() + "\" --config \"" +
                                (root / "per_file.json").string() + "\"";
  const std::string short_cfg = " --config \"" + (root / "short.json").string() + "\"";

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"fig2", "fig2"},
      {"fig3", "fig3 --seed 5"},
      {"undistort_synthetic", "undistort --synthetic --seed 3" + short_cfg},
      {"lio_synthetic", "lio --synthetic --seed 3" + short_cfg},
      {"undistort_file", "undistort" + files},
      {"lio_file", "lio" + files},
      {"lio_dir", "lio" + dir_files},
  };
  std::string names;
  for (const auto& [name, args] : cmds) {
    const std::string err = run_twice(tool, root, name, args);
    if (!err.empty()) return {false, err};
    names += (names.empty() ? "" : ", ") + name;
  }
  fs::remove_all(root);
  return {true, "byte-identical outputs across two runs: " + names};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <lielio binary> [--skip-ablation]\n", argv[0]);
    return 2;
  }
  const std::string tool = argv[1];
  const bool skip_ablation = argc > 2 && std::string(argv[2]) == "--skip-ablation";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"lie-group exactness", lie_exactness},
      {"translation propagation identity", translation_identity},
      {"propagation error vs ground truth", fig2},
      {"jacobians vs finite differences", jacobians},
      {"joint covariance equivalence", joint_covariance},
      {"relative-pose covariance consistency", fig3},
      {"lookback monotonicity", lookback_monotone},
      {"deskew covariance validity", uamc},
      {"filter fixed point", fixed_point},
      {"ablation ordering", ablation},
      {"determinism", [&] { return determinism(tool); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, fn] = criteria[i];
    if (skip_ablation && name == "ablation ordering") {
      std::printf("SKIP %2zu %s\n", i + 1, name.c_str());
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s [%.2f s]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, name.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
