#pragma once

#include <string>
#include <vector>

#include "lielio/sim.hpp"

namespace lielio {

/// "%.9g" with negative zero printed as 0.
std::string fmt_num(double v);

void write_text_file(const std::string& path, const std::string& text);

// IMU: header "t,gx,gy,gz,ax,ay,az".
std::string imu_csv(const std::vector<ImuSample>& samples);
void write_imu_csv(const std::string& path, const std::vector<ImuSample>& samples);
/// Throws InputError naming the line on a parse failure or a timestamp that
/// does not increase.
std::vector<ImuSample> read_imu_csv(const std::string& path);

enum class PointsCsvMode {
  kScanColumn,  // one file, header "t,x,y,z,scan"
  kPerFile,     // one file per scan, header "t,x,y,z"
};

PointsCsvMode points_mode_from_string(const std::string& s);

std::string points_csv(const std::vector<std::vector<RawPoint>>& scans);
void write_points_csv(const std::string& path, const std::vector<std::vector<RawPoint>>& scans);
void write_points_csv_per_file(const std::string& dir, const std::vector<std::vector<RawPoint>>& scans);
/// Every point gets covariance raw_sigma^2 I. Scan indices must not decrease.
std::vector<std::vector<RawPoint>> read_points_csv(const std::string& path, double raw_sigma);
/// All files scan_*.csv in `dir`, in name order.
std::vector<std::vector<RawPoint>> read_points_dir(const std::string& dir, double raw_sigma);

struct TumRecord {
  double t = 0.0;
  Pose3 pose;
};

/// Unit quaternion (x, y, z, w) with w > 0, or for w = 0 the first nonzero
/// component positive.
Vec4 canonical_quaternion(const Mat3& R);
Mat3 quaternion_to_matrix(const Vec4& xyzw);

std::string trajectory_tum(const std::vector<TumRecord>& recs);
void write_trajectory_tum(const std::string& path, const std::vector<ScanResult>& results);
void write_trajectory_tum(const std::string& path, const std::vector<TumRecord>& recs);
std::vector<TumRecord> read_trajectory_tum(const std::string& path);

/// Header "scan,t,x,y,z,cxx,cxy,cxz,cyy,cyz,czz".
std::string probabilistic_points_csv(const std::vector<std::vector<ProbabilisticPoint>>& scans);

std::string scan_stats_csv(const std::vector<ScanResult>& results);
std::string timing_csv(const std::vector<ScanResult>& results);

std::string fig2_csv(const std::vector<Fig2Row>& rows);
std::string fig3_json(const McReport& r);
/// Per lookback: predicted covariances (21 upper-triangle entries each).
std::string fig3_lookback_csv(const McReport& r);
std::string fig3_samples_csv(const McReport& r);
std::string fig3_trace_csv(const McReport& r);

}  // namespace lielio
