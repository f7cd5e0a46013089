#include "lielio/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include "json.hpp"

#include "lielio/errors.hpp"

namespace lielio {

namespace fs = std::filesystem;

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v + 0.0);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw InputError("write to '" + path + "' failed");
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

/// Lines without the trailing '\r'; line numbers are 1-based indices + 1.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || b == e) throw InputError(where + ": bad number '" + tok + "'");
  return v;
}

std::string at_line(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

void expect_header(const std::vector<std::string>& lines, const std::string& header,
                   const std::string& path) {
  if (lines.empty() || lines[0] != header) {
    throw InputError(at_line(path, 1) + ": expected header '" + header + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// IMU

std::string imu_csv(const std::vector<ImuSample>& samples) {
  std::string out = "t,gx,gy,gz,ax,ay,az\n";
  for (const ImuSample& s : samples) {
    out += fmt_num(s.t);
    for (int i = 0; i < 3; ++i) out += "," + fmt_num(s.gyro(i));
    for (int i = 0; i < 3; ++i) out += "," + fmt_num(s.acc(i));
    out += "\n";
  }
  return out;
}

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& samples) {
  write_text_file(path, imu_csv(samples));
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  const auto lines = lines_of(read_text_file(path));
  expect_header(lines, "t,gx,gy,gz,ax,ay,az", path);
  std::vector<ImuSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = at_line(path, i + 1);
    const auto f = split(lines[i], ',');
    if (f.size() != 7) throw InputError(where + ": expected 7 fields, got " + std::to_string(f.size()));
    ImuSample s;
    s.t = parse_double(f[0], where);
    for (int c = 0; c < 3; ++c) s.gyro(c) = parse_double(f[1 + c], where);
    for (int c = 0; c < 3; ++c) s.acc(c) = parse_double(f[4 + c], where);
    if (!out.empty() && !(s.t > out.back().t)) {
      throw InputError(where + ": timestamp " + f[0] + " does not increase");
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Points

PointsCsvMode points_mode_from_string(const std::string& s) {
  if (s == "scan_column") return PointsCsvMode::kScanColumn;
  if (s == "per_file") return PointsCsvMode::kPerFile;
  throw ConfigError("unknown points mode '" + s + "'");
}

namespace {

std::string point_row(const RawPoint& p) {
  return fmt_num(p.t) + "," + fmt_num(p.xyz.x()) + "," + fmt_num(p.xyz.y()) + "," +
         fmt_num(p.xyz.z());
}

std::vector<RawPoint> parse_points(const std::vector<std::string>& lines, const std::string& path,
                                   double raw_sigma, std::vector<long long>* scan_ids) {
  std::vector<RawPoint> out;
  const std::size_t n_fields = scan_ids ? 5 : 4;
  const Mat3 sigma = Mat3::Identity() * raw_sigma * raw_sigma;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = at_line(path, i + 1);
    const auto f = split(lines[i], ',');
    if (f.size() != n_fields) {
      throw InputError(where + ": expected " + std::to_string(n_fields) + " fields, got " +
                       std::to_string(f.size()));
    }
    RawPoint p;
    p.t = parse_double(f[0], where);
    for (int c = 0; c < 3; ++c) p.xyz(c) = parse_double(f[1 + c], where);
    p.sigma_raw = sigma;
    if (scan_ids) {
      const double id = parse_double(f[4], where);
      if (id != std::floor(id) || id < 0) throw InputError(where + ": bad scan index '" + f[4] + "'");
      const auto sid = static_cast<long long>(id);
      if (!scan_ids->empty() && sid < scan_ids->back()) {
        throw InputError(where + ": scan index decreases");
      }
      scan_ids->push_back(sid);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::string points_csv(const std::vector<std::vector<RawPoint>>& scans) {
  std::string out = "t,x,y,z,scan\n";
  for (std::size_t s = 0; s < scans.size(); ++s) {
    for (const RawPoint& p : scans[s]) out += point_row(p) + "," + std::to_string(s) + "\n";
  }
  return out;
}

void write_points_csv(const std::string& path, const std::vector<std::vector<RawPoint>>& scans) {
  write_text_file(path, points_csv(scans));
}

void write_points_csv_per_file(const std::string& dir,
                               const std::vector<std::vector<RawPoint>>& scans) {
  fs::create_directories(dir);
  for (std::size_t s = 0; s < scans.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "scan_%06zu.csv", s);
    std::string text = "t,x,y,z\n";
    for (const RawPoint& p : scans[s]) text += point_row(p) + "\n";
    write_text_file((fs::path(dir) / name).string(), text);
  }
}

std::vector<std::vector<RawPoint>> read_points_csv(const std::string& path, double raw_sigma) {
  const auto lines = lines_of(read_text_file(path));
  expect_header(lines, "t,x,y,z,scan", path);
  std::vector<long long> ids;
  const auto pts = parse_points(lines, path, raw_sigma, &ids);
  std::vector<std::vector<RawPoint>> scans;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == 0 || ids[i] != ids[i - 1]) scans.emplace_back();
    scans.back().push_back(pts[i]);
  }
  return scans;
}

std::vector<std::vector<RawPoint>> read_points_dir(const std::string& dir, double raw_sigma) {
  if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("scan_", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::vector<RawPoint>> scans;
  for (const auto& f : files) {
    const auto lines = lines_of(read_text_file(f));
    expect_header(lines, "t,x,y,z", f);
    scans.push_back(parse_points(lines, f, raw_sigma, nullptr));
  }
  return scans;
}

// ---------------------------------------------------------------------------
// TUM trajectories

Vec4 canonical_quaternion(const Mat3& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  Vec4 v(q.x(), q.y(), q.z(), q.w());
  if (std::abs(v(3)) < 1e-12) {
    v(3) = 0.0;
    v.normalize();
    for (int i = 0; i < 3; ++i) {
      if (v(i) != 0.0) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
  } else if (v(3) < 0) {
    v = -v;
  }
  return v;
}

Mat3 quaternion_to_matrix(const Vec4& xyzw) {
  Eigen::Quaterniond q(xyzw(3), xyzw(0), xyzw(1), xyzw(2));
  return q.normalized().toRotationMatrix();
}

std::string trajectory_tum(const std::vector<TumRecord>& recs) {
  std::string out;
  for (const TumRecord& r : recs) {
    const Vec4 q = canonical_quaternion(r.pose.R());
    out += fmt_num(r.t);
    for (int i = 0; i < 3; ++i) out += " " + fmt_num(r.pose.trans()(i));
    for (int i = 0; i < 4; ++i) out += " " + fmt_num(q(i));
    out += "\n";
  }
  return out;
}

void write_trajectory_tum(const std::string& path, const std::vector<TumRecord>& recs) {
  write_text_file(path, trajectory_tum(recs));
}

void write_trajectory_tum(const std::string& path, const std::vector<ScanResult>& results) {
  std::vector<TumRecord> recs;
  recs.reserve(results.size());
  for (const ScanResult& r : results) recs.push_back({r.t, r.posterior.pose});
  write_trajectory_tum(path, recs);
}

std::vector<TumRecord> read_trajectory_tum(const std::string& path) {
  const auto lines = lines_of(read_text_file(path));
  std::vector<TumRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const std::string where = at_line(path, i + 1);
    const auto f = split_ws(lines[i]);
    if (f.size() != 8) throw InputError(where + ": expected 8 fields, got " + std::to_string(f.size()));
    double v[8];
    for (int c = 0; c < 8; ++c) v[c] = parse_double(f[static_cast<std::size_t>(c)], where);
    const Vec4 q(v[4], v[5], v[6], v[7]);
    if (std::abs(q.norm() - 1.0) > 1e-6) throw InputError(where + ": quaternion is not unit");
    out.push_back({v[0], Pose3(quaternion_to_matrix(q), Vec3(v[1], v[2], v[3]))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Result tables

std::string probabilistic_points_csv(const std::vector<std::vector<ProbabilisticPoint>>& scans) {
  std::string out = "scan,t,x,y,z,cxx,cxy,cxz,cyy,cyz,czz\n";
  for (std::size_t s = 0; s < scans.size(); ++s) {
    for (const ProbabilisticPoint& p : scans[s]) {
      out += std::to_string(s) + "," + fmt_num(p.t);
      for (int i = 0; i < 3; ++i) out += "," + fmt_num(p.xyz(i));
      for (int r = 0; r < 3; ++r) {
        for (int c = r; c < 3; ++c) out += "," + fmt_num(p.cov(r, c));
      }
      out += "\n";
    }
  }
  return out;
}

std::string scan_stats_csv(const std::vector<ScanResult>& results) {
  std::string out = "t,n_points,n_residuals,n_rejected,n_unmatched,iterations,updated\n";
  for (const ScanResult& r : results) {
    out += fmt_num(r.t) + "," + std::to_string(r.n_points) + "," + std::to_string(r.n_residuals) +
           "," + std::to_string(r.n_rejected) + "," + std::to_string(r.n_unmatched) + "," +
           std::to_string(r.iterations) + "," + (r.updated ? "1" : "0") + "\n";
  }
  return out;
}

std::string timing_csv(const std::vector<ScanResult>& results) {
  std::string out = "t,propagation_s,undistortion_s,update_s,map_s\n";
  for (const ScanResult& r : results) {
    out += fmt_num(r.t) + "," + fmt_num(r.timing.propagation_s) + "," +
           fmt_num(r.timing.undistortion_s) + "," + fmt_num(r.timing.update_s) + "," +
           fmt_num(r.timing.map_s) + "\n";
  }
  return out;
}

std::string fig2_csv(const std::vector<Fig2Row>& rows) {
  std::string out =
      "step,t,se3_trans_err,se3_rot_err,se3_chordal,base_trans_err,base_rot_err,base_chordal\n";
  for (const Fig2Row& r : rows) {
    out += std::to_string(r.step) + "," + fmt_num(r.t) + "," + fmt_num(r.se3_trans) + "," +
           fmt_num(r.se3_rot) + "," + fmt_num(r.se3_chordal) + "," + fmt_num(r.base_trans) + "," +
           fmt_num(r.base_rot) + "," + fmt_num(r.base_chordal) + "\n";
  }
  return out;
}

namespace {

// nlohmann prints doubles with round-trip precision; route through fmt_num so
// every output file shares one formatting rule.
nlohmann::ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return nlohmann::ordered_json::parse(fmt_num(v));
}

}  // namespace

std::string fig3_json(const McReport& r) {
  nlohmann::ordered_json j;
  j["n_trials"] = r.n_trials;
  j["nees_mean"] = num(r.nees_mean);
  j["nees_ci_low"] = num(r.nees_ci_low);
  j["nees_ci_high"] = num(r.nees_ci_high);
  j["coverage_95"] = num(r.coverage_95);
  j["coverage_95_indep"] = num(r.coverage_95_indep);
  auto& lbs = j["lookbacks"] = nlohmann::ordered_json::array();
  for (const LookbackReport& lb : r.lookbacks) {
    nlohmann::ordered_json e;
    e["entry"] = lb.entry;
    e["lookback"] = lb.lookback;
    e["nees_cross"] = num(lb.nees_cross);
    e["nees_indep"] = num(lb.nees_indep);
    e["coverage_cross"] = num(lb.coverage_cross);
    e["coverage_indep"] = num(lb.coverage_indep);
    e["trace_cross"] = num(lb.cov_cross.trace());
    e["trace_indep"] = num(lb.cov_indep.trace());
    lbs.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::string fig3_lookback_csv(const McReport& r) {
  std::string out = "lookback,variant";
  for (int a = 0; a < 6; ++a) {
    for (int b = a; b < 6; ++b) out += ",c" + std::to_string(a) + std::to_string(b);
  }
  out += "\n";
  for (const LookbackReport& lb : r.lookbacks) {
    for (int v = 0; v < 2; ++v) {
      const Cov6& c = v == 0 ? lb.cov_cross : lb.cov_indep;
      out += std::to_string(lb.lookback) + (v == 0 ? ",cross" : ",indep");
      for (int a = 0; a < 6; ++a) {
        for (int b = a; b < 6; ++b) out += "," + fmt_num(c(a, b));
      }
      out += "\n";
    }
  }
  return out;
}

std::string fig3_samples_csv(const McReport& r) {
  std::string out = "lookback,trial,e0,e1,e2,e3,e4,e5\n";
  for (const LookbackReport& lb : r.lookbacks) {
    for (std::size_t t = 0; t < lb.errors.size(); ++t) {
      out += std::to_string(lb.lookback) + "," + std::to_string(t);
      for (int i = 0; i < 6; ++i) out += "," + fmt_num(lb.errors[t](i));
      out += "\n";
    }
  }
  return out;
}

std::string fig3_trace_csv(const McReport& r) {
  std::string out = "entry,lookback,trace_cross\n";
  const std::size_t k = r.trace_cross.empty() ? 0 : r.trace_cross.size() - 1;
  for (std::size_t j = 0; j < r.trace_cross.size(); ++j) {
    out += std::to_string(j) + "," + std::to_string(k - j) + "," + fmt_num(r.trace_cross[j]) + "\n";
  }
  return out;
}

}  // namespace lielio
