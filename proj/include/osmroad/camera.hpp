#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "osmroad/error.hpp"

namespace osmroad {

using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Pinhole camera with KITTI-style calibration. Points in the Lidar frame map to pixels
/// through P * R_rect * T_velo_cam. The vehicle ground frame (x forward, y left, z up)
/// has its origin on the ground directly below the Lidar, `ground_height` meters down.
struct CameraModel {
  Mat34 P = Mat34::Zero();
  Eigen::Matrix4d R_rect = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d T_velo_cam = Eigen::Matrix4d::Identity();
  int image_w = 1242;
  int image_h = 375;
  double ground_height = 1.73;

  /// Full Lidar-to-image chain.
  Mat34 velo_to_image() const { return P * R_rect * T_velo_cam; }

  /// Ground point (x, y) in the vehicle frame as a homogeneous Lidar-frame point.
  Eigen::Vector4d ground_to_velo(double x, double y) const { return {x, y, -ground_height, 1.0}; }

  void validate() const {
    Eigen::FullPivLU<Mat34> lu(P);
    lu.setThreshold(1e-9);
    if (lu.rank() < 3) throw Error(Errc::degenerate_projection, "projection matrix has rank < 3");
    if (image_w <= 0 || image_h <= 0) throw Error(Errc::invalid_argument, "empty image size");
  }
};

/// Pinhole projection matrix from intrinsics, no stereo offset.
inline Mat34 intrinsic_projection(double f, double cx, double cy) {
  Mat34 P = Mat34::Zero();
  P(0, 0) = f;
  P(1, 1) = f;
  P(0, 2) = cx;
  P(1, 2) = cy;
  P(2, 2) = 1.0;
  return P;
}

/// Rotation taking the Lidar axes (x forward, y left, z up) to camera axes
/// (x right, y down, z forward).
inline Eigen::Matrix4d velo_to_camera_axes() {
  Eigen::Matrix4d T = Eigen::Matrix4d::Zero();
  T(0, 1) = -1.0;
  T(1, 2) = -1.0;
  T(2, 0) = 1.0;
  T(3, 3) = 1.0;
  return T;
}

namespace detail {

inline std::map<std::string, std::vector<double>> read_calib_entries(std::istream& in) {
  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.erase(0, 1);
    std::istringstream ls(line.substr(colon + 1));
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    entries[key] = std::move(values);
  }
  return entries;
}

}  // namespace detail

/// Parses a KITTI calibration file: `P2` (12 values), `R0_rect` (9), `Tr_velo_to_cam` (12),
/// all row-major, plus an optional `ground_height` (Lidar height above the road, meters).
inline CameraModel parse_calibration(std::istream& in, const std::string& name = "calib") {
  const auto entries = detail::read_calib_entries(in);
  auto get = [&](const char* key, std::size_t n) -> const std::vector<double>& {
    auto it = entries.find(key);
    if (it == entries.end()) throw Error(Errc::io_error, name + ": missing " + key);
    if (it->second.size() != n) {
      throw Error(Errc::io_error, name + ": " + key + " needs " + std::to_string(n) + " values");
    }
    return it->second;
  };
  CameraModel cam;
  const auto& p = get("P2", 12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) cam.P(r, c) = p[static_cast<std::size_t>(r * 4 + c)];
  const auto& rr = get("R0_rect", 9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.R_rect(r, c) = rr[static_cast<std::size_t>(r * 3 + c)];
  const auto& t = get("Tr_velo_to_cam", 12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) cam.T_velo_cam(r, c) = t[static_cast<std::size_t>(r * 4 + c)];
  if (auto it = entries.find("ground_height"); it != entries.end() && it->second.size() == 1) {
    cam.ground_height = it->second.front();
  }
  cam.validate();
  return cam;
}

inline CameraModel load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return parse_calibration(in, path.string());
}

}  // namespace osmroad
