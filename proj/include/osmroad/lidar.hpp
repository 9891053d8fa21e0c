#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osmroad/camera.hpp"
#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"
#include "osmroad/morphology.hpp"
#include "osmroad/png_io.hpp"

namespace osmroad {

struct LidarPoint {
  float x = 0;
  float y = 0;
  float z = 0;
  float reflectance = 0;
};

using PointCloud = std::vector<LidarPoint>;

struct GroundSegConfig {
  int n_sectors = 180;
  double bin_size = 0.5;       // m
  double max_slope_deg = 10.0;
  double height_tol = 0.3;     // m
  int fill_radius = 5;         // px
  double sensor_height = 1.73; // m above the road; anchors each sector's ground line at r = 0

  void validate() const {
    if (n_sectors < 1 || bin_size <= 0 || max_slope_deg <= 0 || height_tol <= 0 ||
        fill_radius < 0 || sensor_height < 0) {
      throw Error(Errc::invalid_argument, "ground segmentation parameters must be positive");
    }
  }
};

/// KITTI Velodyne scan: little-endian float32 quadruples (x, y, z, reflectance).
inline PointCloud load_velodyne(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 16 != 0) {
    throw Error(Errc::truncated_scan,
                std::to_string(bytes.size()) + " bytes is not a multiple of 16");
  }
  PointCloud cloud(bytes.size() / 16);
  auto read = [&](std::size_t offset) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data() + offset, 4);
    if constexpr (std::endian::native == std::endian::big) {
      u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
    }
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud[i] = {read(16 * i), read(16 * i + 4), read(16 * i + 8), read(16 * i + 12)};
  }
  return cloud;
}

inline PointCloud read_velodyne(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return load_velodyne(bytes);
}

/// Sector-wise ground segmentation. Each sector's points are bucketed by range; the
/// lowest point of each bucket is a ground candidate, accepted when the piece joining it
/// to the previously accepted candidate (initially the road point below the sensor) has
/// slope at most max_slope_deg. A point is ground iff it lies within height_tol of the
/// resulting piecewise-linear profile and its bucket's height extent is at most
/// height_tol; buckets with a larger extent hold an obstacle and are non-ground.
inline std::vector<std::uint8_t> segment_ground(const PointCloud& cloud,
                                                const GroundSegConfig& cfg = {}) {
  cfg.validate();
  std::vector<std::uint8_t> ground(cloud.size(), 0);
  if (cloud.empty()) return ground;

  struct Ref {
    int bin;
    std::size_t index;
  };
  std::vector<std::vector<Ref>> sectors(static_cast<std::size_t>(cfg.n_sectors));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) continue;
    const double angle = std::atan2(static_cast<double>(p.y), static_cast<double>(p.x));
    int s = static_cast<int>(std::floor((angle + std::numbers::pi) / (2.0 * std::numbers::pi) *
                                        cfg.n_sectors));
    s = std::clamp(s, 0, cfg.n_sectors - 1);
    const double r = std::hypot(static_cast<double>(p.x), static_cast<double>(p.y));
    sectors[static_cast<std::size_t>(s)].push_back({static_cast<int>(std::floor(r / cfg.bin_size)), i});
  }

  const double max_slope = std::tan(cfg.max_slope_deg * std::numbers::pi / 180.0);
  for (auto& refs : sectors) {
    if (refs.empty()) continue;
    std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) { return a.bin < b.bin; });

    struct Bin {
      int bin;
      std::size_t begin, end;
      double zmin, zmax;
    };
    std::vector<Bin> bins;
    for (std::size_t k = 0; k < refs.size();) {
      Bin b{refs[k].bin, k, k, std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
      while (k < refs.size() && refs[k].bin == b.bin) {
        const double z = cloud[refs[k].index].z;
        b.zmin = std::min(b.zmin, z);
        b.zmax = std::max(b.zmax, z);
        ++k;
      }
      b.end = k;
      bins.push_back(b);
    }

    // Ground profile: accepted (range, height) vertices.
    std::vector<Eigen::Vector2d> profile{{0.0, -cfg.sensor_height}};
    for (const auto& b : bins) {
      const double r = (b.bin + 0.5) * cfg.bin_size;
      const auto& q = profile.back();
      if (std::abs(b.zmin - q.y()) <= max_slope * (r - q.x())) profile.emplace_back(r, b.zmin);
    }
    if (profile.size() < 2) continue;  // degenerate sector: nothing is ground

    auto profile_at = [&](double r) {
      if (r >= profile.back().x()) return profile.back().y();
      auto it = std::upper_bound(profile.begin(), profile.end(), r,
                                 [](double v, const Eigen::Vector2d& p) { return v < p.x(); });
      const auto& b = *it;
      const auto& a = *(it - 1);
      return a.y() + (b.y() - a.y()) * (r - a.x()) / (b.x() - a.x());
    };
    for (const auto& b : bins) {
      if (b.zmax - b.zmin > cfg.height_tol) continue;
      for (std::size_t k = b.begin; k < b.end; ++k) {
        const auto& p = cloud[refs[k].index];
        const double r = std::hypot(static_cast<double>(p.x), static_cast<double>(p.y));
        if (std::abs(p.z - profile_at(r)) <= cfg.height_tol) ground[refs[k].index] = 1;
      }
    }
  }
  return ground;
}

struct ProjectedPoint {
  double u = 0;
  double v = 0;
  bool ground = false;
};

/// Image projection through P * R_rect * T_velo_cam; points with non-positive depth or
/// whose nearest pixel lies outside the image are dropped.
inline std::vector<ProjectedPoint> project_points(const PointCloud& cloud,
                                                  std::span<const std::uint8_t> labels,
                                                  const CameraModel& cam) {
  if (labels.size() != cloud.size()) {
    throw Error(Errc::length_mismatch, "one label per point required");
  }
  const Mat34 M = cam.velo_to_image();
  std::vector<ProjectedPoint> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    const Eigen::Vector3d h = M * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
    if (!(h.z() > 0)) continue;
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    if (!(u >= -0.5 && u < cam.image_w - 0.5 && v >= -0.5 && v < cam.image_h - 0.5)) continue;
    out.push_back({u, v, labels[i] != 0});
  }
  return out;
}

/// Splats ground points, dilates then closes with a disc of fill_radius, and keeps the
/// largest 8-connected component.
inline RoadMask fill_mask(std::span<const ProjectedPoint> points, int width, int height,
                          const GroundSegConfig& cfg = {}) {
  BinaryGrid splat(width, height, 0);
  for (const auto& p : points) {
    if (!p.ground) continue;
    const int x = static_cast<int>(std::lround(p.u));
    const int y = static_cast<int>(std::lround(p.v));
    if (splat.contains(x, y)) splat(x, y) = 1;
  }
  const auto filled = close(dilate(splat, cfg.fill_radius), cfg.fill_radius);
  return to_mask(largest_component(filled, Connectivity::eight));
}

inline RoadMask lidar_mask(const PointCloud& cloud, const CameraModel& cam,
                           const GroundSegConfig& cfg = {}) {
  if (cloud.empty()) return RoadMask(cam.image_w, cam.image_h);
  const auto labels = segment_ground(cloud, cfg);
  const auto pts = project_points(cloud, labels, cam);
  return fill_mask(pts, cam.image_w, cam.image_h, cfg);
}

}  // namespace osmroad
