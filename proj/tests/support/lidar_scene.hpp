#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "osmroad/lidar.hpp"

namespace osmroad::test_support {

struct PlaneBoxScene {
  PointCloud cloud;
  std::vector<std::uint8_t> on_plane;  // 1 for plane points, 0 for box points
};

// Road plane at z = -1.73 over ranges [3, 40] m plus a 2 m tall box with a random
// footprint standing on it; plane points under the box are removed.
inline PlaneBoxScene plane_box_scene(unsigned seed, std::size_t plane_points = 30000,
                                     std::size_t box_points = 3000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ground = -1.73;
  const double range = 6.0 + 14.0 * u(rng);
  const double bearing = (u(rng) - 0.5) * std::numbers::pi;
  const double cx = range * std::cos(bearing);
  const double cy = range * std::sin(bearing);
  const double sx = 1.5 + 2.0 * u(rng);
  const double sy = 1.5 + 2.0 * u(rng);
  const double height = 2.0;
  auto in_box = [&](double x, double y) {
    return std::abs(x - cx) <= sx / 2 && std::abs(y - cy) <= sy / 2;
  };

  PlaneBoxScene s;
  while (s.cloud.size() < plane_points) {
    const double r = 3.0 + 37.0 * std::sqrt(u(rng));
    const double a = 2.0 * std::numbers::pi * u(rng);
    const double x = r * std::cos(a);
    const double y = r * std::sin(a);
    if (in_box(x, y)) continue;
    s.cloud.push_back({float(x), float(y), float(ground + 0.02 * (u(rng) - 0.5)), 0.3f});
    s.on_plane.push_back(1);
  }
  // Surface samples: four walls and the roof, proportional to area.
  const double walls = 2.0 * (sx + sy) * height;
  const double roof = sx * sy;
  for (std::size_t i = 0; i < box_points; ++i) {
    double t = u(rng) * (walls + roof);
    double x;
    double y;
    double z;
    if (t < walls) {
      z = ground + height * u(rng);
      double p = u(rng) * 2.0 * (sx + sy);
      if (p < sx) {
        x = cx - sx / 2 + p;
        y = cy - sy / 2;
      } else if ((p -= sx) < sy) {
        x = cx + sx / 2;
        y = cy - sy / 2 + p;
      } else if ((p -= sy) < sx) {
        x = cx - sx / 2 + p;
        y = cy + sy / 2;
      } else {
        p -= sx;
        x = cx - sx / 2;
        y = cy - sy / 2 + p;
      }
    } else {
      x = cx + (u(rng) - 0.5) * sx;
      y = cy + (u(rng) - 0.5) * sy;
      z = ground + height;
    }
    s.cloud.push_back({float(x), float(y), float(z), 0.6f});
    s.on_plane.push_back(0);
  }
  return s;
}

struct GroundScore {
  double plane_recall;
  double box_rejection;
};

inline GroundScore score_ground(const PlaneBoxScene& s, const std::vector<std::uint8_t>& labels) {
  std::size_t plane = 0, plane_hit = 0, box = 0, box_rejected = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (s.on_plane[i]) {
      ++plane;
      plane_hit += labels[i];
    } else {
      ++box;
      box_rejected += labels[i] ? 0 : 1;
    }
  }
  return {double(plane_hit) / double(plane), double(box_rejected) / double(box)};
}

// Matrix chain evaluated with plain loops: camera = T * X, rectified = R * camera,
// image = P * rectified.
inline bool chain_project(const CameraModel& cam, double x, double y, double z, double& u,
                          double& v) {
  const double X[4] = {x, y, z, 1.0};
  double c[4] = {0, 0, 0, 0};
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c[r] += cam.T_velo_cam(r, k) * X[k];
  double rect[4] = {0, 0, 0, 0};
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) rect[r] += cam.R_rect(r, k) * c[k];
  double img[3] = {0, 0, 0};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 4; ++k) img[r] += cam.P(r, k) * rect[k];
  if (img[2] <= 0) return false;
  u = img[0] / img[2];
  v = img[1] / img[2];
  return true;
}

}  // namespace osmroad::test_support
