#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "osmroad/error.hpp"

namespace osmroad {

enum class Hemisphere { north, south };

/// Planar UTM coordinate. Arithmetic between points requires equal zone and hemisphere.
struct UtmPoint {
  double x = 0.0;  // easting, m
  double y = 0.0;  // northing, m
  int zone = 0;
  Hemisphere hemisphere = Hemisphere::north;

  friend bool operator==(const UtmPoint&, const UtmPoint&) = default;
};

inline bool same_zone(const UtmPoint& a, const UtmPoint& b) noexcept {
  return a.zone == b.zone && a.hemisphere == b.hemisphere;
}

inline void require_same_zone(const UtmPoint& a, const UtmPoint& b) {
  if (!same_zone(a, b)) {
    throw Error(Errc::zone_mismatch,
                "zones " + std::to_string(a.zone) + " and " + std::to_string(b.zone));
  }
}

/// Minimal 2-D vector for planar geometry after projection.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 as_vec(const UtmPoint& p) { return {p.x, p.y}; }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Wraps any angle into [0, 360).
inline double normalize_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

/// Absolute difference between two directions, in [0, 180].
inline double angle_diff_deg(double a, double b) {
  const double d = normalize_deg(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

// --- WGS84 -> UTM -----------------------------------------------------------

inline int utm_zone_for(double lon) {
  int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
  return std::clamp(zone, 1, 60);
}

/// Projects into an explicit zone (used to keep a whole session in one zone).
/// Transverse Mercator via the 6th-order Krueger series, accurate to well below 1 mm
/// within the zone.
inline UtmPoint to_utm_zone(double lat, double lon, int zone, Hemisphere hemisphere) {
  if (!(std::abs(lat) <= 84.0)) {
    throw Error(Errc::out_of_band, "latitude " + std::to_string(lat) + " outside |lat| <= 84");
  }
  if (zone < 1 || zone > 60) {
    throw Error(Errc::invalid_argument, "UTM zone " + std::to_string(zone));
  }
  constexpr double a = 6378137.0;
  constexpr double f = 1.0 / 298.257223563;
  constexpr double k0 = 0.9996;
  const double n = f / (2.0 - f);
  const double n2 = n * n;
  const double n3 = n2 * n;
  const double n4 = n3 * n;
  const double n5 = n4 * n;
  const double n6 = n5 * n;
  const double e = std::sqrt(f * (2.0 - f));
  const double big_a = a / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
  const std::array<double, 6> alpha = {
      n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 - 127.0 / 288.0 * n5 +
          7891.0 / 37800.0 * n6,
      13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 + 281.0 / 630.0 * n5 -
          1983433.0 / 1935360.0 * n6,
      61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5 + 167603.0 / 181440.0 * n6,
      49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 + 6601661.0 / 7257600.0 * n6,
      34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6,
      212378941.0 / 319334400.0 * n6,
  };

  const double lon0 = deg2rad(-183.0 + 6.0 * zone);
  const double phi = deg2rad(lat);
  const double lambda = deg2rad(lon) - lon0;

  const double sphi = std::sin(phi);
  const double t = std::sinh(std::atanh(sphi) - e * std::atanh(e * sphi));
  const double xi_p = std::atan2(t, std::cos(lambda));
  const double eta_p = std::atanh(std::sin(lambda) / std::sqrt(1.0 + t * t));

  double xi = xi_p;
  double eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    xi += alpha[j - 1] * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
    eta += alpha[j - 1] * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
  }

  UtmPoint p;
  p.zone = zone;
  p.hemisphere = hemisphere;
  p.x = 500000.0 + k0 * big_a * eta;
  p.y = k0 * big_a * xi + (hemisphere == Hemisphere::south ? 10000000.0 : 0.0);
  return p;
}

/// Standard UTM (zone from longitude, hemisphere from latitude sign).
inline UtmPoint to_utm(double lat, double lon) {
  return to_utm_zone(lat, lon, utm_zone_for(lon),
                     lat < 0.0 ? Hemisphere::south : Hemisphere::north);
}

// --- Vehicle pose -------------------------------------------------------------

/// Vehicle pose. heading_deg is east-based counter-clockwise, in [0, 360).
struct VehiclePose {
  double timestamp = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  UtmPoint utm;
  double heading_deg = 0.0;

  friend bool operator==(const VehiclePose&, const VehiclePose&) = default;
};

/// GPS headings are north-based clockwise; internally everything is east-based CCW.
inline double north_cw_to_east_ccw(double heading_north_cw) {
  return normalize_deg(90.0 - heading_north_cw);
}

inline VehiclePose make_pose(double timestamp, double lat, double lon, double heading_east_ccw) {
  VehiclePose p;
  p.timestamp = timestamp;
  p.lat = lat;
  p.lon = lon;
  p.utm = to_utm(lat, lon);
  p.heading_deg = normalize_deg(heading_east_ccw);
  return p;
}

/// Pose already expressed in a planar frame (synthetic scenes, candidate perturbations).
inline VehiclePose make_planar_pose(UtmPoint utm, double heading_east_ccw, double timestamp = 0.0) {
  VehiclePose p;
  p.timestamp = timestamp;
  p.utm = utm;
  p.heading_deg = normalize_deg(heading_east_ccw);
  return p;
}

/// Reads `timestamp lat lon heading_deg` lines (heading north-based clockwise on disk).
/// Blank lines and lines starting with '#' are skipped.
inline std::vector<VehiclePose> read_poses(std::istream& in, const std::string& name = "poses") {
  std::vector<VehiclePose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double ts = 0.0;
    double lat = 0.0;
    double lon = 0.0;
    double heading = 0.0;
    if (!(ls >> ts >> lat >> lon >> heading)) {
      throw Error(Errc::io_error, name + ":" + std::to_string(lineno) +
                                      ": expected `timestamp lat lon heading_deg`");
    }
    poses.push_back(make_pose(ts, lat, lon, north_cw_to_east_ccw(heading)));
  }
  return poses;
}

inline std::vector<VehiclePose> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_poses(in, path.string());
}

// --- Planar primitives ---------------------------------------------------------

/// Closest point of segment [a, b] to p, as the clamped parameter t in [0, 1].
inline double project_onto_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) throw Error(Errc::degenerate_segment, "segment endpoints coincide");
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double t = project_onto_segment(p, a, b);
  return norm(p - (a + t * (b - a)));
}

/// Distance from p to the closed segment [a, b].
inline double point_segment_distance(const UtmPoint& p, const UtmPoint& a, const UtmPoint& b) {
  require_same_zone(p, a);
  require_same_zone(a, b);
  return point_segment_distance(as_vec(p), as_vec(a), as_vec(b));
}

}  // namespace osmroad
