#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "osmroad/attributes.hpp"
#include "osmroad/error.hpp"
#include "osmroad/geodesy.hpp"

namespace osmroad {

/// Per-frame vehicle dynamics: accel xyz, rotation xyz, speed, heading, 5 reserved.
using DynamicsRecord = std::array<double, 13>;

inline constexpr std::size_t kFeatureColumns = 25;

/// Shortest round-trip decimal representation; deterministic across runs.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

inline std::string join_lane_directions(const std::vector<int>& dirs) {
  std::string s;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (i > 0) s += '|';
    s += std::to_string(dirs[i]);
  }
  return s;
}

/// Lane codes packed as base-7 digits, leftmost lane most significant; -1 when untagged.
inline double pack_lane_directions(const std::vector<int>& dirs) {
  if (dirs.empty()) return -1.0;
  double packed = 0.0;
  for (int d : dirs) packed = packed * 7.0 + d;
  return packed;
}

inline const char* attribute_csv_header() {
  return "timestamp,lat,lon,one_way,num_lanes,lane_directions,road_type,speed_limit,"
         "intersection_type,at_intersection,dist_to_intersection,bearing_to_intersection,"
         "road_curvature,heading,dist_to_center,anchor_node,intersection_node,next_node";
}

/// Human-readable record: enums as lowercase names, unset values as empty fields.
/// With `signed_curvature` the road_curvature column carries the signed turn angle.
inline void write_attribute_csv(std::ostream& out, std::span<const VehiclePose> poses,
                                std::span<const SceneAttributes> attrs,
                                bool signed_curvature = false) {
  if (poses.size() != attrs.size()) {
    throw Error(Errc::length_mismatch, std::to_string(poses.size()) + " poses vs " +
                                           std::to_string(attrs.size()) + " attribute records");
  }
  out << attribute_csv_header() << '\n';
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto& p = poses[i];
    const auto& a = attrs[i];
    const auto& d = a.direct;
    const auto& r = a.indirect;
    out << format_number(p.timestamp) << ',' << format_number(p.lat) << ','
        << format_number(p.lon) << ',' << (d.one_way ? 1 : 0) << ',' << d.num_lanes << ','
        << join_lane_directions(d.lane_directions) << ',' << to_string(d.road_type) << ','
        << format_number(r.speed_limit_kmh) << ',' << to_string(r.intersection_type) << ','
        << (r.at_intersection ? 1 : 0) << ',' << format_optional(r.dist_to_intersection) << ','
        << format_optional(r.bearing_to_intersection) << ','
        << format_number(signed_curvature ? r.road_curvature_signed : r.road_curvature) << ','
        << format_number(r.heading) << ',' << format_number(r.dist_to_center) << ','
        << a.anchor_node << ',' << (a.intersection_node ? std::to_string(*a.intersection_node) : "")
        << ',' << (a.next_node ? std::to_string(*a.next_node) : "") << '\n';
  }
}

inline const char* feature_csv_header() {
  return "accel_x,accel_y,accel_z,rot_x,rot_y,rot_z,speed,gps_heading,reserved_0,reserved_1,"
         "reserved_2,reserved_3,reserved_4,one_way,num_lanes,lane_directions,road_type,"
         "speed_limit,intersection_type,at_intersection,dist_to_intersection,"
         "bearing_to_intersection,road_curvature,heading,dist_to_center";
}

/// The twelve attribute slots as numbers: enums as integer codes, booleans as 0/1,
/// unset optionals as -1.
inline std::array<double, 12> attribute_vector(const SceneAttributes& a,
                                               bool signed_curvature = false) {
  const auto& d = a.direct;
  const auto& r = a.indirect;
  return {d.one_way ? 1.0 : 0.0,
          static_cast<double>(d.num_lanes),
          pack_lane_directions(d.lane_directions),
          static_cast<double>(static_cast<int>(d.road_type)),
          r.speed_limit_kmh,
          static_cast<double>(static_cast<int>(r.intersection_type)),
          r.at_intersection ? 1.0 : 0.0,
          r.dist_to_intersection.value_or(-1.0),
          r.bearing_to_intersection.value_or(-1.0),
          signed_curvature ? r.road_curvature_signed : r.road_curvature,
          r.heading,
          r.dist_to_center};
}

/// Writes the 25-column feature file: 13 dynamics values followed by 12 attributes.
inline void export_features(std::ostream& out, std::span<const SceneAttributes> attrs,
                            std::span<const DynamicsRecord> dynamics,
                            bool signed_curvature = false) {
  if (attrs.size() != dynamics.size()) {
    throw Error(Errc::length_mismatch, std::to_string(attrs.size()) + " attribute records vs " +
                                           std::to_string(dynamics.size()) + " dynamics records");
  }
  out << feature_csv_header() << '\n';
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    bool first = true;
    for (double v : dynamics[i]) {
      out << (first ? "" : ",") << format_number(v);
      first = false;
    }
    for (double v : attribute_vector(attrs[i], signed_curvature)) out << ',' << format_number(v);
    out << '\n';
  }
}

/// Dynamics derived from the pose track alone: speed from consecutive planar
/// displacement, heading from the pose; accelerations and rotations zero.
inline std::vector<DynamicsRecord> dynamics_from_poses(std::span<const VehiclePose> poses) {
  std::vector<DynamicsRecord> out(poses.size(), DynamicsRecord{});
  for (std::size_t i = 0; i < poses.size(); ++i) {
    double speed = 0.0;
    if (i > 0 && same_zone(poses[i].utm, poses[i - 1].utm)) {
      const double dt = poses[i].timestamp - poses[i - 1].timestamp;
      if (dt > 0.0) speed = norm(as_vec(poses[i].utm) - as_vec(poses[i - 1].utm)) / dt;
    }
    out[i][6] = speed;
    out[i][7] = poses[i].heading_deg;
  }
  return out;
}

/// Reads 13 whitespace-separated values per line; '#' lines and blank lines skipped.
inline std::vector<DynamicsRecord> read_dynamics(std::istream& in,
                                                 const std::string& name = "dynamics") {
  std::vector<DynamicsRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    DynamicsRecord r{};
    for (double& v : r) {
      if (!(ls >> v)) {
        throw Error(Errc::io_error, name + ":" + std::to_string(lineno) + ": expected 13 values");
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace osmroad
