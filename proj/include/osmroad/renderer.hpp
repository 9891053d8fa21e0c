#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "osmroad/attributes.hpp"
#include "osmroad/camera.hpp"
#include "osmroad/geodesy.hpp"
#include "osmroad/grid.hpp"
#include "osmroad/osm_model.hpp"
#include "osmroad/spatial_index.hpp"

namespace osmroad {

/// Planar polygon in the vehicle frame (x forward, y left, ground plane z = 0).
struct RoadPolygon {
  std::vector<Vec2> points;
  OsmId way_id = 0;
  double width = 0.0;
};

using RoadPolygonSet = std::vector<RoadPolygon>;

struct RenderConfig {
  double radius_m = 100.0;
  double lane_width_m = 3.5;
  double near_m = 1.0;
  double far_m = 100.0;
  double miter_limit = 4.0;  // miter length / half width before falling back to a bevel
  AttributeConfig attributes;
};

/// World point expressed in the vehicle frame of `pose`: rotate by -heading, translate.
inline Vec2 to_vehicle_frame(const VehiclePose& pose, Vec2 world) {
  const double h = deg2rad(pose.heading_deg);
  const Vec2 d = world - as_vec(pose.utm);
  return {std::cos(h) * d.x + std::sin(h) * d.y, -std::sin(h) * d.x + std::cos(h) * d.y};
}

namespace detail {

inline Vec2 left_normal(Vec2 d) {
  const double n = norm(d);
  return {-d.y / n, d.x / n};
}

inline bool convex_quad(const std::vector<Vec2>& q) {
  int sign = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vec2 a = q[(i + 1) % q.size()] - q[i];
    const Vec2 b = q[(i + 2) % q.size()] - q[(i + 1) % q.size()];
    const double c = cross(a, b);
    if (c == 0.0) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign != 0 && s != sign) return false;
    sign = s;
  }
  return sign != 0;
}

/// Offset polygons for one polyline: one quad per segment with mitered ends, or a plain
/// rectangle plus bevel triangles when the miter would be too long or the quad folds.
inline void offset_polyline(const std::vector<Vec2>& line, double half, OsmId way_id, double width,
                            double miter_limit, RoadPolygonSet& out) {
  const std::size_t n = line.size();
  if (n < 2) return;
  std::vector<Vec2> normals(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) normals[i] = left_normal(line[i + 1] - line[i]);

  // Offset vector at each vertex; plain normals at the ends.
  std::vector<Vec2> miter(n);
  std::vector<bool> mitered(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      miter[i] = half * normals.front();
    } else if (i + 1 == n) {
      miter[i] = half * normals.back();
    } else {
      const Vec2 a = normals[i - 1];
      const Vec2 b = normals[i];
      const Vec2 sum = a + b;
      const double len = norm(sum);
      const double cos_half = len / 2.0;
      if (len > 1e-12 && 1.0 / cos_half <= miter_limit) {
        miter[i] = (half / cos_half) * Vec2{sum.x / len, sum.y / len};
        mitered[i] = true;
      }
    }
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec2 p = line[i];
    const Vec2 q = line[i + 1];
    const Vec2 off_p = mitered[i] || i == 0 ? miter[i] : half * normals[i];
    const Vec2 off_q = mitered[i + 1] || i + 1 == n - 1 ? miter[i + 1] : half * normals[i];
    std::vector<Vec2> quad{p - off_p, q - off_q, q + off_q, p + off_p};
    if (!convex_quad(quad)) {
      const Vec2 o = half * normals[i];
      quad = {p - o, q - o, q + o, p + o};
    }
    out.push_back({std::move(quad), way_id, width});
  }
  // Bevel joints where no miter was used.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mitered[i]) continue;
    const Vec2 c = line[i];
    const Vec2 a = half * normals[i - 1];
    const Vec2 b = half * normals[i];
    if (cross(a, b) == 0.0) continue;
    out.push_back({{c, c + a, c + b}, way_id, width});
    out.push_back({{c, c - b, c - a}, way_id, width});
  }
}

}  // namespace detail

/// Road-surface polygons around a pose. Every run of consecutive way segments within
/// `radius_m` of the pose becomes a strip `num_lanes * lane_width_m` wide.
inline RoadPolygonSet build_road_polygons(const OsmGraph& graph, const SpatialIndex& index,
                                          const VehiclePose& pose, const RenderConfig& cfg = {}) {
  RoadPolygonSet out;
  if (index.empty()) return out;
  require_same_zone(pose.utm, index.entries().front().point);
  const Vec2 q = as_vec(pose.utm);
  for (OsmId wid : highway_ways(graph)) {
    const auto& way = graph.way(wid);
    const double width = parse_direct(way, cfg.attributes).num_lanes * cfg.lane_width_m;
    const auto& refs = way.node_refs;
    std::vector<Vec2> run;
    auto flush = [&] {
      detail::offset_polyline(run, width / 2.0, wid, width, cfg.miter_limit, out);
      run.clear();
    };
    for (std::size_t i = 0; i + 1 < refs.size(); ++i) {
      const Vec2 a = as_vec(index.position(refs[i]));
      const Vec2 b = as_vec(index.position(refs[i + 1]));
      if (a == b) continue;
      if (point_segment_distance(q, a, b) > cfg.radius_m) {
        if (!run.empty()) flush();
        continue;
      }
      const Vec2 va = to_vehicle_frame(pose, a);
      const Vec2 vb = to_vehicle_frame(pose, b);
      if (run.empty()) run.push_back(va);
      run.push_back(vb);
    }
    if (!run.empty()) flush();
  }
  return out;
}

namespace detail {

/// Clips a polygon of homogeneous camera points to lo <= depth <= hi (Sutherland-Hodgman).
/// Depth is the third row of the projection applied to the point.
inline std::vector<Eigen::Vector3d> clip_depth(const std::vector<Eigen::Vector3d>& poly, double lo,
                                               double hi) {
  auto clip = [](const std::vector<Eigen::Vector3d>& in, double bound, bool keep_above) {
    std::vector<Eigen::Vector3d> res;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = in[i];
      const auto& b = in[(i + 1) % n];
      const bool ia = keep_above ? a.z() >= bound : a.z() <= bound;
      const bool ib = keep_above ? b.z() >= bound : b.z() <= bound;
      if (ia) res.push_back(a);
      if (ia != ib) {
        const double t = (bound - a.z()) / (b.z() - a.z());
        Eigen::Vector3d m = a + t * (b - a);
        m.z() = bound;
        res.push_back(m);
      }
    }
    return res;
  };
  auto r = clip(poly, lo, true);
  if (r.size() < 3) return {};
  r = clip(r, hi, false);
  if (r.size() < 3) return {};
  return r;
}

}  // namespace detail

/// Sets every pixel whose center lies inside the polygon. Pixel (x, y) has its center at
/// (x, y); an edge owns the centers on its left/top side (half-open spans per row).
inline void fill_polygon(std::span<const Vec2> poly, Grid<std::uint8_t>& out) {
  const std::size_t n = poly.size();
  if (n < 3) return;
  double ymin = poly[0].y;
  double ymax = poly[0].y;
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(ymin)));
  const int y1 = std::min(out.height() - 1, static_cast<int>(std::floor(ymax)));
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    const double yc = y;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = poly[i];
      const Vec2 b = poly[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int xa = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int xb = std::min(out.width(), static_cast<int>(std::ceil(xs[k + 1])));
      for (int x = xa; x < xb; ++x) out(x, y) = 1;
    }
  }
}

/// Projects ground polygons into the image and rasterizes them. Returns a binary mask.
inline RoadMask render_mask(const RoadPolygonSet& polys, const CameraModel& cam,
                            const RenderConfig& cfg = {}) {
  cam.validate();
  const Mat34 M = cam.velo_to_image();
  Grid<std::uint8_t> raster(cam.image_w, cam.image_h, 0);
  std::vector<Eigen::Vector3d> hom;
  std::vector<Vec2> px;
  for (const auto& poly : polys) {
    hom.clear();
    for (const auto& p : poly.points) hom.push_back(M * cam.ground_to_velo(p.x, p.y));
    const auto clipped = detail::clip_depth(hom, cfg.near_m, cfg.far_m);
    if (clipped.empty()) continue;
    px.clear();
    for (const auto& h : clipped) px.push_back({h.x() / h.z(), h.y() / h.z()});
    fill_polygon(px, raster);
  }
  RoadMask mask(cam.image_w, cam.image_h, MaskKind::binary);
  for (std::size_t i = 0; i < raster.size(); ++i) mask.values[i] = raster[i];
  return mask;
}

inline RoadMask render_direct(const OsmGraph& graph, const SpatialIndex& index,
                              const VehiclePose& pose, const CameraModel& cam,
                              const RenderConfig& cfg = {}) {
  return render_mask(build_road_polygons(graph, index, pose, cfg), cam, cfg);
}

// --- Multiple-candidate confidence mask -------------------------------------------------

enum class CandidateDistribution { uniform, gaussian };

struct PoseCandidateSpec {
  int n = 100;
  double dx = 1.0;       // m, half-range in easting
  double dy = 1.0;       // m, half-range in northing
  double dtheta = 10.0;  // deg, half-range in heading
  CandidateDistribution distribution = CandidateDistribution::uniform;
  std::uint64_t seed = 0;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; independent of library distributions.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Offset in [-half, half]: uniform, or Gaussian with sigma = half/2 truncated by rejection.
inline double draw_offset(std::mt19937_64& rng, double half, CandidateDistribution dist) {
  if (dist == CandidateDistribution::uniform) return (2.0 * unit_uniform(rng) - 1.0) * half;
  while (true) {
    const double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
    const double u2 = unit_uniform(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    const double v = z * half / 2.0;
    if (std::abs(v) <= half) return v;
  }
}

}  // namespace detail

/// The n perturbed poses, drawn in order (dx, dy, dtheta) per candidate.
inline std::vector<VehiclePose> draw_candidates(const VehiclePose& pose,
                                                const PoseCandidateSpec& spec) {
  if (spec.n < 1) throw Error(Errc::invalid_argument, "candidate count must be >= 1");
  if (spec.dx < 0 || spec.dy < 0 || spec.dtheta < 0) {
    throw Error(Errc::invalid_argument, "candidate ranges must be >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<VehiclePose> out;
  out.reserve(static_cast<std::size_t>(spec.n));
  for (int j = 0; j < spec.n; ++j) {
    const double ox = detail::draw_offset(rng, spec.dx, spec.distribution);
    const double oy = detail::draw_offset(rng, spec.dy, spec.distribution);
    const double oh = detail::draw_offset(rng, spec.dtheta, spec.distribution);
    VehiclePose p = pose;
    p.utm.x += ox;
    p.utm.y += oy;
    p.heading_deg = normalize_deg(pose.heading_deg + oh);
    out.push_back(p);
  }
  return out;
}

/// Per-pixel mean of binary masks: exactly k/n where k masks are set.
inline RoadMask average_masks(std::span<const RoadMask> masks) {
  if (masks.empty()) throw Error(Errc::invalid_argument, "no masks to average");
  std::vector<std::uint32_t> votes(masks.front().values.size(), 0);
  for (const auto& m : masks) {
    require_same_shape(masks.front(), m, "average_masks");
    for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += m.values[i] > 0.5 ? 1u : 0u;
  }
  const double n = static_cast<double>(masks.size());
  RoadMask out(masks.front().width(), masks.front().height(), MaskKind::confidence);
  for (std::size_t i = 0; i < votes.size(); ++i) out.values[i] = static_cast<double>(votes[i]) / n;
  return out;
}

/// Confidence mask averaging the direct render over n perturbed poses.
inline RoadMask candidates_mask(const OsmGraph& graph, const SpatialIndex& index,
                                const VehiclePose& pose, const CameraModel& cam,
                                const PoseCandidateSpec& spec, const RenderConfig& cfg = {}) {
  const auto poses = draw_candidates(pose, spec);
  std::vector<std::uint32_t> votes(static_cast<std::size_t>(cam.image_w) *
                                       static_cast<std::size_t>(cam.image_h),
                                   0);
  for (const auto& p : poses) {
    const auto m = render_direct(graph, index, p, cam, cfg);
    for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += m.values[i] > 0.5 ? 1u : 0u;
  }
  RoadMask out(cam.image_w, cam.image_h, MaskKind::confidence);
  const double n = static_cast<double>(spec.n);
  for (std::size_t i = 0; i < votes.size(); ++i) out.values[i] = static_cast<double>(votes[i]) / n;
  return out;
}

}  // namespace osmroad
