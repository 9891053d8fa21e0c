#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "osmroad/error.hpp"
#include "osmroad/geodesy.hpp"
#include "osmroad/osm_model.hpp"
#include "osmroad/spatial_index.hpp"

namespace osmroad {

enum class RoadType { residential = 0, tertiary, secondary, service, unclassified, other };

enum class IntersectionType { crossing = 0, t_junction, turning, merge, exit, none };

/// Lane direction codes: 0 left-only, 1 left+through, 2 through, 3 through+right,
/// 4 right-only, 5 left+right, 6 all directions.
enum class LaneDirection { left = 0, left_through, through, through_right, right, left_right, all };

inline std::string_view to_string(RoadType t) {
  switch (t) {
    case RoadType::residential: return "residential";
    case RoadType::tertiary: return "tertiary";
    case RoadType::secondary: return "secondary";
    case RoadType::service: return "service";
    case RoadType::unclassified: return "unclassified";
    case RoadType::other: return "other";
  }
  return "other";
}

inline std::string_view to_string(IntersectionType t) {
  switch (t) {
    case IntersectionType::crossing: return "crossing";
    case IntersectionType::t_junction: return "t_junction";
    case IntersectionType::turning: return "turning";
    case IntersectionType::merge: return "merge";
    case IntersectionType::exit: return "exit";
    case IntersectionType::none: return "none";
  }
  return "none";
}

/// Tag defaults and geometric thresholds for attribute retrieval.
struct AttributeConfig {
  int default_lanes_two_way = 2;
  int default_lanes_one_way = 1;
  // km/h, indexed by RoadType
  std::array<double, 6> default_speed_kmh = {30.0, 50.0, 60.0, 20.0, 50.0, 50.0};
  double at_intersection_radius_m = 10.0;
  double intersection_search_m = 200.0;
  double turning_bend_deg = 30.0;
};

struct DirectAttributes {
  bool one_way = false;
  int num_lanes = 2;
  std::vector<int> lane_directions;  // empty unless turn:lanes is tagged
  RoadType road_type = RoadType::other;

  friend bool operator==(const DirectAttributes&, const DirectAttributes&) = default;
};

struct IndirectAttributes {
  double speed_limit_kmh = 0.0;
  IntersectionType intersection_type = IntersectionType::none;
  bool at_intersection = false;
  std::optional<double> dist_to_intersection;     // d1 + d2, m
  std::optional<double> bearing_to_intersection;  // alpha, east-based CCW deg
  double road_curvature = 0.0;                    // beta, unsigned deg in [0, 180]
  double road_curvature_signed = 0.0;             // beta, left turns positive, (-180, 180]
  double heading = 0.0;                           // gamma, east-based CCW deg
  double dist_to_center = 0.0;                    // d3, m

  friend bool operator==(const IndirectAttributes&, const IndirectAttributes&) = default;
};

struct SceneAttributes {
  DirectAttributes direct;
  IndirectAttributes indirect;
  OsmId anchor_node = 0;  // N0
  OsmId anchor_way = 0;
  std::optional<OsmId> intersection_node;  // N1
  std::optional<OsmId> next_node;          // N2
  bool missing_next_node = false;
  bool no_intersection_ahead = false;

  friend bool operator==(const SceneAttributes&, const SceneAttributes&) = default;
};

// --- Tag interpretation -------------------------------------------------------

inline RoadType road_type_from_tag(std::string_view v) {
  auto base = v;
  if (base.ends_with("_link")) base.remove_suffix(5);
  if (base == "residential") return RoadType::residential;
  if (base == "tertiary") return RoadType::tertiary;
  if (base == "secondary") return RoadType::secondary;
  if (base == "service") return RoadType::service;
  if (base == "unclassified") return RoadType::unclassified;
  return RoadType::other;
}

/// +1 oneway along node order, -1 against it, 0 two-way.
inline int oneway_direction(const TagMap& tags) {
  if (auto v = find_tag(tags, "oneway")) {
    if (*v == "yes" || *v == "true" || *v == "1") return 1;
    if (*v == "-1" || *v == "reverse") return -1;
    if (*v == "no" || *v == "false" || *v == "0") return 0;
  }
  if (auto hw = find_tag(tags, "highway"); hw && *hw == "motorway") return 1;
  if (auto j = find_tag(tags, "junction"); j && (*j == "roundabout" || *j == "circular")) return 1;
  return 0;
}

inline int encode_lane_turns(std::string_view lane) {
  bool left = false;
  bool through = false;
  bool right = false;
  while (true) {
    const auto sep = lane.find(';');
    auto token = lane.substr(0, sep);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token == "left" || token == "slight_left" || token == "sharp_left" ||
        token == "reverse" || token == "merge_to_left") {
      left = true;
    } else if (token == "right" || token == "slight_right" || token == "sharp_right" ||
               token == "merge_to_right") {
      right = true;
    } else if (token == "through") {
      through = true;
    }
    if (sep == std::string_view::npos) break;
    lane.remove_prefix(sep + 1);
  }
  if (left && through && right) return static_cast<int>(LaneDirection::all);
  if (left && right) return static_cast<int>(LaneDirection::left_right);
  if (left && through) return static_cast<int>(LaneDirection::left_through);
  if (through && right) return static_cast<int>(LaneDirection::through_right);
  if (left) return static_cast<int>(LaneDirection::left);
  if (right) return static_cast<int>(LaneDirection::right);
  return static_cast<int>(LaneDirection::through);  // "through", "none" or unmarked
}

inline std::vector<int> parse_turn_lanes(std::string_view value) {
  std::vector<int> out;
  while (true) {
    const auto sep = value.find('|');
    out.push_back(encode_lane_turns(value.substr(0, sep)));
    if (sep == std::string_view::npos) break;
    value.remove_prefix(sep + 1);
  }
  return out;
}

/// Speed in km/h from a maxspeed value; nullopt when not numeric.
inline std::optional<double> parse_maxspeed(std::string_view v) {
  double number = 0.0;
  std::size_t i = 0;
  while (i < v.size() && (std::isdigit(static_cast<unsigned char>(v[i])) || v[i] == '.')) ++i;
  if (i == 0 || !detail::parse_number(v.substr(0, i), number)) return std::nullopt;
  auto unit = v.substr(i);
  while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);
  if (unit.empty() || unit == "km/h" || unit == "kmh") return number;
  if (unit == "mph") return number * 1.609344;
  if (unit == "knots") return number * 1.852;
  return std::nullopt;
}

inline DirectAttributes parse_direct(const OsmWay& way, const AttributeConfig& cfg = {}) {
  DirectAttributes d;
  d.one_way = oneway_direction(way.tags) != 0;
  d.num_lanes = d.one_way ? cfg.default_lanes_one_way : cfg.default_lanes_two_way;
  if (auto lanes = find_tag(way.tags, "lanes")) {
    int n = 0;
    auto end = lanes->find_first_of(";|");
    if (detail::parse_number(lanes->substr(0, end), n) && n >= 1) d.num_lanes = n;
  }
  if (auto turns = find_tag(way.tags, "turn:lanes")) {
    d.lane_directions = parse_turn_lanes(*turns);
    d.num_lanes = static_cast<int>(d.lane_directions.size());
  }
  if (auto hw = find_tag(way.tags, "highway")) d.road_type = road_type_from_tag(*hw);
  return d;
}

inline DirectAttributes parse_direct(const OsmGraph& graph, OsmId way_id,
                                     const AttributeConfig& cfg = {}) {
  return parse_direct(graph.way(way_id), cfg);
}

inline double speed_limit_kmh(const OsmWay& way, const AttributeConfig& cfg = {}) {
  if (auto v = find_tag(way.tags, "maxspeed")) {
    if (auto s = parse_maxspeed(*v)) return *s;
  }
  const auto type = road_type_from_tag(find_tag(way.tags, "highway").value_or(""));
  return cfg.default_speed_kmh[static_cast<std::size_t>(type)];
}

// --- Planar angle primitives ---------------------------------------------------

/// East-based counter-clockwise direction from `from` to `to`, in [0, 360).
inline double bearing_angle(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  if (d.x == 0.0 && d.y == 0.0) throw Error(Errc::coincident_points, "bearing of a zero vector");
  return normalize_deg(rad2deg(std::atan2(d.y, d.x)));
}

inline double bearing_angle(const UtmPoint& from, const UtmPoint& to) {
  require_same_zone(from, to);
  return bearing_angle(as_vec(from), as_vec(to));
}

/// Signed turn from `incoming` to the direction n0 -> n2, degrees in (-180, 180], left positive.
inline double road_curvature_signed(Vec2 n0, Vec2 n2, Vec2 incoming) {
  const Vec2 out = n2 - n0;
  if ((out.x == 0.0 && out.y == 0.0) || (incoming.x == 0.0 && incoming.y == 0.0)) {
    throw Error(Errc::coincident_points, "curvature with a zero-length direction");
  }
  return rad2deg(std::atan2(cross(incoming, out), dot(incoming, out)));
}

/// Unsigned angle between the incoming direction at N0 and N0 -> N2, in [0, 180].
inline double road_curvature(Vec2 n0, Vec2 n2, Vec2 incoming) {
  return std::abs(road_curvature_signed(n0, n2, incoming));
}

inline double road_curvature(const UtmPoint& n0, const UtmPoint& n2, Vec2 incoming) {
  require_same_zone(n0, n2);
  return road_curvature(as_vec(n0), as_vec(n2), incoming);
}

/// Arc length from the foot of `pose` on segment [path[segment], path[segment+1]]
/// along the polyline to path[target]. Requires segment < target.
inline double distance_along_polyline(std::span<const Vec2> path, Vec2 pose, std::size_t segment,
                                      std::size_t target) {
  if (segment + 1 >= path.size() || target <= segment || target >= path.size()) {
    throw Error(Errc::invalid_argument, "polyline indices out of range");
  }
  const Vec2 a = path[segment];
  const Vec2 b = path[segment + 1];
  const double t = project_onto_segment(pose, a, b);
  const Vec2 foot = a + t * (b - a);
  double d = norm(b - foot);
  for (std::size_t i = segment + 1; i < target; ++i) d += norm(path[i + 1] - path[i]);
  return d;
}

// --- Way topology ---------------------------------------------------------------

/// A direction of travel leaving a node along one highway way.
struct Arm {
  OsmId way_id = 0;
  std::size_t node_pos = 0;
  std::size_t neighbor_pos = 0;
  OsmId neighbor = 0;
  int dir = 0;   // +1 along the way's node order
  int flow = 0;  // +1 one-way traffic leaves the node, -1 enters it, 0 two-way
};

inline std::vector<Arm> node_arms(const OsmGraph& graph, OsmId node) {
  std::vector<Arm> arms;
  for (const auto& m : graph.highway_memberships(node)) {
    const auto& w = graph.way(m.way_id);
    const auto& refs = w.node_refs;
    const std::size_t n = refs.size();
    const int oneway = oneway_direction(w.tags);
    auto add = [&](std::size_t np, int dir) {
      for (const auto& a : arms) {
        if (a.way_id == m.way_id && a.neighbor == refs[np]) return;
      }
      arms.push_back({m.way_id, m.position, np, refs[np], dir, oneway * dir});
    };
    if (m.position > 0) add(m.position - 1, -1);
    if (m.position + 1 < n) add(m.position + 1, +1);
    if (w.is_closed()) {
      if (m.position == 0) add(n - 2, -1);
      if (m.position == n - 1) add(1, +1);
    }
  }
  return arms;
}

namespace detail {

template <typename PositionOf>
IntersectionType classify_with(const OsmGraph& graph, OsmId node, const AttributeConfig& cfg,
                               PositionOf&& position_of) {
  graph.node(node);  // UnknownNode
  const auto arms = node_arms(graph, node);
  std::set<OsmId> ways;
  for (const auto& a : arms) ways.insert(a.way_id);

  if (ways.size() >= 4 || arms.size() >= 4) return IntersectionType::crossing;
  if (arms.size() == 3) {
    int in = 0;
    int out = 0;
    for (const auto& a : arms) {
      if (a.flow < 0) ++in;
      if (a.flow > 0) ++out;
    }
    if (in == 2 && out == 1) return IntersectionType::merge;
    if (in == 1 && out == 2) return IntersectionType::exit;
    return IntersectionType::t_junction;
  }
  if (arms.size() == 2 && ways.size() == 2) {
    const Vec2 c = position_of(node);
    const Vec2 u = position_of(arms[0].neighbor) - c;
    const Vec2 v = position_of(arms[1].neighbor) - c;
    const double between = rad2deg(std::atan2(std::abs(cross(u, v)), dot(u, v)));
    if (180.0 - between > cfg.turning_bend_deg) return IntersectionType::turning;
  }
  return IntersectionType::none;
}

}  // namespace detail

/// Intersection class from the arms meeting at a node: each highway way contributes one
/// arm where the node is an endpoint and two where it is interior.
/// >= 4 arms (or ways): crossing; 3 arms: t_junction, or merge/exit when all three are
/// one-way and converge/diverge; 2 arms from two ways joined end-to-end with a bend above
/// the turning threshold: turning; otherwise none.
inline IntersectionType classify_intersection(const OsmGraph& graph, const SpatialIndex& index,
                                              OsmId node, const AttributeConfig& cfg = {}) {
  return detail::classify_with(graph, node, cfg,
                               [&](OsmId id) { return as_vec(index.position(id)); });
}

inline IntersectionType classify_intersection(const OsmGraph& graph, OsmId node,
                                              const AttributeConfig& cfg = {}) {
  const auto& center = graph.node(node);
  const int zone = utm_zone_for(center.lon);
  const auto hemi = center.lat < 0.0 ? Hemisphere::south : Hemisphere::north;
  return detail::classify_with(graph, node, cfg, [&](OsmId id) {
    const auto& n = graph.node(id);
    return as_vec(to_utm_zone(n.lat, n.lon, zone, hemi));
  });
}

/// Cursor at a way position, moving in direction `dir` along the way's node order.
struct WayCursor {
  OsmId way_id = 0;
  std::size_t pos = 0;
  int dir = 1;
};

/// Next node along the travel direction. At a way end the walk continues onto the single
/// other way that joins there (a plain two-arm joint); otherwise it stops.
inline std::optional<WayCursor> advance(const OsmGraph& graph, const WayCursor& c) {
  const auto& w = graph.way(c.way_id);
  const auto n = static_cast<long>(w.node_refs.size());
  long next = static_cast<long>(c.pos) + c.dir;
  if (w.is_closed()) {
    if (next == n) next = 1;
    if (next == -1) next = n - 2;
  }
  if (next >= 0 && next < n) return WayCursor{c.way_id, static_cast<std::size_t>(next), c.dir};

  const OsmId node = w.node_refs[c.pos];
  const auto arms = node_arms(graph, node);
  if (arms.size() != 2) return std::nullopt;
  for (const auto& a : arms) {
    if (a.way_id != c.way_id) return WayCursor{a.way_id, a.neighbor_pos, a.dir};
  }
  return std::nullopt;
}

inline OsmId node_at(const OsmGraph& graph, const WayCursor& c) {
  return graph.way(c.way_id).node_refs[c.pos];
}

/// Planar walk around the anchor node N0 in the travel direction.
struct TravelPath {
  std::vector<OsmId> nodes;   // [previous?, N0, next, ...]
  std::vector<Vec2> points;
  std::size_t anchor = 0;     // index of N0 in nodes
  std::optional<OsmId> anchor_way;
};

/// Chooses the way and direction through N0 whose segment best aligns with the heading,
/// then collects one node behind N0 and nodes ahead up to `ahead_m` of arc length.
inline TravelPath travel_path(const OsmGraph& graph, const SpatialIndex& index, OsmId anchor,
                              double heading_deg, double ahead_m) {
  const Vec2 p0 = as_vec(index.position(anchor));
  std::optional<WayCursor> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& m : graph.highway_memberships(anchor)) {
    for (int dir : {+1, -1}) {
      const WayCursor c{m.way_id, m.position, dir};
      double score = std::numeric_limits<double>::infinity();
      if (auto f = advance(graph, c)) {
        const Vec2 pf = as_vec(index.position(node_at(graph, *f)));
        if (pf != p0) score = std::min(score, angle_diff_deg(bearing_angle(p0, pf), heading_deg));
      }
      if (auto b = advance(graph, WayCursor{c.way_id, c.pos, -dir})) {
        const Vec2 pb = as_vec(index.position(node_at(graph, *b)));
        if (pb != p0) score = std::min(score, angle_diff_deg(bearing_angle(pb, p0), heading_deg));
      }
      if (score < best_score) {
        best_score = score;
        best = c;
      }
    }
  }

  TravelPath path;
  if (!best) {
    path.nodes = {anchor};
    path.points = {p0};
    return path;
  }
  path.anchor_way = best->way_id;
  if (auto b = advance(graph, WayCursor{best->way_id, best->pos, -best->dir})) {
    const OsmId id = node_at(graph, *b);
    path.nodes.push_back(id);
    path.points.push_back(as_vec(index.position(id)));
  }
  path.anchor = path.nodes.size();
  path.nodes.push_back(anchor);
  path.points.push_back(p0);

  double arc = 0.0;
  WayCursor cur = *best;
  constexpr std::size_t max_steps = 100000;
  for (std::size_t step = 0; step < max_steps && arc <= ahead_m; ++step) {
    auto nxt = advance(graph, cur);
    if (!nxt) break;
    const OsmId id = node_at(graph, *nxt);
    const Vec2 p = as_vec(index.position(id));
    arc += norm(p - path.points.back());
    path.nodes.push_back(id);
    path.points.push_back(p);
    cur = *nxt;
  }
  return path;
}

/// Index of the path segment holding the pose's foot: the segment entering N0 or the one
/// leaving it, whichever is closer (ties go to the entering segment).
inline std::optional<std::size_t> foot_segment(const TravelPath& path, Vec2 pose) {
  std::vector<std::size_t> candidates;
  if (path.anchor > 0) candidates.push_back(path.anchor - 1);
  if (path.anchor + 1 < path.points.size()) candidates.push_back(path.anchor);

  std::optional<std::size_t> seg;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s : candidates) {
    if (path.points[s] == path.points[s + 1]) continue;
    const double d = point_segment_distance(pose, path.points[s], path.points[s + 1]);
    if (d < best) {
      best = d;
      seg = s;
    }
  }
  return seg;
}

/// Arc length d1 + d2 from the pose's foot through N0 to N1 along the travel direction.
/// Throws NoIntersectionAhead when N1 is not reached within the search distance.
inline double distance_to_intersection(const OsmGraph& graph, const SpatialIndex& index,
                                       const VehiclePose& pose, OsmId n0, OsmId n1,
                                       const AttributeConfig& cfg = {}) {
  require_same_zone(pose.utm, index.position(n0));
  const Vec2 q = as_vec(pose.utm);
  if (n0 == n1 && q == as_vec(index.position(n1))) return 0.0;
  const auto path = travel_path(graph, index, n0, pose.heading_deg, cfg.intersection_search_m);
  const auto seg = foot_segment(path, q);
  if (!seg) throw Error(Errc::no_intersection_ahead, "no road segment at the anchor node");
  for (std::size_t i = *seg + 1; i < path.nodes.size(); ++i) {
    if (path.nodes[i] == n1) {
      const double d = distance_along_polyline(path.points, q, *seg, i);
      if (d <= cfg.intersection_search_m) return d;
      break;
    }
  }
  throw Error(Errc::no_intersection_ahead, "node " + std::to_string(n1) + " not ahead");
}

/// Full attribute record for one pose. Sub-failures leave optional fields unset.
inline SceneAttributes scene_attributes(const OsmGraph& graph, const SpatialIndex& index,
                                        const VehiclePose& pose, const AttributeConfig& cfg = {}) {
  const auto nn = nearest_way_node(index, pose.utm);
  const Vec2 q = as_vec(pose.utm);
  const double gamma = pose.heading_deg;

  SceneAttributes out;
  out.anchor_node = nn.node_id;
  const auto path = travel_path(graph, index, nn.node_id, gamma, cfg.intersection_search_m);
  out.anchor_way = path.anchor_way.value_or(nn.way_id);

  const auto& way = graph.way(out.anchor_way);
  out.direct = parse_direct(way, cfg);
  auto& ind = out.indirect;
  ind.speed_limit_kmh = speed_limit_kmh(way, cfg);
  ind.heading = normalize_deg(gamma);

  const Vec2 p0 = path.points[path.anchor];
  const auto seg = foot_segment(path, q);
  ind.dist_to_center = seg ? point_segment_distance(q, path.points[*seg], path.points[*seg + 1])
                           : norm(q - p0);

  // N2 and curvature.
  if (path.anchor + 1 < path.nodes.size() && path.points[path.anchor + 1] != p0) {
    out.next_node = path.nodes[path.anchor + 1];
    Vec2 incoming{std::cos(deg2rad(gamma)), std::sin(deg2rad(gamma))};
    if (path.anchor > 0 && path.points[path.anchor - 1] != p0) {
      incoming = p0 - path.points[path.anchor - 1];
    }
    ind.road_curvature_signed = road_curvature_signed(p0, path.points[path.anchor + 1], incoming);
    ind.road_curvature = std::abs(ind.road_curvature_signed);
  } else {
    out.missing_next_node = true;
  }

  // N1: first intersection node ahead of the foot.
  if (seg) {
    for (std::size_t i = *seg + 1; i < path.nodes.size(); ++i) {
      const auto type = classify_intersection(graph, index, path.nodes[i], cfg);
      if (type == IntersectionType::none) continue;
      const double d = distance_along_polyline(path.points, q, *seg, i);
      if (d > cfg.intersection_search_m) break;
      out.intersection_node = path.nodes[i];
      ind.intersection_type = type;
      ind.dist_to_intersection = d;
      ind.at_intersection = d < cfg.at_intersection_radius_m;
      const Vec2 p1 = path.points[i];
      if (p1 != p0) {
        ind.bearing_to_intersection = bearing_angle(p0, p1);
      } else if (p1 != q) {
        ind.bearing_to_intersection = bearing_angle(q, p1);
      }
      break;
    }
  }
  out.no_intersection_ahead = !out.intersection_node.has_value();
  return out;
}

}  // namespace osmroad
