#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "osmroad/attribute_io.hpp"
#include "osmroad/attributes.hpp"
#include "support/planar_scene.hpp"

using namespace osmroad;
using osmroad::test_support::PlanarScene;
using osmroad::test_support::planar_pose;

namespace {

TagMap hw(const std::string& type, TagMap extra = {}) {
  extra.emplace("highway", type);
  return extra;
}

// Four ways radiating from node 100 at the origin, 40 m arms with a midpoint node.
PlanarScene crossing_scene() {
  PlanarScene s;
  s.node(100, 0, 0);
  s.node(1, -40, 0).node(2, -20, 0);
  s.node(3, 40, 0).node(4, 20, 0);
  s.node(5, 0, 40).node(6, 0, 20);
  s.node(7, 0, -40).node(8, 0, -20);
  s.way(11, {1, 2, 100}).way(12, {100, 4, 3}).way(13, {100, 6, 5}).way(14, {8, 100}, hw("tertiary"));
  s.way(15, {7, 8}, hw("tertiary"));
  return s;
}

}  // namespace

// --- Direct attributes ----------------------------------------------------------

TEST(ParseDirect, ResidentialDefaults) {
  OsmWay w{1, {1, 2}, {{"highway", "residential"}}};
  const auto d = parse_direct(w);
  EXPECT_FALSE(d.one_way);
  EXPECT_EQ(d.num_lanes, 2);
  EXPECT_EQ(d.road_type, RoadType::residential);
  EXPECT_TRUE(d.lane_directions.empty());
  EXPECT_DOUBLE_EQ(speed_limit_kmh(w), 30.0);
}

TEST(ParseDirect, DefaultPolicyTable) {
  const std::pair<const char*, double> table[] = {
      {"residential", 30}, {"tertiary", 50}, {"secondary", 60}, {"service", 20}, {"unclassified", 50}};
  for (const auto& [type, speed] : table) {
    OsmWay w{1, {1, 2}, {{"highway", type}}};
    EXPECT_DOUBLE_EQ(speed_limit_kmh(w), speed) << type;
    EXPECT_EQ(to_string(parse_direct(w).road_type), type);
  }
  OsmWay oneway{1, {1, 2}, {{"highway", "tertiary"}, {"oneway", "yes"}}};
  EXPECT_EQ(parse_direct(oneway).num_lanes, 1);
  OsmWay motorway{1, {1, 2}, {{"highway", "motorway"}}};
  EXPECT_EQ(parse_direct(motorway).road_type, RoadType::other);
}

TEST(ParseDirect, OnewayAndLanes) {
  OsmWay w{1, {1, 2}, {{"highway", "tertiary"}, {"oneway", "yes"}, {"lanes", "1"}}};
  const auto d = parse_direct(w);
  EXPECT_TRUE(d.one_way);
  EXPECT_EQ(d.num_lanes, 1);
}

TEST(ParseDirect, TurnLanes) {
  OsmWay w{1, {1, 2}, {{"highway", "secondary"}, {"turn:lanes", "left|through|right"}}};
  const auto d = parse_direct(w);
  EXPECT_EQ(d.lane_directions, (std::vector<int>{0, 2, 4}));
  EXPECT_EQ(d.num_lanes, 3);
  EXPECT_EQ(parse_turn_lanes("left;through|through;right|left;right|left;through;right|none"),
            (std::vector<int>{1, 3, 5, 6, 2}));
}

TEST(ParseDirect, Maxspeed) {
  OsmWay w{1, {1, 2}, {{"highway", "residential"}, {"maxspeed", "70"}}};
  EXPECT_DOUBLE_EQ(speed_limit_kmh(w), 70.0);
  EXPECT_NEAR(*parse_maxspeed("30 mph"), 48.28032, 1e-9);
  EXPECT_FALSE(parse_maxspeed("signals"));
  OsmWay bad{1, {1, 2}, {{"highway", "service"}, {"maxspeed", "walk"}}};
  EXPECT_DOUBLE_EQ(speed_limit_kmh(bad), 20.0);
}

// --- Intersection classes --------------------------------------------------------

TEST(ClassifyIntersection, InteriorNodeIsNone) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 20, 0).way(1, {1, 2, 3});
  const auto g = s.graph();
  EXPECT_EQ(classify_intersection(g, s.index(g), 2), IntersectionType::none);
  EXPECT_EQ(classify_intersection(g, 2), IntersectionType::none);
}

TEST(ClassifyIntersection, FourWaysIsCrossing) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  EXPECT_EQ(classify_intersection(g, s.index(g), 100), IntersectionType::crossing);
  EXPECT_EQ(classify_intersection(g, 100), IntersectionType::crossing);
}

TEST(ClassifyIntersection, TerminalInOneInteriorToAnotherIsTJunction) {
  // Main road along x, side road ending on it from the north.
  PlanarScene s;
  s.node(1, -20, 0).node(2, 0, 0).node(3, 20, 0).node(4, 0, 20);
  s.way(1, {1, 2, 3}).way(2, {4, 2});
  const auto g = s.graph();
  EXPECT_EQ(classify_intersection(g, s.index(g), 2), IntersectionType::t_junction);
}

TEST(ClassifyIntersection, ThreeWayEndsIsTJunction) {
  PlanarScene s;
  s.node(1, -20, 0).node(2, 0, 0).node(3, 20, 0).node(4, 0, 20);
  s.way(1, {1, 2}).way(2, {2, 3}).way(3, {4, 2});
  const auto g = s.graph();
  EXPECT_EQ(classify_intersection(g, s.index(g), 2), IntersectionType::t_junction);
}

TEST(ClassifyIntersection, OnewayMergeAndExit) {
  const TagMap ow = hw("tertiary", {{"oneway", "yes"}});
  PlanarScene merge;
  merge.node(1, -20, 5).node(2, -20, -5).node(3, 0, 0).node(4, 20, 0);
  merge.way(1, {1, 3}, ow).way(2, {2, 3}, ow).way(3, {3, 4}, ow);
  auto g = merge.graph();
  EXPECT_EQ(classify_intersection(g, merge.index(g), 3), IntersectionType::merge);

  PlanarScene exit;
  exit.node(1, -20, 0).node(2, 0, 0).node(3, 20, 5).node(4, 20, -5);
  exit.way(1, {1, 2}, ow).way(2, {2, 3}, ow).way(3, {2, 4}, ow);
  g = exit.graph();
  EXPECT_EQ(classify_intersection(g, exit.index(g), 2), IntersectionType::exit);

  // Same geometry without oneway tags is a plain T.
  PlanarScene plain;
  plain.node(1, -20, 0).node(2, 0, 0).node(3, 20, 5).node(4, 20, -5);
  plain.way(1, {1, 2}).way(2, {2, 3}).way(3, {2, 4});
  g = plain.graph();
  EXPECT_EQ(classify_intersection(g, plain.index(g), 2), IntersectionType::t_junction);
}

TEST(ClassifyIntersection, TurningNeedsBendAboveThreshold) {
  PlanarScene bend;
  bend.node(1, 0, 0).node(2, 10, 0).node(3, 10, 10).way(1, {1, 2}).way(2, {2, 3});
  auto g = bend.graph();
  EXPECT_EQ(classify_intersection(g, bend.index(g), 2), IntersectionType::turning);

  PlanarScene gentle;  // 20 degree bend
  const double a = deg2rad(20.0);
  gentle.node(1, 0, 0).node(2, 10, 0).node(3, 10 + 10 * std::cos(a), 10 * std::sin(a));
  gentle.way(1, {1, 2}).way(2, {2, 3});
  g = gentle.graph();
  EXPECT_EQ(classify_intersection(g, gentle.index(g), 2), IntersectionType::none);
}

TEST(ClassifyIntersection, UnknownNodeThrows) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  try {
    classify_intersection(g, s.index(g), 999);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_node);
  }
}

// --- Distances and angles ------------------------------------------------------------

TEST(DistanceToIntersection, StraightWay) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 20, 0).way(1, {1, 2, 3});
  const auto g = s.graph();
  const auto idx = s.index(g);
  EXPECT_NEAR(distance_to_intersection(g, idx, planar_pose(4, 0, 0), 1, 3), 16.0, 1e-12);
}

TEST(DistanceToIntersection, PoseAtTargetIsZero) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 20, 0).way(1, {1, 2, 3});
  const auto g = s.graph();
  EXPECT_EQ(distance_to_intersection(g, s.index(g), planar_pose(20, 0, 0), 3, 3), 0.0);
}

TEST(DistanceToIntersection, LShapeFollowsPolyline) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 10, 10).way(1, {1, 2, 3});
  const auto g = s.graph();
  const double d = distance_to_intersection(g, s.index(g), planar_pose(0, 0, 0), 1, 3);
  EXPECT_NEAR(d, 20.0, 1e-12);
  EXPECT_GT(std::abs(d - std::sqrt(200.0)), 1.0);
}

TEST(DistanceToIntersection, BehindOrBeyondSearchThrows) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 20, 0).node(4, 500, 0).way(1, {1, 2, 3, 4});
  const auto g = s.graph();
  const auto idx = s.index(g);
  for (OsmId target : {OsmId{1}, OsmId{4}}) {
    try {
      distance_to_intersection(g, idx, planar_pose(12, 0, 0), 2, target);
      FAIL() << target;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::no_intersection_ahead);
    }
  }
}

TEST(DistanceToIntersection, PolylineAtLeastChordOnRandomPaths) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> step(5.0, 20.0);
  std::uniform_real_distribution<double> turn(-60.0, 60.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    PlanarScene s;
    std::vector<OsmId> refs;
    double x = 0, y = 0, h = 0;
    for (OsmId id = 1; id <= 6; ++id) {
      s.node(id, x, y);
      refs.push_back(id);
      h += turn(rng);
      const double l = step(rng);
      x += l * std::cos(deg2rad(h));
      y += l * std::sin(deg2rad(h));
    }
    s.way(1, refs);
    const auto g = s.graph();
    const auto idx = s.index(g);
    const auto& p1 = idx.position(1);
    const auto& p2 = idx.position(2);
    const double t = 0.5 * frac(rng);  // stays nearest to node 1
    const Vec2 pose_xy = as_vec(p1) + t * (as_vec(p2) - as_vec(p1));
    const auto pose = make_planar_pose({pose_xy.x, pose_xy.y, 32, Hemisphere::north},
                                       bearing_angle(p1, p2));
    const double d = distance_to_intersection(g, idx, pose, 1, 6);
    EXPECT_GE(d + 1e-9, norm(as_vec(idx.position(6)) - pose_xy));
  }
}

TEST(BearingAngle, CardinalDirections) {
  EXPECT_DOUBLE_EQ(bearing_angle(Vec2{0, 0}, Vec2{5, 0}), 0.0);
  EXPECT_DOUBLE_EQ(bearing_angle(Vec2{0, 0}, Vec2{0, 5}), 90.0);
  EXPECT_DOUBLE_EQ(bearing_angle(Vec2{0, 0}, Vec2{-5, 0}), 180.0);
  EXPECT_DOUBLE_EQ(bearing_angle(Vec2{0, 0}, Vec2{0, -5}), 270.0);
  EXPECT_THROW(bearing_angle(Vec2{1, 1}, Vec2{1, 1}), Error);
}

TEST(BearingAngle, QuadrantOracleAndReversal) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const Vec2 q{u(rng), u(rng)};
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    // Quadrant-by-quadrant reconstruction from atan of the absolute ratio.
    const double base = rad2deg(std::atan(std::abs(dy) / std::abs(dx)));
    double want = 0.0;
    if (dx > 0 && dy >= 0) want = base;
    else if (dx <= 0 && dy > 0) want = 180.0 - base;
    else if (dx < 0 && dy <= 0) want = 180.0 + base;
    else want = 360.0 - base;
    const double got = bearing_angle(p, q);
    EXPECT_NEAR(got, want, 1e-9);
    const double back = bearing_angle(q, p);
    EXPECT_NEAR(std::fmod(back - got + 360.0, 360.0), 180.0, 1e-9);
  }
}

TEST(RoadCurvature, CollinearAndRightAngle) {
  EXPECT_NEAR(road_curvature(Vec2{10, 0}, Vec2{20, 0}, Vec2{1, 0}), 0.0, 1e-12);
  EXPECT_NEAR(road_curvature(Vec2{10, 0}, Vec2{10, 10}, Vec2{1, 0}), 90.0, 1e-12);
  EXPECT_NEAR(road_curvature_signed(Vec2{10, 0}, Vec2{10, -10}, Vec2{1, 0}), -90.0, 1e-12);
}

TEST(RoadCurvature, DotProductOracleAndRigidInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 prev{u(rng), u(rng)};
    const Vec2 n0{u(rng), u(rng)};
    const Vec2 n2{u(rng), u(rng)};
    const Vec2 in = n0 - prev;
    const Vec2 out = n2 - n0;
    const double c = std::clamp(dot(in, out) / (norm(in) * norm(out)), -1.0, 1.0);
    const double want = rad2deg(std::acos(c));
    const double got = road_curvature(n0, n2, in);
    // acos loses precision near 0 and 180 degrees; compare there through the sine.
    if (std::abs(c) < 0.999) {
      EXPECT_NEAR(got, want, 1e-9);
    } else {
      EXPECT_NEAR(got, want, 1e-5);
    }

    const double th = ang(rng);
    const Vec2 t{u(rng), u(rng)};
    auto move = [&](Vec2 v) {
      return Vec2{std::cos(th) * v.x - std::sin(th) * v.y + t.x,
                  std::sin(th) * v.x + std::cos(th) * v.y + t.y};
    };
    EXPECT_NEAR(road_curvature(move(n0), move(n2), move(n0) - move(prev)), got, 1e-9);
  }
}

// --- Full record -------------------------------------------------------------------------

TEST(SceneAttributes, StraightIsolatedWay) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).node(3, 20, 0).node(4, 30, 0).way(1, {1, 2, 3, 4});
  const auto g = s.graph();
  const auto a = scene_attributes(g, s.index(g), planar_pose(11, 0.7, 0));
  EXPECT_EQ(a.anchor_node, 2);
  EXPECT_EQ(a.indirect.intersection_type, IntersectionType::none);
  EXPECT_FALSE(a.intersection_node);
  EXPECT_FALSE(a.indirect.dist_to_intersection);
  EXPECT_FALSE(a.indirect.at_intersection);
  EXPECT_NEAR(a.indirect.road_curvature, 0.0, 1e-12);
  EXPECT_NEAR(a.indirect.dist_to_center, 0.7, 1e-9);
  EXPECT_EQ(a.next_node, 3);
  EXPECT_EQ(a.direct.road_type, RoadType::residential);
  EXPECT_DOUBLE_EQ(a.indirect.speed_limit_kmh, 30.0);
}

TEST(SceneAttributes, CrossingAhead) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  // Heading east, 16 m before the crossing, 1.2 m to the right of the centerline.
  const auto a = scene_attributes(g, s.index(g), planar_pose(-16.0, -1.2, 0.0));
  EXPECT_EQ(a.anchor_node, 2);
  ASSERT_TRUE(a.intersection_node);
  EXPECT_EQ(*a.intersection_node, 100);
  EXPECT_EQ(a.indirect.intersection_type, IntersectionType::crossing);
  ASSERT_TRUE(a.indirect.dist_to_intersection);
  EXPECT_NEAR(*a.indirect.dist_to_intersection, 16.0, 1e-6);
  EXPECT_NEAR(a.indirect.dist_to_center, 1.2, 1e-6);
  EXPECT_FALSE(a.indirect.at_intersection);
  ASSERT_TRUE(a.indirect.bearing_to_intersection);
  EXPECT_NEAR(*a.indirect.bearing_to_intersection, 0.0, 1e-9);
  EXPECT_NEAR(a.indirect.heading, 0.0, 1e-12);
}

TEST(SceneAttributes, AtIntersectionWithinRadius) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  const auto a = scene_attributes(g, s.index(g), planar_pose(-6.0, 0.0, 0.0));
  ASSERT_TRUE(a.indirect.dist_to_intersection);
  EXPECT_NEAR(*a.indirect.dist_to_intersection, 6.0, 1e-9);
  EXPECT_TRUE(a.indirect.at_intersection);
}

TEST(SceneAttributes, TravelDirectionFollowsHeading) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  // Same spot, heading west: the walk goes away from the crossing and runs out of road.
  const auto a = scene_attributes(g, s.index(g), planar_pose(-16.0, -1.2, 180.0));
  EXPECT_FALSE(a.intersection_node);
  EXPECT_TRUE(a.no_intersection_ahead);
  EXPECT_EQ(a.next_node, 1);
}

TEST(SceneAttributes, CurvatureAtBend) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 20, 0).node(3, 20, 20).node(4, 20, 40).way(1, {1, 2, 3, 4});
  const auto g = s.graph();
  const auto a = scene_attributes(g, s.index(g), planar_pose(18, 0.5, 0));
  EXPECT_EQ(a.anchor_node, 2);
  EXPECT_NEAR(a.indirect.road_curvature, 90.0, 1e-9);
  EXPECT_NEAR(a.indirect.road_curvature_signed, 90.0, 1e-9);
}

TEST(SceneAttributes, MissingNextNodeAtWayEnd) {
  PlanarScene s;
  s.node(1, 0, 0).node(2, 10, 0).way(1, {1, 2});
  const auto g = s.graph();
  const auto a = scene_attributes(g, s.index(g), planar_pose(11, 0, 0));
  EXPECT_TRUE(a.missing_next_node);
  EXPECT_EQ(a.indirect.road_curvature, 0.0);
}

TEST(SceneAttributes, RigidTranslationInvariance) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::uniform_real_distribution<double> off(-5000.0, 5000.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng), h = u(rng) * 12.0;
    const double dx = off(rng), dy = off(rng);
    const auto a = scene_attributes(g, s.index(g), planar_pose(x, y, h));
    const auto b = scene_attributes(g, s.index(g, dx, dy), planar_pose(x + dx, y + dy, h));
    EXPECT_EQ(a.anchor_node, b.anchor_node);
    EXPECT_EQ(a.indirect.intersection_type, b.indirect.intersection_type);
    EXPECT_EQ(a.indirect.at_intersection, b.indirect.at_intersection);
    ASSERT_EQ(a.indirect.dist_to_intersection.has_value(), b.indirect.dist_to_intersection.has_value());
    if (a.indirect.dist_to_intersection) {
      EXPECT_NEAR(*a.indirect.dist_to_intersection, *b.indirect.dist_to_intersection, 1e-6);
    }
    ASSERT_EQ(a.indirect.bearing_to_intersection.has_value(),
              b.indirect.bearing_to_intersection.has_value());
    if (a.indirect.bearing_to_intersection) {
      EXPECT_NEAR(*a.indirect.bearing_to_intersection, *b.indirect.bearing_to_intersection, 1e-6);
    }
    EXPECT_NEAR(a.indirect.road_curvature, b.indirect.road_curvature, 1e-6);
    EXPECT_NEAR(a.indirect.heading, b.indirect.heading, 1e-6);
    EXPECT_NEAR(a.indirect.dist_to_center, b.indirect.dist_to_center, 1e-6);
    EXPECT_EQ(a.indirect.speed_limit_kmh, b.indirect.speed_limit_kmh);
  }
}

TEST(SceneAttributes, Deterministic) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  const auto idx = s.index(g);
  const auto pose = planar_pose(-13.0, 2.0, 10.0);
  EXPECT_EQ(scene_attributes(g, idx, pose), scene_attributes(g, idx, pose));
}

TEST(SceneAttributes, EmptyIndexThrows) {
  OsmGraph g;
  SpatialIndex idx;
  EXPECT_THROW(scene_attributes(g, idx, planar_pose(0, 0, 0)), Error);
}

// --- Export -------------------------------------------------------------------------------

namespace {

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST(ExportFeatures, ZeroFramesHeaderOnly) {
  std::ostringstream out;
  export_features(out, {}, {});
  EXPECT_EQ(out.str(), std::string(feature_csv_header()) + "\n");
}

TEST(ExportFeatures, OneFrameHas25Columns) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  const std::vector<SceneAttributes> attrs{scene_attributes(g, s.index(g), planar_pose(-16, -1.2, 0))};
  const std::vector<DynamicsRecord> dyn(1, DynamicsRecord{});
  EXPECT_EQ(attribute_vector(attrs[0]).size(), 12u);
  std::ostringstream out;
  export_features(out, attrs, dyn);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(count_fields(header), 25u);
  EXPECT_EQ(count_fields(row), 25u);
  std::istringstream fields(row);
  std::string f;
  while (std::getline(fields, f, ',')) EXPECT_NO_THROW((void)std::stod(f)) << f;
}

TEST(ExportFeatures, LengthMismatch) {
  std::ostringstream out;
  const std::vector<SceneAttributes> attrs(2);
  const std::vector<DynamicsRecord> dyn(3);
  try {
    export_features(out, attrs, dyn);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::length_mismatch);
  }
}

TEST(ExportFeatures, HundredFramesFileScan) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  const auto idx = s.index(g);
  std::vector<VehiclePose> poses;
  std::vector<SceneAttributes> attrs;
  for (int i = 0; i < 100; ++i) {
    poses.push_back(make_planar_pose(PlanarScene::at(-39.0 + i * 0.38, 0.5), 0.0, 0.1 * i));
    attrs.push_back(scene_attributes(g, idx, poses.back()));
  }
  const auto dyn = dynamics_from_poses(poses);
  const auto path = std::filesystem::temp_directory_path() / "osmroad_features_100.csv";
  {
    std::ofstream f(path);
    export_features(f, attrs, dyn);
  }
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(count_fields(line), 25u);
  while (std::getline(in, line)) {
    EXPECT_EQ(count_fields(line), 25u);
    ++rows;
  }
  EXPECT_EQ(rows, 100u);
  EXPECT_NEAR(dyn[5][6], 3.8, 1e-6);  // 0.38 m per 0.1 s
  std::filesystem::remove(path);
}

TEST(AttributeCsv, HeaderNamesTwelveAttributes) {
  const auto s = crossing_scene();
  const auto g = s.graph();
  const std::vector<VehiclePose> poses{planar_pose(-16, -1.2, 0)};
  const std::vector<SceneAttributes> attrs{scene_attributes(g, s.index(g), poses[0])};
  std::ostringstream out;
  write_attribute_csv(out, poses, attrs);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(count_fields(header), count_fields(row));
  EXPECT_NE(row.find(",crossing,"), std::string::npos);
  EXPECT_NE(row.find(",residential,"), std::string::npos);
}
