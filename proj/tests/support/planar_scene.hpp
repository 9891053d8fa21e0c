#pragma once

// Builds small OSM graphs from planar coordinates. The XML carries approximate lat/lon
// (good enough for angles), while the index uses the exact planar positions.

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "osmroad/geodesy.hpp"
#include "osmroad/osm_model.hpp"
#include "osmroad/spatial_index.hpp"

namespace osmroad::test_support {

inline constexpr double kOriginEasting = 457000.0;
inline constexpr double kOriginNorthing = 5428000.0;
inline constexpr int kZone = 32;

class PlanarScene {
 public:
  PlanarScene& node(OsmId id, double x, double y, TagMap tags = {}) {
    nodes_.push_back({id, x, y, std::move(tags)});
    return *this;
  }

  PlanarScene& way(OsmId id, std::vector<OsmId> refs, TagMap tags = {{"highway", "residential"}}) {
    ways_.push_back({id, std::move(refs), std::move(tags)});
    return *this;
  }

  std::string xml() const {
    std::ostringstream os;
    os.precision(12);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
    for (const auto& n : nodes_) {
      const double lat = 49.0 + n.y / 111195.0;
      const double lon = 8.4 + n.x / (111195.0 * std::cos(49.0 * M_PI / 180.0));
      os << "  <node id=\"" << n.id << "\" lat=\"" << lat << "\" lon=\"" << lon << "\">\n";
      for (const auto& [k, v] : n.tags) os << "    <tag k=\"" << k << "\" v=\"" << v << "\"/>\n";
      os << "  </node>\n";
    }
    for (const auto& w : ways_) {
      os << "  <way id=\"" << w.id << "\">\n";
      for (auto r : w.refs) os << "    <nd ref=\"" << r << "\"/>\n";
      for (const auto& [k, v] : w.tags) os << "    <tag k=\"" << k << "\" v=\"" << v << "\"/>\n";
      os << "  </way>\n";
    }
    os << "</osm>\n";
    return os.str();
  }

  OsmGraph graph() const { return parse_osm(xml()).graph; }

  std::unordered_map<OsmId, UtmPoint> positions(double dx = 0.0, double dy = 0.0) const {
    std::unordered_map<OsmId, UtmPoint> out;
    for (const auto& n : nodes_) out[n.id] = at(n.x + dx, n.y + dy);
    return out;
  }

  SpatialIndex index(const OsmGraph& g, double dx = 0.0, double dy = 0.0) const {
    return SpatialIndex::from_positions(g, positions(dx, dy));
  }

  static UtmPoint at(double x, double y) {
    return {kOriginEasting + x, kOriginNorthing + y, kZone, Hemisphere::north};
  }

 private:
  struct N {
    OsmId id;
    double x;
    double y;
    TagMap tags;
  };
  struct W {
    OsmId id;
    std::vector<OsmId> refs;
    TagMap tags;
  };
  std::vector<N> nodes_;
  std::vector<W> ways_;
};

inline VehiclePose planar_pose(double x, double y, double heading_east_ccw) {
  return make_planar_pose(PlanarScene::at(x, y), heading_east_ccw);
}

}  // namespace osmroad::test_support
