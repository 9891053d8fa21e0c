#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "osmroad/error.hpp"
#include "osmroad/geodesy.hpp"
#include "osmroad/osm_model.hpp"

namespace osmroad {

struct IndexEntry {
  OsmId node_id = 0;
  OsmId way_id = 0;
  std::size_t position = 0;
  UtmPoint point;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct NearestNode {
  OsmId node_id = 0;
  OsmId way_id = 0;
  std::size_t position = 0;
  double distance = 0.0;
};

/// 2-D k-d tree over the nodes of highway ways. Each (node, way, position) membership is
/// one entry, so nodes shared by several ways appear once per membership.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {
    if (!entries_.empty()) {
      zone_ = entries_.front().point.zone;
      hemisphere_ = entries_.front().point.hemisphere;
    }
    for (const auto& e : entries_) {
      if (e.point.zone != zone_ || e.point.hemisphere != hemisphere_) {
        throw Error(Errc::zone_mismatch, "index entries span several UTM zones");
      }
      positions_.emplace(e.node_id, e.point);
    }
    build(0, entries_.size(), 0);
  }

  /// Projects every highway-way node into the given zone.
  static SpatialIndex build(const OsmGraph& graph, int zone, Hemisphere hemisphere) {
    std::unordered_map<OsmId, UtmPoint> positions;
    for (OsmId wid : highway_ways(graph)) {
      for (OsmId nid : graph.way(wid).node_refs) {
        if (!positions.contains(nid)) {
          const auto& n = graph.node(nid);
          positions.emplace(nid, to_utm_zone(n.lat, n.lon, zone, hemisphere));
        }
      }
    }
    return from_positions(graph, positions);
  }

  /// Uses caller-supplied planar positions for the graph's nodes (must cover every
  /// highway-way node).
  static SpatialIndex from_positions(const OsmGraph& graph,
                                     const std::unordered_map<OsmId, UtmPoint>& positions) {
    std::vector<IndexEntry> entries;
    for (OsmId wid : highway_ways(graph)) {
      const auto& refs = graph.way(wid).node_refs;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        auto it = positions.find(refs[i]);
        if (it == positions.end()) {
          throw Error(Errc::unknown_node, "no position for node " + std::to_string(refs[i]));
        }
        entries.push_back({refs[i], wid, i, it->second});
      }
    }
    return SpatialIndex(std::move(entries));
  }

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  int zone() const noexcept { return zone_; }
  Hemisphere hemisphere() const noexcept { return hemisphere_; }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }

  bool has_position(OsmId node) const { return positions_.contains(node); }
  const UtmPoint& position(OsmId node) const {
    auto it = positions_.find(node);
    if (it == positions_.end()) {
      throw Error(Errc::unknown_node, "node " + std::to_string(node) + " not indexed");
    }
    return it->second;
  }

  /// Entry minimizing Euclidean distance; ties go to the smallest (node, way, position).
  NearestNode nearest(const UtmPoint& p) const {
    if (entries_.empty()) throw Error(Errc::empty_index, "nearest query on empty index");
    if (p.zone != zone_ || p.hemisphere != hemisphere_) {
      throw Error(Errc::zone_mismatch, "query zone " + std::to_string(p.zone) + " vs index zone " +
                                           std::to_string(zone_));
    }
    Best best;
    search(0, entries_.size(), 0, as_vec(p), best);
    const auto& e = entries_[best.index];
    return {e.node_id, e.way_id, e.position, std::sqrt(best.d2)};
  }

 private:
  struct Best {
    std::size_t index = 0;
    double d2 = std::numeric_limits<double>::infinity();
  };

  static double coord(const IndexEntry& e, int axis) { return axis == 0 ? e.point.x : e.point.y; }

  // Implicit tree: the median of [lo, hi) sits at mid, split on `axis`.
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(entries_.begin() + static_cast<std::ptrdiff_t>(lo),
                     entries_.begin() + static_cast<std::ptrdiff_t>(mid),
                     entries_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [axis](const IndexEntry& a, const IndexEntry& b) {
                       return std::make_tuple(coord(a, axis), a.node_id, a.way_id, a.position) <
                              std::make_tuple(coord(b, axis), b.node_id, b.way_id, b.position);
                     });
    build(lo, mid, 1 - axis);
    build(mid + 1, hi, 1 - axis);
  }

  bool better(std::size_t candidate, double d2, const Best& best) const {
    if (d2 != best.d2) return d2 < best.d2;
    const auto& a = entries_[candidate];
    const auto& b = entries_[best.index];
    return std::tie(a.node_id, a.way_id, a.position) < std::tie(b.node_id, b.way_id, b.position);
  }

  void search(std::size_t lo, std::size_t hi, int axis, Vec2 q, Best& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto& e = entries_[mid];
    const double dx = e.point.x - q.x;
    const double dy = e.point.y - q.y;
    const double d2 = dx * dx + dy * dy;
    if (better(mid, d2, best)) best = {mid, d2};
    if (hi - lo == 1) return;

    const double split = coord(e, axis);
    const double diff = (axis == 0 ? q.x : q.y) - split;
    const bool left_first = diff < 0.0;
    if (left_first) {
      search(lo, mid, 1 - axis, q, best);
      if (diff * diff <= best.d2) search(mid + 1, hi, 1 - axis, q, best);
    } else {
      search(mid + 1, hi, 1 - axis, q, best);
      if (diff * diff <= best.d2) search(lo, mid, 1 - axis, q, best);
    }
  }

  std::vector<IndexEntry> entries_;
  std::unordered_map<OsmId, UtmPoint> positions_;
  int zone_ = 0;
  Hemisphere hemisphere_ = Hemisphere::north;
};

inline NearestNode nearest_way_node(const SpatialIndex& index, const UtmPoint& p) {
  return index.nearest(p);
}

}  // namespace osmroad
