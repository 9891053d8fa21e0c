#pragma once

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "osmroad/error.hpp"

namespace osmroad {

using OsmId = std::int64_t;
using TagMap = std::map<std::string, std::string, std::less<>>;

struct OsmNode {
  OsmId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  TagMap tags;

  friend bool operator==(const OsmNode&, const OsmNode&) = default;
};

struct OsmWay {
  OsmId id = 0;
  std::vector<OsmId> node_refs;
  TagMap tags;

  bool is_closed() const noexcept {
    return node_refs.size() > 2 && node_refs.front() == node_refs.back();
  }

  friend bool operator==(const OsmWay&, const OsmWay&) = default;
};

struct OsmMember {
  std::string type;
  OsmId ref = 0;
  std::string role;

  friend bool operator==(const OsmMember&, const OsmMember&) = default;
};

struct OsmRelation {
  OsmId id = 0;
  std::vector<OsmMember> members;
  TagMap tags;

  friend bool operator==(const OsmRelation&, const OsmRelation&) = default;
};

/// One occurrence of a node inside a way.
struct WayMembership {
  OsmId way_id = 0;
  std::size_t position = 0;

  friend bool operator==(const WayMembership&, const WayMembership&) = default;
};

struct ParseReport {
  std::size_t dropped_ways = 0;       // unresolvable refs or fewer than two nodes
  std::size_t dropped_nodes = 0;      // missing or out-of-range coordinates
  std::size_t dropped_relations = 0;  // reserved; relations are kept as-is
  std::vector<std::string> warnings;

  friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

inline std::optional<std::string_view> find_tag(const TagMap& tags, std::string_view key) {
  if (auto it = tags.find(key); it != tags.end()) {
    return std::string_view(it->second);
  }
  return std::nullopt;
}

/// Parsed OSM extract. Immutable after construction.
class OsmGraph {
 public:
  OsmGraph() = default;
  OsmGraph(std::map<OsmId, OsmNode> nodes, std::map<OsmId, OsmWay> ways,
           std::map<OsmId, OsmRelation> relations)
      : nodes_(std::move(nodes)), ways_(std::move(ways)), relations_(std::move(relations)) {
    rebuild_index();
  }

  const std::map<OsmId, OsmNode>& nodes() const noexcept { return nodes_; }
  const std::map<OsmId, OsmWay>& ways() const noexcept { return ways_; }
  const std::map<OsmId, OsmRelation>& relations() const noexcept { return relations_; }

  const OsmNode* find_node(OsmId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
  }
  const OsmWay* find_way(OsmId id) const {
    auto it = ways_.find(id);
    return it == ways_.end() ? nullptr : &it->second;
  }
  const OsmNode& node(OsmId id) const {
    if (const auto* n = find_node(id)) return *n;
    throw Error(Errc::unknown_node, "node " + std::to_string(id));
  }
  const OsmWay& way(OsmId id) const {
    if (const auto* w = find_way(id)) return *w;
    throw Error(Errc::unknown_way, "way " + std::to_string(id));
  }

  /// Every (way, position) slot holding the node, in ascending (way, position) order.
  const std::vector<WayMembership>& memberships(OsmId node_id) const {
    static const std::vector<WayMembership> none;
    auto it = way_node_index_.find(node_id);
    return it == way_node_index_.end() ? none : it->second;
  }

  /// Memberships restricted to highway-tagged ways.
  std::vector<WayMembership> highway_memberships(OsmId node_id) const {
    std::vector<WayMembership> out;
    for (const auto& m : memberships(node_id)) {
      if (is_highway(way(m.way_id))) out.push_back(m);
    }
    return out;
  }

  /// Number of distinct highway ways through the node.
  std::size_t highway_degree(OsmId node_id) const {
    auto it = highway_degree_.find(node_id);
    return it == highway_degree_.end() ? 0 : it->second;
  }

  const std::unordered_map<OsmId, std::vector<WayMembership>>& way_node_index() const noexcept {
    return way_node_index_;
  }

  static bool is_highway(const OsmWay& w) { return w.tags.contains("highway"); }

  friend bool operator==(const OsmGraph& a, const OsmGraph& b) {
    return a.nodes_ == b.nodes_ && a.ways_ == b.ways_ && a.relations_ == b.relations_;
  }

 private:
  void rebuild_index() {
    way_node_index_.clear();
    highway_degree_.clear();
    for (const auto& [wid, w] : ways_) {
      for (std::size_t i = 0; i < w.node_refs.size(); ++i) {
        way_node_index_[w.node_refs[i]].push_back({wid, i});
      }
    }
    for (const auto& [nid, list] : way_node_index_) {
      std::size_t degree = 0;
      OsmId last = 0;
      bool first = true;
      for (const auto& m : list) {
        if (!first && m.way_id == last) continue;
        first = false;
        last = m.way_id;
        if (is_highway(ways_.at(m.way_id))) ++degree;
      }
      if (degree > 0) highway_degree_[nid] = degree;
    }
  }

  std::map<OsmId, OsmNode> nodes_;
  std::map<OsmId, OsmWay> ways_;
  std::map<OsmId, OsmRelation> relations_;
  std::unordered_map<OsmId, std::vector<WayMembership>> way_node_index_;
  std::unordered_map<OsmId, std::size_t> highway_degree_;
};

struct ParseResult {
  OsmGraph graph;
  ParseReport report;
};

namespace detail {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

class OsmXmlReader {
 public:
  ParseResult parse(std::string_view xml) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw Error(Errc::malformed_xml, "cannot allocate XML parser");
    XML_SetUserData(parser.get(), this);
    XML_SetElementHandler(parser.get(), &OsmXmlReader::on_start, &OsmXmlReader::on_end);

    constexpr std::size_t chunk = std::size_t{1} << 26;
    std::size_t offset = 0;
    do {
      const std::size_t len = std::min(chunk, xml.size() - offset);
      const bool last = offset + len == xml.size();
      if (XML_Parse(parser.get(), xml.data() + offset, static_cast<int>(len),
                    last ? XML_TRUE : XML_FALSE) == XML_STATUS_ERROR) {
        if (!failure_.empty()) throw Error(Errc::malformed_xml, failure_);
        throw Error(Errc::malformed_xml,
                    std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                        std::to_string(XML_GetCurrentLineNumber(parser.get())));
      }
      offset += len;
    } while (offset < xml.size());
    if (!failure_.empty()) throw Error(Errc::malformed_xml, failure_);
    if (!saw_root_) throw Error(Errc::malformed_xml, "missing <osm> root element");
    return finish();
  }

 private:
  enum class Open { none, node, way, relation };

  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<OsmXmlReader*>(self)->start(name, attrs);
  }
  static void XMLCALL on_end(void* self, const XML_Char* name) {
    static_cast<OsmXmlReader*>(self)->end(name);
  }

  static const char* attr(const XML_Char** attrs, const char* key) {
    for (int i = 0; attrs[i] != nullptr; i += 2) {
      if (std::strcmp(attrs[i], key) == 0) return attrs[i + 1];
    }
    return nullptr;
  }

  static std::optional<OsmId> id_attr(const XML_Char** attrs, const char* key) {
    const char* v = attr(attrs, key);
    OsmId id = 0;
    if (v == nullptr || !parse_number(std::string_view(v), id)) return std::nullopt;
    return id;
  }

  void start(const char* name, const XML_Char** attrs) {
    ++depth_;
    if (depth_ == 1) {
      if (std::strcmp(name, "osm") != 0) {
        failure_ = std::string("root element is <") + name + ">, expected <osm>";
        stop_ = true;
      }
      saw_root_ = true;
      return;
    }
    if (stop_) return;

    if (depth_ == 2) {
      open_ = Open::none;
      if (std::strcmp(name, "node") == 0) {
        open_ = Open::node;
        node_ = OsmNode{};
        node_valid_ = false;
        auto id = id_attr(attrs, "id");
        const char* lat = attr(attrs, "lat");
        const char* lon = attr(attrs, "lon");
        if (id && lat && lon && parse_number(std::string_view(lat), node_.lat) &&
            parse_number(std::string_view(lon), node_.lon) && node_.lat >= -90.0 &&
            node_.lat <= 90.0 && node_.lon >= -180.0 && node_.lon <= 180.0) {
          node_.id = *id;
          node_valid_ = true;
        }
      } else if (std::strcmp(name, "way") == 0) {
        open_ = Open::way;
        way_ = OsmWay{};
        auto id = id_attr(attrs, "id");
        way_valid_ = id.has_value();
        if (id) way_.id = *id;
      } else if (std::strcmp(name, "relation") == 0) {
        open_ = Open::relation;
        relation_ = OsmRelation{};
        auto id = id_attr(attrs, "id");
        relation_valid_ = id.has_value();
        if (id) relation_.id = *id;
      }
      return;
    }

    if (depth_ != 3 || open_ == Open::none) return;
    if (std::strcmp(name, "tag") == 0) {
      const char* k = attr(attrs, "k");
      const char* v = attr(attrs, "v");
      if (k == nullptr || v == nullptr) return;
      TagMap* tags = open_ == Open::node ? &node_.tags
                     : open_ == Open::way ? &way_.tags
                                          : &relation_.tags;
      (*tags)[k] = v;
    } else if (std::strcmp(name, "nd") == 0 && open_ == Open::way) {
      if (auto ref = id_attr(attrs, "ref")) {
        way_.node_refs.push_back(*ref);
      } else {
        way_valid_ = false;
      }
    } else if (std::strcmp(name, "member") == 0 && open_ == Open::relation) {
      OsmMember m;
      const char* type = attr(attrs, "type");
      const char* role = attr(attrs, "role");
      auto ref = id_attr(attrs, "ref");
      if (!ref) return;
      m.type = type ? type : "";
      m.role = role ? role : "";
      m.ref = *ref;
      relation_.members.push_back(std::move(m));
    }
  }

  void end(const char* /*name*/) {
    if (depth_ == 2 && !stop_) {
      switch (open_) {
        case Open::node:
          if (node_valid_) {
            nodes_[node_.id] = std::move(node_);
          } else {
            ++report_.dropped_nodes;
          }
          break;
        case Open::way:
          if (way_valid_) {
            ways_[way_.id] = std::move(way_);
          } else {
            ++report_.dropped_ways;
          }
          break;
        case Open::relation:
          if (relation_valid_) relations_[relation_.id] = std::move(relation_);
          break;
        case Open::none:
          break;
      }
      open_ = Open::none;
    }
    --depth_;
  }

  ParseResult finish() {
    for (auto it = ways_.begin(); it != ways_.end();) {
      const auto& refs = it->second.node_refs;
      const bool resolvable =
          refs.size() >= 2 &&
          std::all_of(refs.begin(), refs.end(), [&](OsmId r) { return nodes_.contains(r); });
      if (resolvable) {
        ++it;
      } else {
        ++report_.dropped_ways;
        it = ways_.erase(it);
      }
    }
    if (report_.dropped_ways > 0) {
      report_.warnings.push_back("dropped " + std::to_string(report_.dropped_ways) +
                                 " ways with unresolvable node references");
    }
    if (nodes_.empty()) {
      report_.warnings.push_back("EmptyExtract: extract contains no nodes");
    }
    return {OsmGraph(std::move(nodes_), std::move(ways_), std::move(relations_)),
            std::move(report_)};
  }

  int depth_ = 0;
  bool saw_root_ = false;
  bool stop_ = false;
  std::string failure_;
  Open open_ = Open::none;
  OsmNode node_;
  bool node_valid_ = false;
  OsmWay way_;
  bool way_valid_ = false;
  OsmRelation relation_;
  bool relation_valid_ = false;
  std::map<OsmId, OsmNode> nodes_;
  std::map<OsmId, OsmWay> ways_;
  std::map<OsmId, OsmRelation> relations_;
  ParseReport report_;
};

}  // namespace detail

/// Parses an OSM XML v0.6 document. Throws Error(malformed_xml) on unparseable
/// input or a non-<osm> root; an extract with no nodes yields an empty graph and
/// an EmptyExtract warning in the report.
inline ParseResult parse_osm(std::string_view xml) {
  detail::OsmXmlReader reader;
  return reader.parse(xml);
}

inline ParseResult load_osm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::string xml((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_osm(xml);
}

/// Ids of all ways carrying a highway tag, ascending.
inline std::vector<OsmId> highway_ways(const OsmGraph& graph) {
  std::vector<OsmId> out;
  for (const auto& [id, w] : graph.ways()) {
    if (OsmGraph::is_highway(w)) out.push_back(id);
  }
  return out;
}

}  // namespace osmroad
