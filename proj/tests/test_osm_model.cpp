#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "osmroad/osm_model.hpp"

using namespace osmroad;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(OSMROAD_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Independent element count: scan lines for opening tags.
std::size_t count_open_tags(const std::string& xml, const std::string& tag) {
  std::regex re("<" + tag + "[\\s>/]");
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(xml.begin(), xml.end(), re), std::sregex_iterator()));
}

}  // namespace

TEST(ParseOsm, EmptyDocumentYieldsEmptyGraphWithWarning) {
  auto r = parse_osm("<osm/>");
  EXPECT_EQ(r.graph.nodes().size(), 0u);
  EXPECT_EQ(r.graph.ways().size(), 0u);
  ASSERT_FALSE(r.report.warnings.empty());
  EXPECT_NE(r.report.warnings.back().find("EmptyExtract"), std::string::npos);
}

TEST(ParseOsm, MalformedInputThrows) {
  for (const char* bad : {"", "<osm>", "<osm><node id=\"1\" lat=\"1\" lon=\"2\"></osm>",
                          "not xml at all", "<map/>"}) {
    try {
      parse_osm(bad);
      FAIL() << "accepted: " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::malformed_xml) << bad;
    }
  }
}

TEST(ParseOsm, NodeTagsCaptured) {
  auto r = parse_osm(R"(<osm><node id="7" lat="49.0" lon="8.4">
      <tag k="highway" v="traffic_signals"/></node></osm>)");
  const auto& n = r.graph.node(7);
  EXPECT_DOUBLE_EQ(n.lat, 49.0);
  EXPECT_DOUBLE_EQ(n.lon, 8.4);
  ASSERT_TRUE(find_tag(n.tags, "highway"));
  EXPECT_EQ(*find_tag(n.tags, "highway"), "traffic_signals");
}

TEST(ParseOsm, FixtureCountsMatchHandCountAndLineScan) {
  const auto xml = slurp("ten_nodes.osm");
  auto r = parse_osm(xml);
  // Hand count of the fixture: 10 nodes, 2 ways of 5 refs, 1 relation.
  EXPECT_EQ(r.graph.nodes().size(), 10u);
  EXPECT_EQ(r.graph.ways().size(), 2u);
  EXPECT_EQ(r.graph.relations().size(), 1u);
  for (const auto& [id, w] : r.graph.ways()) EXPECT_EQ(w.node_refs.size(), 5u);

  EXPECT_EQ(r.graph.nodes().size(), count_open_tags(xml, "node"));
  EXPECT_EQ(r.graph.ways().size(), count_open_tags(xml, "way"));
  EXPECT_EQ(r.graph.relations().size(), count_open_tags(xml, "relation"));
  EXPECT_EQ(r.graph.relations().at(500).members.size(), count_open_tags(xml, "member"));
  EXPECT_EQ(r.report.dropped_ways, 0u);
}

TEST(ParseOsm, UnresolvableWaysDroppedAndCounted) {
  auto r = parse_osm(slurp("mixed_ways.osm"));
  EXPECT_EQ(r.graph.ways().size(), 3u);
  EXPECT_EQ(r.report.dropped_ways, 1u);
  EXPECT_FALSE(r.graph.find_way(40));
}

TEST(ParseOsm, SingleNodeWayDropped) {
  auto r = parse_osm(R"(<osm><node id="1" lat="1" lon="1"/>
      <way id="5"><nd ref="1"/><tag k="highway" v="service"/></way></osm>)");
  EXPECT_TRUE(r.graph.ways().empty());
  EXPECT_EQ(r.report.dropped_ways, 1u);
}

TEST(ParseOsm, OutOfRangeCoordinatesDropNode) {
  auto r = parse_osm(R"(<osm><node id="1" lat="91" lon="1"/><node id="2" lat="1" lon="-181"/>
      <node id="3" lat="-90" lon="180"/></osm>)");
  EXPECT_EQ(r.graph.nodes().size(), 1u);
  EXPECT_EQ(r.report.dropped_nodes, 2u);
}

TEST(ParseOsm, UnknownElementsAndAttributesIgnored) {
  auto r = parse_osm(R"(<osm version="0.6"><bounds minlat="1"/><changeset id="3"/>
      <node id="1" lat="1" lon="1" user="x" visible="true"><extra/></node></osm>)");
  EXPECT_EQ(r.graph.nodes().size(), 1u);
}

TEST(ParseOsm, Deterministic) {
  const auto xml = slurp("ten_nodes.osm");
  EXPECT_EQ(parse_osm(xml).graph, parse_osm(xml).graph);
}

TEST(HighwayWays, EmptyWhenNoHighwayTags) {
  auto r = parse_osm(R"(<osm><node id="1" lat="1" lon="1"/><node id="2" lat="1" lon="1.001"/>
      <way id="5"><nd ref="1"/><nd ref="2"/><tag k="waterway" v="river"/></way></osm>)");
  EXPECT_TRUE(highway_ways(r.graph).empty());
}

TEST(HighwayWays, FiltersBuildingsAscending) {
  auto r = parse_osm(slurp("mixed_ways.osm"));
  EXPECT_EQ(highway_ways(r.graph), (std::vector<OsmId>{10, 20}));
}

TEST(HighwayWays, ResidentialIncluded) {
  auto r = parse_osm(slurp("ten_nodes.osm"));
  EXPECT_EQ(highway_ways(r.graph), (std::vector<OsmId>{100, 200}));
  EXPECT_EQ(*find_tag(r.graph.way(100).tags, "highway"), "residential");
}

TEST(WayNodeIndex, EveryEntryPointsAtItsSlot) {
  for (const char* name : {"ten_nodes.osm", "mixed_ways.osm"}) {
    auto r = parse_osm(slurp(name));
    std::size_t total_slots = 0;
    for (const auto& [id, w] : r.graph.ways()) total_slots += w.node_refs.size();
    std::size_t total_entries = 0;
    for (const auto& [node, list] : r.graph.way_node_index()) {
      for (const auto& m : list) {
        EXPECT_EQ(r.graph.way(m.way_id).node_refs.at(m.position), node);
        ++total_entries;
      }
    }
    EXPECT_EQ(total_entries, total_slots) << name;
  }
}

TEST(WayNodeIndex, HighwayDegreeAtJunction) {
  auto r = parse_osm(R"(<osm>
      <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.001"/>
      <node id="3" lat="0.001" lon="0"/><node id="4" lat="-0.001" lon="0"/>
      <node id="5" lat="0" lon="-0.001"/>
      <way id="10"><nd ref="1"/><nd ref="2"/><tag k="highway" v="residential"/></way>
      <way id="11"><nd ref="1"/><nd ref="3"/><tag k="highway" v="residential"/></way>
      <way id="12"><nd ref="4"/><nd ref="1"/><tag k="highway" v="service"/></way>
      <way id="13"><nd ref="5"/><nd ref="1"/><tag k="building" v="yes"/></way>
      </osm>)");
  EXPECT_EQ(r.graph.highway_degree(1), 3u);
  EXPECT_EQ(r.graph.memberships(1).size(), 4u);
  EXPECT_EQ(r.graph.highway_degree(5), 0u);
}
