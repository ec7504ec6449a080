#include <gtest/gtest.h>

#include <random>

#include "origins/checksum.hpp"
#include "origins/error.hpp"
#include "origins/ingest.hpp"
#include "origins/pipeline.hpp"
#include "test_support.hpp"

using namespace origins;

namespace {

const char* kHeader = "name,lon,lat,start_year,end_year,intensity\n";

std::string expect_parse_error(std::string_view text) {
  try {
    parse_conflict_table(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

const char* kThreeNodes =
    "id,name,lon,lat,absorbing\n"
    "1,A,0.0,0.0,0\n"
    "2,B,0.5,0.0,0\n"
    "3,Port,1.0,0.0,1\n";

}  // namespace

TEST(ConflictTable, RowMapsToRecord) {
  const auto t = parse_conflict_table(std::string(kHeader) + "Ilorin, 4.55, 8.50, 1817, 1817, 2\n");
  ASSERT_EQ(t.records.size(), 1u);
  const auto& r = t.records[0];
  EXPECT_EQ(r.city_name, "Ilorin");
  EXPECT_DOUBLE_EQ(r.location.lon, 4.55);
  EXPECT_DOUBLE_EQ(r.location.lat, 8.50);
  EXPECT_EQ(r.intensity_code, IntensityCode::Attacked);
  EXPECT_TRUE(r.active_in(1817));
  EXPECT_FALSE(r.active_in(1816));
  EXPECT_FALSE(r.active_in(1818));
  EXPECT_FALSE(r.affiliation);
}

TEST(ConflictTable, InvertedYearRangeNamesTheRow) {
  const auto msg = expect_parse_error(std::string(kHeader) + "A,1,1,1820,1820,2\nB,1,1,1830,1828,3\n");
  EXPECT_EQ(msg, "row 2: year range inverted");
}

TEST(ConflictTable, HeaderOnlyGivesEmptyTable) {
  EXPECT_TRUE(parse_conflict_table(kHeader).records.empty());
}

TEST(ConflictTable, RejectsBadRows) {
  EXPECT_NE(expect_parse_error("name,lon,lat,start_year,end_year\nA,1,1,1,1\n").find("missing column: intensity"),
            std::string::npos);
  EXPECT_NE(expect_parse_error(std::string(kHeader) + "A,x,1,1820,1820,2\n").find("unparsable number"),
            std::string::npos);
  EXPECT_NE(expect_parse_error(std::string(kHeader) + "A,1,1,1820,1820,4\n").find("outside {2, 3, 9}"),
            std::string::npos);
  EXPECT_NE(expect_parse_error(std::string(kHeader) + "A,1,95,1820,1820,2\n").find("row 1"),
            std::string::npos);
}

TEST(ConflictTable, OptionalColumnsAndAliases) {
  const auto t = parse_conflict_table(
      "City,Longitude,Latitude,From,To,Code,affiliation,source\nOwu,4.1,7.2,1821,1822,3,Ife,notes\n",
      {{"name", "city"}, {"lon", "longitude"}, {"lat", "latitude"}, {"start_year", "from"},
       {"end_year", "to"}, {"intensity", "code"}});
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].affiliation, "Ife");
  EXPECT_EQ(t.records[0].source, "notes");
  EXPECT_EQ(t.records[0].intensity_code, IntensityCode::Destroyed);
}

TEST(ConflictTable, RoundTrip) {
  const auto text = read_file(testkit::synthetic_data_dir() / "conflicts.csv");
  const auto t = parse_conflict_table(text);
  ASSERT_FALSE(t.records.empty());
  const auto again = parse_conflict_table(write_conflict_table(t));
  EXPECT_EQ(again, t);
  EXPECT_EQ(write_conflict_table(again), write_conflict_table(t));
}

TEST(ActiveInYear, IntervalMembershipAndFoundedExclusion) {
  ConflictTable t;
  t.records = {testkit::conflict_at(1, 1, 1820, 1823),
               testkit::conflict_at(2, 2, 1822, 1822, IntensityCode::Founded),
               testkit::conflict_at(3, 3, 1824, 1825, IntensityCode::Destroyed)};
  const auto active = conflicts_active_in_year(t, 1822);
  ASSERT_EQ(active.size(), 1u);
  EXPECT_EQ(active[0].location.lon, 1.0);
  EXPECT_EQ(conflicts_active_in_year(t, 1822, true).size(), 2u);
  EXPECT_TRUE(conflicts_active_in_year(t, 1819).empty());
}

TEST(ActiveInYear, FortyFiveRecordsIn1832) {
  ConflictTable t;
  for (int i = 0; i < 45; ++i) t.records.push_back(testkit::conflict_at(i * 0.01, 0, 1832, 1832));
  EXPECT_EQ(conflicts_active_in_year(t, 1832).size(), 45u);
  // The bundled dataset is built to the same count.
  const auto data = load_inputs(testkit::synthetic_data_dir());
  EXPECT_EQ(conflicts_active_in_year(data.conflicts, 1832).size(), 45u);
}

TEST(ActiveInYear, MonotoneUnderWidening) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> year(1817, 1836);
  for (int trial = 0; trial < 200; ++trial) {
    int a = year(rng), b = year(rng);
    if (a > b) std::swap(a, b);
    ConflictTable narrow, wide;
    narrow.records = {testkit::conflict_at(0, 0, a, b)};
    wide.records = {testkit::conflict_at(0, 0, a - static_cast<int>(rng() % 3), b + static_cast<int>(rng() % 3))};
    for (int y = 1815; y <= 1840; ++y) {
      if (!conflicts_active_in_year(narrow, y).empty()) {
        EXPECT_FALSE(conflicts_active_in_year(wide, y).empty());
      }
    }
  }
}

TEST(Observations, DuplicateSitesKeepMaximum) {
  std::vector<ConflictRecord> recs{testkit::conflict_at(1, 1, 1820, 1820),
                                   testkit::conflict_at(2, 2, 1820, 1820),
                                   testkit::conflict_at(1, 1, 1820, 1820, IntensityCode::Destroyed)};
  const auto obs = to_observations(recs);
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[0].site, (LonLat{1, 1}));
  EXPECT_DOUBLE_EQ(obs[0].intensity, 3.0);
  EXPECT_DOUBLE_EQ(obs[1].intensity, 2.0);
}

TEST(TradeNetwork, ChainConstruction) {
  const auto net = parse_trade_network(kThreeNodes, "from_id,to_id\n1,2\n2,3\n", EdgeFormat::EdgeList);
  ASSERT_EQ(net.size(), 3u);
  EXPECT_TRUE(net.adjacent(0, 1));
  EXPECT_TRUE(net.adjacent(1, 0));
  EXPECT_TRUE(net.adjacent(1, 2));
  EXPECT_FALSE(net.adjacent(2, 1));
  EXPECT_TRUE(net.adjacent(2, 2));
  EXPECT_FALSE(net.adjacent(0, 0));
  EXPECT_EQ(net.absorbing(), (std::vector<std::size_t>{2}));
  EXPECT_EQ(net.edge_list().size(), 2u);
}

TEST(TradeNetwork, UnreachableNodeIsNamed) {
  const std::string nodes = std::string(kThreeNodes) + "4,C,2.0,2.0,0\n";
  try {
    parse_trade_network(nodes, "from_id,to_id\n1,2\n2,3\n", EdgeFormat::EdgeList);
    FAIL();
  } catch (const InvariantError& e) {
    EXPECT_STREQ(e.what(), "unreachable absorbing state: C");
  }
}

TEST(TradeNetwork, MatrixFormatAndAsymmetry) {
  const auto net = parse_trade_network(kThreeNodes, "0,1,0\n1,0,1\n0,0,1\n", EdgeFormat::Matrix);
  EXPECT_TRUE(net.adjacent(1, 2));
  // Port rows are rewritten whatever the input says.
  const auto net2 = parse_trade_network(kThreeNodes, "1,2,3\n0,1,0\n1,0,1\n0,1,0\n", EdgeFormat::Matrix);
  EXPECT_EQ(net2, net);
  EXPECT_THROW(parse_trade_network(kThreeNodes, "0,1,0\n0,0,1\n0,0,1\n", EdgeFormat::Matrix),
               InvariantError);
}

TEST(TradeNetwork, UnknownIdAndDuplicates) {
  EXPECT_THROW(parse_trade_network(kThreeNodes, "from_id,to_id\n1,9\n", EdgeFormat::EdgeList), ParseError);
  const std::string dup = std::string(kThreeNodes) + "2,B2,0.7,0.0,0\n";
  EXPECT_THROW(parse_trade_network(dup, "from_id,to_id\n1,2\n2,3\n", EdgeFormat::EdgeList), InvariantError);
}

TEST(TradeNetwork, ResolveByIdNameAndSlug) {
  const auto data = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *data.network;
  const auto pn = net.resolve("Porto Novo");
  ASSERT_TRUE(pn);
  EXPECT_EQ(net.resolve("porto_novo"), pn);
  EXPECT_EQ(net.resolve("106"), pn);
  EXPECT_FALSE(net.resolve("Atlantis"));
}

TEST(TradeNetwork, NinePortsInBundledData) {
  const auto data = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *data.network;
  ASSERT_EQ(net.absorbing_count(), 9u);
  std::vector<std::string> names;
  std::size_t coastal = 0, offmap = 0;
  for (auto p : net.absorbing()) {
    names.push_back(net.node(p).name);
    coastal += net.node(p).port_class == PortClass::Coastal;
    offmap += net.node(p).port_class == PortClass::OffMap;
  }
  EXPECT_EQ(names, (std::vector<std::string>{"Lagos", "Ouidah", "Little Popo", "Jakin", "Badagry",
                                             "Porto Novo", "Off Map NE", "Off Map SE", "Off Map NW"}));
  EXPECT_EQ(coastal, 6u);
  EXPECT_EQ(offmap, 3u);
}

TEST(TradeNetwork, RoundTripAndSymmetry) {
  const auto data = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *data.network;
  const auto again = parse_trade_network(write_nodes_csv(net), write_edges_csv(net), EdgeFormat::EdgeList);
  EXPECT_EQ(again, net);
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (!net.node(i).absorbing && !net.node(j).absorbing) {
        EXPECT_EQ(net.adjacent(i, j), net.adjacent(j, i));
      }
    }
  }
}

TEST(TradeNetwork, RandomNetworksAreAccepted) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto net = testkit::random_network(rng, 3 + rng() % 20, 1 + rng() % 4, rng() % 10,
                                             {0, 0, 4, 4});
    const auto again = parse_trade_network(write_nodes_csv(net), write_edges_csv(net), EdgeFormat::EdgeList);
    EXPECT_EQ(again, net);
  }
}

TEST(PortTotals, FieldsAndAggregate) {
  const auto data = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *data.network;
  const auto t = parse_port_totals("port,year,count\nLagos, 1832, 1200\nOuidah,1820,5\nOuidah,1821,7\n", net);
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(t.entries[0].port, *net.resolve("Lagos"));
  EXPECT_EQ(t.entries[0].year, 1832);
  EXPECT_EQ(t.entries[0].count, 1200);
  const auto agg = t.aggregate(net);
  ASSERT_EQ(agg.size(), 9u);
  EXPECT_EQ(agg[*net.absorbing_slot(*net.resolve("Ouidah"))], 12.0);
  EXPECT_EQ(agg[*net.absorbing_slot(*net.resolve("Jakin"))], 0.0);
}

TEST(PortTotals, Errors) {
  const auto data = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *data.network;
  try {
    parse_port_totals("port,count\nIbadan,3\n", net);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "row 1: Ibadan is not a point of sale");
  }
  EXPECT_THROW(parse_port_totals("port,count\nAtlantis,3\n", net), ParseError);
  EXPECT_THROW(parse_port_totals("port,count\nLagos,-1\n", net), ParseError);
}

TEST(WaterMask, UnitSquare) {
  const auto m = parse_water_mask(R"({"type":"FeatureCollection","features":[{"type":"Feature",
    "properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]})");
  const GridSpec g({-1, -1, 2, 2}, 0.5);
  EXPECT_TRUE(m.is_water(g.cell_center(*g.cell_containing({0.3, 0.3}))));
  EXPECT_FALSE(m.is_water({1.5, 0.5}));
}

TEST(WaterMask, EmptyCollectionClassifiesNothing) {
  const auto m = parse_water_mask(R"({"type":"FeatureCollection","features":[]})");
  EXPECT_TRUE(m.empty());
  EXPECT_FALSE(m.is_water({0, 0}));
}

TEST(WaterMask, HoleIsLand) {
  // Outer 0..4 square with a 1..3 hole, plus a MultiPolygon island inside the hole.
  const auto m = parse_water_mask(R"({"type":"MultiPolygon","coordinates":[
    [[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[3,1],[3,3],[1,3],[1,1]]],
    [[[1.8,1.8],[2.2,1.8],[2.2,2.2],[1.8,2.2],[1.8,1.8]]]]})");
  // Even-odd oracle by hand: inside outer ring only -> water; also inside the
  // hole -> land; island inside the hole -> water.
  EXPECT_TRUE(m.is_water({0.5, 0.5}));
  EXPECT_FALSE(m.is_water({1.5, 1.5}));
  EXPECT_TRUE(m.is_water({2.0, 2.0}));
  EXPECT_FALSE(m.is_water({5.0, 5.0}));
}

TEST(WaterMask, MalformedGeometry) {
  EXPECT_THROW(parse_water_mask("{"), ParseError);
  EXPECT_THROW(parse_water_mask(R"({"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]})"), ParseError);
  EXPECT_THROW(parse_water_mask(R"({"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]})"), ParseError);
  EXPECT_THROW(parse_water_mask(R"({"type":"Point","coordinates":[0,0]})"), ParseError);
}

TEST(LoadInputs, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_inputs(testkit::source_dir() / "no-such-dir"), IoError);
}
