#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "origins/geometry.hpp"

namespace origins {

// ---------------------------------------------------------------------------
// Conflicts
// ---------------------------------------------------------------------------

enum class IntensityCode : int { Attacked = 2, Destroyed = 3, Founded = 9 };

struct ConflictRecord {
  std::string city_name;
  LonLat location;
  int start_year = 0;
  int end_year = 0;
  IntensityCode intensity_code = IntensityCode::Attacked;
  std::optional<std::string> affiliation;
  std::optional<std::string> source;

  bool active_in(int year) const { return start_year <= year && year <= end_year; }
  friend bool operator==(const ConflictRecord&, const ConflictRecord&) = default;
};

struct ConflictTable {
  std::vector<ConflictRecord> records;
  friend bool operator==(const ConflictTable&, const ConflictTable&) = default;
};

// Per-file column renames, keyed canonical -> actual header name.
using ColumnAliases = std::map<std::string, std::string>;

// Columns: name, lon, lat, start_year, end_year, intensity, affiliation?, source?
ConflictTable parse_conflict_table(std::string_view text, const ColumnAliases& aliases = {});
std::string write_conflict_table(const ConflictTable& table);

// Records active in `year` with a conflict code (2 or 3). Founding records
// (code 9) only pass when `include_founded` is set.
std::vector<ConflictRecord> conflicts_active_in_year(const ConflictTable& table, int year,
                                                     bool include_founded = false);

// Numeric intensities assigned to the categorical codes.
struct IntensityScale {
  double attacked = 2.0;
  double destroyed = 3.0;
  double founded = 2.0;  // only used when founding records are included

  double value(IntensityCode code) const;
};

struct ConflictObservation {
  LonLat site;
  double intensity = 0.0;
};

// Converts records into kriging observations. Records sharing exact
// coordinates collapse to one observation carrying the maximum intensity;
// output order follows first appearance.
std::vector<ConflictObservation> to_observations(std::span<const ConflictRecord> records,
                                                 const IntensityScale& scale = {});

// ---------------------------------------------------------------------------
// Trade network
// ---------------------------------------------------------------------------

enum class PortClass { Inland, Coastal, OffMap };

std::string_view to_string(PortClass c);

struct Node {
  int id = 0;
  std::string name;
  LonLat location;
  bool absorbing = false;
  // Only meaningful for absorbing nodes; Inland otherwise.
  PortClass port_class = PortClass::Inland;

  friend bool operator==(const Node&, const Node&) = default;
};

// Nodes are held sorted by id, so "lower index" and "lower id" coincide and
// every tie-break on ids can be done on indices.
class TradeNetwork {
 public:
  TradeNetwork() = default;
  // `adjacency` is row-major n*n over `nodes` in the given order. Absorbing
  // rows are rewritten to a self-loop; the non-absorbing block must be
  // symmetric and every non-absorbing node must reach an absorbing one.
  TradeNetwork(std::vector<Node> nodes, std::vector<std::uint8_t> adjacency);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t index) const { return nodes_[index]; }

  bool adjacent(std::size_t from, std::size_t to) const { return adjacency_[from * size() + to] != 0; }
  // Successor indices excluding self loops, ascending.
  std::span<const std::size_t> successors(std::size_t index) const { return successors_[index]; }

  std::optional<std::size_t> index_of_id(int id) const;
  // Accepts a numeric id, an exact name, or a name slug ("porto_novo").
  std::optional<std::size_t> resolve(std::string_view name_or_id) const;

  // Indices of absorbing nodes, ascending. Their position in this list is the
  // port's slot in reward and total vectors.
  const std::vector<std::size_t>& absorbing() const { return absorbing_; }
  std::size_t absorbing_count() const { return absorbing_.size(); }
  // Slot of an absorbing node in absorbing(), empty for transit nodes.
  std::optional<std::size_t> absorbing_slot(std::size_t index) const;

  // Undirected transit edges (i < j, both non-absorbing) followed by
  // directed edges into absorbing nodes.
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;

  friend bool operator==(const TradeNetwork& a, const TradeNetwork& b) {
    return a.nodes_ == b.nodes_ && a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<std::size_t> absorbing_;
  std::vector<std::ptrdiff_t> slot_;
};

enum class EdgeFormat { Matrix, EdgeList };

// Nodes: id, name, lon, lat, absorbing(0/1), kind? (coastal|offmap).
// Edges: an n*n 0/1 matrix in node-file order (optionally headed by a row of
// ids), or an edge list with columns from_id, to_id which is symmetrized.
TradeNetwork parse_trade_network(std::string_view nodes_text, std::string_view edges_text,
                                 EdgeFormat format, const ColumnAliases& node_aliases = {},
                                 const ColumnAliases& edge_aliases = {});
std::string write_nodes_csv(const TradeNetwork& network);
std::string write_edges_csv(const TradeNetwork& network);

// ---------------------------------------------------------------------------
// Observed port totals
// ---------------------------------------------------------------------------

struct PortTotalEntry {
  std::size_t port = 0;  // network index of an absorbing node
  std::optional<int> year;
  long long count = 0;
};

struct PortTotals {
  std::vector<PortTotalEntry> entries;

  // Sum over years, one slot per absorbing node (network.absorbing() order).
  std::vector<double> aggregate(const TradeNetwork& network) const;
};

// Columns: port, year?, count. `port` is a node id or name.
PortTotals parse_port_totals(std::string_view text, const TradeNetwork& network,
                             const ColumnAliases& aliases = {});

// ---------------------------------------------------------------------------
// Water mask
// ---------------------------------------------------------------------------

using Ring = std::vector<LonLat>;

// First ring is the outer boundary, the rest are holes.
struct Polygon {
  std::vector<Ring> rings;
};

class WaterMask {
 public:
  WaterMask() = default;
  explicit WaterMask(std::vector<Polygon> polygons);

  const std::vector<Polygon>& polygons() const { return polygons_; }
  bool empty() const { return polygons_.empty(); }
  // Even-odd rule over all rings of each polygon; water if inside any.
  bool is_water(LonLat p) const;

 private:
  std::vector<Polygon> polygons_;
};

// GeoJSON FeatureCollection (or bare geometry) of Polygon/MultiPolygon.
WaterMask parse_water_mask(std::string_view geojson_text);

}  // namespace origins
