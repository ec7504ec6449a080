#include "origins/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "origins/csv.hpp"
#include "origins/error.hpp"

namespace origins {

namespace {

const std::string& field_or_empty(const csv::Row& row, std::optional<std::size_t> col) {
  static const std::string kEmpty;
  if (!col || *col >= row.size()) return kEmpty;
  return row[*col];
}

const std::string& required_field(const csv::Row& row, std::size_t col, const char* what,
                                  std::size_t row_index) {
  if (col >= row.size() || row[col].empty()) {
    throw ParseError(std::string("missing value for ") + what, row_index);
  }
  return row[col];
}

std::optional<std::string> optional_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

void check_degrees(LonLat p, std::size_t row) {
  if (std::abs(p.lon) > 180.0 || std::abs(p.lat) > 90.0) {
    throw ParseError("coordinates outside decimal-degree range", row);
  }
}

int to_year(const std::string& field, const char* what, std::size_t row) {
  const long long y = csv::to_integer(field, what, row);
  if (y < -100000 || y > 100000) throw ParseError(std::string(what) + " out of range", row);
  return static_cast<int>(y);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conflicts

ConflictTable parse_conflict_table(std::string_view text, const ColumnAliases& aliases) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("conflict table has no header row");
  const csv::Header header(rows.front(), aliases);
  const std::size_t c_name = header.require("name");
  const std::size_t c_lon = header.require("lon");
  const std::size_t c_lat = header.require("lat");
  const std::size_t c_start = header.require("start_year");
  const std::size_t c_end = header.require("end_year");
  const std::size_t c_intensity = header.require("intensity");
  const auto c_affiliation = header.find("affiliation");
  const auto c_source = header.find("source");

  ConflictTable table;
  table.records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    ConflictRecord rec;
    rec.city_name = required_field(row, c_name, "name", r);
    rec.location.lon = csv::to_double(required_field(row, c_lon, "lon", r), "lon", r);
    rec.location.lat = csv::to_double(required_field(row, c_lat, "lat", r), "lat", r);
    check_degrees(rec.location, r);
    rec.start_year = to_year(required_field(row, c_start, "start_year", r), "start_year", r);
    rec.end_year = to_year(required_field(row, c_end, "end_year", r), "end_year", r);
    if (rec.start_year > rec.end_year) throw ParseError("year range inverted", r);
    const long long code =
        csv::to_integer(required_field(row, c_intensity, "intensity", r), "intensity", r);
    if (code != 2 && code != 3 && code != 9) {
      throw ParseError("intensity code " + std::to_string(code) + " outside {2, 3, 9}", r);
    }
    rec.intensity_code = static_cast<IntensityCode>(code);
    rec.affiliation = optional_text(field_or_empty(row, c_affiliation));
    rec.source = optional_text(field_or_empty(row, c_source));
    table.records.push_back(std::move(rec));
  }
  return table;
}

std::string write_conflict_table(const ConflictTable& table) {
  std::ostringstream out;
  out << "name,lon,lat,start_year,end_year,intensity,affiliation,source\n";
  for (const auto& r : table.records) {
    out << csv::escape(r.city_name) << ',' << csv::format_double(r.location.lon) << ','
        << csv::format_double(r.location.lat) << ',' << r.start_year << ',' << r.end_year << ','
        << static_cast<int>(r.intensity_code) << ',' << csv::escape(r.affiliation.value_or(""))
        << ',' << csv::escape(r.source.value_or("")) << '\n';
  }
  return out.str();
}

std::vector<ConflictRecord> conflicts_active_in_year(const ConflictTable& table, int year,
                                                     bool include_founded) {
  std::vector<ConflictRecord> out;
  for (const auto& r : table.records) {
    if (!r.active_in(year)) continue;
    if (r.intensity_code == IntensityCode::Founded && !include_founded) continue;
    out.push_back(r);
  }
  return out;
}

double IntensityScale::value(IntensityCode code) const {
  switch (code) {
    case IntensityCode::Attacked:
      return attacked;
    case IntensityCode::Destroyed:
      return destroyed;
    case IntensityCode::Founded:
      return founded;
  }
  return 0.0;
}

std::vector<ConflictObservation> to_observations(std::span<const ConflictRecord> records,
                                                 const IntensityScale& scale) {
  std::vector<ConflictObservation> out;
  for (const auto& r : records) {
    const double v = scale.value(r.intensity_code);
    auto same = std::find_if(out.begin(), out.end(),
                             [&](const ConflictObservation& o) { return o.site == r.location; });
    if (same == out.end()) {
      out.push_back({r.location, v});
    } else {
      same->intensity = std::max(same->intensity, v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trade network

std::string_view to_string(PortClass c) {
  switch (c) {
    case PortClass::Inland:
      return "inland";
    case PortClass::Coastal:
      return "coastal";
    case PortClass::OffMap:
      return "offmap";
  }
  return "inland";
}

TradeNetwork::TradeNetwork(std::vector<Node> nodes, std::vector<std::uint8_t> adjacency) {
  const std::size_t n = nodes.size();
  if (n == 0) throw InvariantError("trade network has no nodes");
  if (adjacency.size() != n * n) throw InvariantError("adjacency size does not match node count");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return nodes[a].id < nodes[b].id; });
  for (std::size_t k = 1; k < n; ++k) {
    if (nodes[order[k]].id == nodes[order[k - 1]].id) {
      throw InvariantError("duplicate node id " + std::to_string(nodes[order[k]].id));
    }
  }

  nodes_.reserve(n);
  for (auto i : order) nodes_.push_back(std::move(nodes[i]));
  adjacency_.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      adjacency_[i * n + j] = adjacency[order[i] * n + order[j]] != 0 ? 1 : 0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].absorbing) {
      if (nodes_[i].port_class == PortClass::Inland) nodes_[i].port_class = PortClass::Coastal;
      std::fill_n(adjacency_.begin() + static_cast<std::ptrdiff_t>(i * n), n, 0);
      adjacency_[i * n + i] = 1;
    } else {
      nodes_[i].port_class = PortClass::Inland;
      adjacency_[i * n + i] = 0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].absorbing) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (nodes_[j].absorbing) continue;
      if (adjacency_[i * n + j] != adjacency_[j * n + i]) {
        throw InvariantError("asymmetric adjacency between " + nodes_[i].name + " and " +
                             nodes_[j].name);
      }
    }
  }

  successors_.resize(n);
  slot_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && adjacency_[i * n + j]) successors_[i].push_back(j);
    }
    if (nodes_[i].absorbing) {
      slot_[i] = static_cast<std::ptrdiff_t>(absorbing_.size());
      absorbing_.push_back(i);
    }
  }
  if (absorbing_.empty()) throw InvariantError("trade network has no absorbing state");

  // Reverse breadth-first search from the absorbing set.
  std::vector<char> reaches(n, 0);
  std::deque<std::size_t> frontier;
  for (auto a : absorbing_) {
    reaches[a] = 1;
    frontier.push_back(a);
  }
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop_front();
    for (std::size_t u = 0; u < n; ++u) {
      if (!reaches[u] && u != v && adjacency_[u * n + v]) {
        reaches[u] = 1;
        frontier.push_back(u);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reaches[i]) throw InvariantError("unreachable absorbing state: " + nodes_[i].name);
  }
}

std::optional<std::size_t> TradeNetwork::index_of_id(int id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const Node& n, int v) { return n.id < v; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<std::size_t> TradeNetwork::resolve(std::string_view name_or_id) const {
  int id = 0;
  auto [ptr, ec] = std::from_chars(name_or_id.data(), name_or_id.data() + name_or_id.size(), id);
  if (ec == std::errc{} && ptr == name_or_id.data() + name_or_id.size()) {
    if (auto idx = index_of_id(id)) return idx;
  }
  const std::string wanted = csv::lower(name_or_id);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (csv::lower(nodes_[i].name) == wanted) return i;
  }
  const std::string wanted_slug = csv::slug(name_or_id);
  if (wanted_slug.empty()) return std::nullopt;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (csv::slug(nodes_[i].name) == wanted_slug) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TradeNetwork::absorbing_slot(std::size_t index) const {
  if (index >= slot_.size() || slot_[index] < 0) return std::nullopt;
  return static_cast<std::size_t>(slot_[index]);
}

std::vector<std::pair<std::size_t, std::size_t>> TradeNetwork::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].absorbing) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!nodes_[j].absorbing && adjacency_[i * n + j]) out.emplace_back(i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].absorbing) continue;
    for (auto a : absorbing_) {
      if (adjacency_[i * n + a]) out.emplace_back(i, a);
    }
  }
  return out;
}

namespace {

PortClass parse_port_class(const std::string& kind, const std::string& name, std::size_t row) {
  const std::string k = csv::slug(kind);
  if (k.empty()) {
    return csv::slug(name).rfind("offmap", 0) == 0 ? PortClass::OffMap : PortClass::Coastal;
  }
  if (k == "coastal" || k == "port" || k == "atlantic") return PortClass::Coastal;
  if (k == "offmap" || k == "inlandmarket") return PortClass::OffMap;
  if (k == "inland" || k == "transit") return PortClass::Inland;
  throw ParseError("unknown node kind '" + kind + "'", row);
}

std::vector<Node> parse_nodes(std::string_view text, const ColumnAliases& aliases) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("node table has no header row");
  const csv::Header header(rows.front(), aliases);
  const std::size_t c_id = header.require("id");
  const std::size_t c_name = header.require("name");
  const std::size_t c_lon = header.require("lon");
  const std::size_t c_lat = header.require("lat");
  const std::size_t c_abs = header.require("absorbing");
  const auto c_kind = header.find("kind");

  std::vector<Node> nodes;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Node node;
    const long long id = csv::to_integer(required_field(row, c_id, "id", r), "id", r);
    if (id < std::numeric_limits<int>::min() || id > std::numeric_limits<int>::max()) {
      throw ParseError("node id out of range", r);
    }
    node.id = static_cast<int>(id);
    node.name = required_field(row, c_name, "name", r);
    node.location.lon = csv::to_double(required_field(row, c_lon, "lon", r), "lon", r);
    node.location.lat = csv::to_double(required_field(row, c_lat, "lat", r), "lat", r);
    check_degrees(node.location, r);
    const long long flag =
        csv::to_integer(required_field(row, c_abs, "absorbing", r), "absorbing", r);
    if (flag != 0 && flag != 1) throw ParseError("absorbing flag must be 0 or 1", r);
    node.absorbing = flag == 1;
    if (node.absorbing) node.port_class = parse_port_class(field_or_empty(row, c_kind), node.name, r);
    nodes.push_back(std::move(node));
  }
  return nodes;
}

bool all_binary(const csv::Row& row) {
  return std::all_of(row.begin(), row.end(), [](const std::string& f) { return f == "0" || f == "1"; });
}

std::vector<std::uint8_t> parse_matrix(std::string_view text, const std::vector<Node>& nodes) {
  const std::size_t n = nodes.size();
  auto rows = csv::parse(text);
  // Position in `nodes` for each matrix row/column.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t first = 0;
  if (!rows.empty() && !all_binary(rows.front())) {
    const auto& head = rows.front();
    if (head.size() != n) throw ParseError("matrix header must list every node id");
    for (std::size_t k = 0; k < n; ++k) {
      const long long id = csv::to_integer(head[k], "matrix header id", 0);
      auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& v) { return v.id == id; });
      if (it == nodes.end()) throw ParseError("edge references unknown id " + head[k]);
      order[k] = static_cast<std::size_t>(it - nodes.begin());
    }
    first = 1;
  }
  if (rows.size() - first != n) {
    throw ParseError("adjacency matrix has " + std::to_string(rows.size() - first) +
                     " rows, expected " + std::to_string(n));
  }
  std::vector<std::uint8_t> adj(n * n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[first + r];
    if (row.size() != n) {
      throw ParseError("adjacency row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(n),
                       r + 1);
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (row[c] != "0" && row[c] != "1") throw ParseError("adjacency entries must be 0 or 1", r + 1);
      adj[order[r] * n + order[c]] = row[c] == "1" ? 1 : 0;
    }
  }
  return adj;
}

std::vector<std::uint8_t> parse_edge_list(std::string_view text, const std::vector<Node>& nodes,
                                          const ColumnAliases& aliases) {
  const std::size_t n = nodes.size();
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("edge list has no header row");
  const csv::Header header(rows.front(), aliases);
  const std::size_t c_from = header.require("from_id");
  const std::size_t c_to = header.require("to_id");
  auto lookup = [&](const std::string& field, std::size_t r) {
    const long long id = csv::to_integer(field, "node id", r);
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& v) { return v.id == id; });
    if (it == nodes.end()) throw ParseError("edge references unknown id " + field, r);
    return static_cast<std::size_t>(it - nodes.begin());
  };
  std::vector<std::uint8_t> adj(n * n, 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t a = lookup(required_field(rows[r], c_from, "from_id", r), r);
    const std::size_t b = lookup(required_field(rows[r], c_to, "to_id", r), r);
    if (a == b) continue;
    // Movement out of a port is impossible, so edges touching a port only
    // survive in the direction into it.
    if (!nodes[a].absorbing) adj[a * n + b] = 1;
    if (!nodes[b].absorbing) adj[b * n + a] = 1;
  }
  return adj;
}

}  // namespace

TradeNetwork parse_trade_network(std::string_view nodes_text, std::string_view edges_text,
                                 EdgeFormat format, const ColumnAliases& node_aliases,
                                 const ColumnAliases& edge_aliases) {
  auto nodes = parse_nodes(nodes_text, node_aliases);
  auto adjacency = format == EdgeFormat::Matrix ? parse_matrix(edges_text, nodes)
                                                : parse_edge_list(edges_text, nodes, edge_aliases);
  return TradeNetwork(std::move(nodes), std::move(adjacency));
}

std::string write_nodes_csv(const TradeNetwork& network) {
  std::ostringstream out;
  out << "id,name,lon,lat,absorbing,kind\n";
  for (const auto& n : network.nodes()) {
    out << n.id << ',' << csv::escape(n.name) << ',' << csv::format_double(n.location.lon) << ','
        << csv::format_double(n.location.lat) << ',' << (n.absorbing ? 1 : 0) << ','
        << (n.absorbing ? to_string(n.port_class) : "") << '\n';
  }
  return out.str();
}

std::string write_edges_csv(const TradeNetwork& network) {
  std::ostringstream out;
  out << "from_id,to_id\n";
  for (const auto& [a, b] : network.edge_list()) {
    out << network.node(a).id << ',' << network.node(b).id << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Port totals

std::vector<double> PortTotals::aggregate(const TradeNetwork& network) const {
  std::vector<double> totals(network.absorbing_count(), 0.0);
  for (const auto& e : entries) {
    if (auto slot = network.absorbing_slot(e.port)) totals[*slot] += static_cast<double>(e.count);
  }
  return totals;
}

PortTotals parse_port_totals(std::string_view text, const TradeNetwork& network,
                             const ColumnAliases& aliases) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("port totals have no header row");
  const csv::Header header(rows.front(), aliases);
  const std::size_t c_port = header.require("port");
  const auto c_year = header.find("year");
  const std::size_t c_count = header.require("count");

  PortTotals totals;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string& port = required_field(row, c_port, "port", r);
    const auto idx = network.resolve(port);
    if (!idx) throw ParseError("unknown port '" + port + "'", r);
    if (!network.node(*idx).absorbing) throw ParseError(port + " is not a point of sale", r);
    PortTotalEntry e;
    e.port = *idx;
    if (const auto& y = field_or_empty(row, c_year); !y.empty()) e.year = to_year(y, "year", r);
    e.count = csv::to_integer(required_field(row, c_count, "count", r), "count", r);
    if (e.count < 0) throw ParseError("negative count", r);
    totals.entries.push_back(e);
  }
  return totals;
}

// ---------------------------------------------------------------------------
// Water mask

namespace {

bool ring_crossings_odd(const Ring& ring, LonLat p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const LonLat& a = ring[i];
    const LonLat& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

Ring parse_ring(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("malformed geometry: ring is not an array");
  Ring ring;
  for (const auto& pos : j) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw ParseError("malformed geometry: bad position");
    }
    ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (ring.size() < 4) throw ParseError("malformed geometry: ring needs at least 3 vertices");
  if (!(ring.front() == ring.back())) throw ParseError("malformed geometry: ring is not closed");
  ring.pop_back();
  return ring;
}

Polygon parse_polygon(const nlohmann::json& coords) {
  if (!coords.is_array() || coords.empty()) throw ParseError("malformed geometry: empty polygon");
  Polygon poly;
  for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring));
  return poly;
}

void collect_geometry(const nlohmann::json& geom, std::vector<Polygon>& out) {
  if (!geom.is_object() || !geom.contains("type")) throw ParseError("malformed geometry");
  const std::string type = geom.at("type").get<std::string>();
  if (type == "Polygon") {
    out.push_back(parse_polygon(geom.at("coordinates")));
  } else if (type == "MultiPolygon") {
    const auto& coords = geom.at("coordinates");
    if (!coords.is_array()) throw ParseError("malformed geometry: MultiPolygon coordinates");
    for (const auto& p : coords) out.push_back(parse_polygon(p));
  } else if (type == "GeometryCollection") {
    for (const auto& g : geom.at("geometries")) collect_geometry(g, out);
  } else {
    throw ParseError("unsupported feature type: " + type);
  }
}

}  // namespace

WaterMask::WaterMask(std::vector<Polygon> polygons) : polygons_(std::move(polygons)) {
  for (const auto& p : polygons_) {
    if (p.rings.empty()) throw InvariantError("water polygon without rings");
    for (const auto& r : p.rings) {
      if (r.size() < 3) throw InvariantError("water polygon ring with fewer than 3 vertices");
    }
  }
}

bool WaterMask::is_water(LonLat p) const {
  for (const auto& poly : polygons_) {
    bool inside = false;
    for (const auto& ring : poly.rings) inside ^= ring_crossings_odd(ring, p);
    if (inside) return true;
  }
  return false;
}

WaterMask parse_water_mask(std::string_view geojson_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(geojson_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed water mask: ") + e.what());
  }
  std::vector<Polygon> polygons;
  try {
    const std::string type = doc.value("type", "");
    if (type == "FeatureCollection") {
      for (const auto& feature : doc.at("features")) {
        if (feature.value("type", "") != "Feature") throw ParseError("malformed feature");
        const auto& geom = feature.at("geometry");
        if (geom.is_null()) continue;
        collect_geometry(geom, polygons);
      }
    } else if (type == "Feature") {
      collect_geometry(doc.at("geometry"), polygons);
    } else {
      collect_geometry(doc, polygons);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed water mask: ") + e.what());
  }
  return WaterMask(std::move(polygons));
}

}  // namespace origins
