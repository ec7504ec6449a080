#include "origins/archive.hpp"

#include <sstream>

#include "origins/checksum.hpp"
#include "origins/csv.hpp"
#include "origins/error.hpp"
#include "origins/grid_io.hpp"

namespace origins {

namespace fs = std::filesystem;

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"command", command},
      {"config", config},
      {"master_seed", master_seed},
      {"inputs", inputs},
      {"outputs", outputs},
  };
  if (created) j["created"] = *created;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.value("config", nlohmann::json::object());
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    if (j.contains("created")) m.created = j.at("created").get<std::string>();
    for (const auto& [k, v] : j.items()) {
      if (k != "tool" && k != "version" && k != "command" && k != "config" && k != "master_seed" &&
          k != "inputs" && k != "outputs" && k != "created") {
        m.extra[k] = v;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid manifest: ") + e.what());
  }
  return m;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::map<std::string, std::string> input_checksums(const fs::path& data_dir) {
  std::map<std::string, std::string> out;
  for (const char* name : {DataFiles::kConflicts, DataFiles::kNodes, DataFiles::kEdgeList,
                           DataFiles::kMatrix, DataFiles::kPortTotals, DataFiles::kWater}) {
    const fs::path p = data_dir / name;
    if (fs::exists(p)) out[name] = sha256_hex(read_file(p));
  }
  return out;
}

std::string write_port_totals_csv(const PortTotals& totals, const TradeNetwork& network) {
  std::ostringstream out;
  out << "port,year,count\n";
  for (const auto& e : totals.entries) {
    out << network.node(e.port).id << ',';
    if (e.year) out << *e.year;
    out << ',' << e.count << '\n';
  }
  return out.str();
}

std::string write_water_mask(const WaterMask& mask) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& poly : mask.polygons()) {
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : poly.rings) {
      nlohmann::json coords = nlohmann::json::array();
      for (const auto& p : ring) coords.push_back({p.lon, p.lat});
      if (!ring.empty()) coords.push_back({ring.front().lon, ring.front().lat});
      rings.push_back(std::move(coords));
    }
    features.push_back({{"type", "Feature"},
                        {"properties", nlohmann::json::object()},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}}});
  }
  return dump_json({{"type", "FeatureCollection"}, {"features", std::move(features)}});
}

std::string write_traces_csv(const SimulationArchive& archive, const TradeNetwork& network) {
  std::string out = "year,individual,capture_lon,capture_lat,start_node,exit_node,path\n";
  for (const auto& y : archive.years) {
    for (const auto& t : y.traces) {
      out += std::to_string(t.year);
      out += ',';
      out += std::to_string(t.individual);
      out += ',';
      out += csv::format_double(t.capture.location.lon);
      out += ',';
      out += csv::format_double(t.capture.location.lat);
      out += ',';
      out += std::to_string(network.node(t.start_node).id);
      out += ',';
      out += std::to_string(network.node(t.exit_node).id);
      out += ',';
      for (std::size_t k = 0; k < t.path.size(); ++k) {
        if (k) out += '>';
        out += std::to_string(network.node(t.path[k]).id);
      }
      out += '\n';
    }
  }
  return out;
}

void write_archive(const fs::path& dir, const SimulationArchive& archive, const ModelInputs& inputs,
                   RunManifest manifest) {
  std::error_code ec;
  fs::create_directories(dir / ArchiveLayout::kInputs, ec);
  if (ec) throw IoError("cannot create archive directory", dir.string());

  const TradeNetwork& net = *inputs.network;
  std::map<std::string, std::string> files;
  files[ArchiveLayout::kTraces] = write_traces_csv(archive, net);
  for (const auto& y : archive.years) {
    const std::map<std::string, std::string> meta = {{"year", std::to_string(y.year)}};
    files[ArchiveLayout::surface_file(y.year)] =
        write_grid_text(y.surface.grid, y.surface.values, meta);
    files[ArchiveLayout::density_file(y.year)] =
        write_grid_text(y.density.grid, y.density.pmf, meta);
  }
  const std::string in = std::string(ArchiveLayout::kInputs) + "/";
  files[in + DataFiles::kConflicts] = write_conflict_table(inputs.conflicts);
  files[in + DataFiles::kNodes] = write_nodes_csv(net);
  files[in + DataFiles::kEdgeList] = write_edges_csv(net);
  if (inputs.port_totals) {
    files[in + DataFiles::kPortTotals] = write_port_totals_csv(*inputs.port_totals, net);
  }
  if (!inputs.water.empty()) files[in + DataFiles::kWater] = write_water_mask(inputs.water);

  manifest.outputs.clear();
  for (const auto& [name, body] : files) {
    write_file(dir / name, body);
    manifest.outputs[name] = sha256_hex(body);
  }
  manifest.config = config_to_json(archive.config);
  manifest.master_seed = archive.config.master_seed;
  nlohmann::json years = nlohmann::json::array();
  for (const auto& y : archive.years) years.push_back(y.year);
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : archive.skipped) skipped.push_back({{"year", s.year}, {"reason", s.reason}});
  manifest.extra["years"] = years;
  manifest.extra["skipped"] = skipped;
  write_file(dir / ArchiveLayout::kManifest, dump_json(manifest.to_json()));
}

namespace {

std::vector<TransitTrace> parse_traces(std::string_view text, const TradeNetwork& network) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("traces file has no header row");
  const csv::Header header(rows.front());
  const std::size_t c_year = header.require("year");
  const std::size_t c_ind = header.require("individual");
  const std::size_t c_lon = header.require("capture_lon");
  const std::size_t c_lat = header.require("capture_lat");
  const std::size_t c_start = header.require("start_node");
  const std::size_t c_exit = header.require("exit_node");
  const std::size_t c_path = header.require("path");

  auto node_of = [&](const std::string& field, std::size_t row) {
    const auto id = csv::to_integer(field, "node id", row);
    const auto idx = network.index_of_id(static_cast<int>(id));
    if (!idx) throw ParseError("trace references unknown node id " + field, row);
    return *idx;
  };

  std::vector<TransitTrace> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 7) throw ParseError("trace row has too few fields", r);
    TransitTrace t;
    t.year = static_cast<int>(csv::to_integer(row[c_year], "year", r));
    t.individual = static_cast<std::size_t>(csv::to_integer(row[c_ind], "individual", r));
    t.capture.location = {csv::to_double(row[c_lon], "capture_lon", r),
                          csv::to_double(row[c_lat], "capture_lat", r)};
    t.capture.year = t.year;
    t.start_node = node_of(row[c_start], r);
    t.exit_node = node_of(row[c_exit], r);
    std::string_view path = row[c_path];
    while (!path.empty()) {
      const auto cut = path.find('>');
      t.path.push_back(node_of(std::string(path.substr(0, cut)), r));
      if (cut == std::string_view::npos) break;
      path.remove_prefix(cut + 1);
    }
    if (t.path.empty() || t.path.front() != t.start_node || t.path.back() != t.exit_node) {
      throw ParseError("trace path does not run from start_node to exit_node", r);
    }
    t.dwell.assign(t.path.size(), 0);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

LoadedArchive read_archive(const fs::path& dir) {
  LoadedArchive loaded;
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(read_file(dir / ArchiveLayout::kManifest));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  loaded.manifest = RunManifest::from_json(mj);
  loaded.inputs = load_inputs(dir / ArchiveLayout::kInputs);
  const TradeNetwork& net = *loaded.inputs.network;

  SimulationArchive& archive = loaded.archive;
  archive.config = config_from_json(loaded.manifest.config);
  std::vector<int> years;
  try {
    years = loaded.manifest.extra.value("years", std::vector<int>{});
    for (const auto& s : loaded.manifest.extra.value("skipped", nlohmann::json::array())) {
      archive.skipped.push_back({s.at("year").get<int>(), s.at("reason").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid manifest year list: ") + e.what());
  }

  std::map<int, std::size_t> slot;
  for (int y : years) {
    YearSimulation ys;
    ys.year = y;
    auto surface = read_grid_text(read_file(dir / ArchiveLayout::surface_file(y)));
    auto density = read_grid_text(read_file(dir / ArchiveLayout::density_file(y)));
    ys.surface = {surface.grid, std::move(surface.values)};
    ys.density = {density.grid, std::move(density.values)};
    slot[y] = archive.years.size();
    archive.years.push_back(std::move(ys));
  }

  for (auto& t : parse_traces(read_file(dir / ArchiveLayout::kTraces), net)) {
    auto it = slot.find(t.year);
    if (it == slot.end()) {
      throw InvariantError("trace for year " + std::to_string(t.year) + " not listed in manifest");
    }
    YearSimulation& ys = archive.years[it->second];
    const auto cell = ys.density.grid.cell_containing(t.capture.location);
    if (!cell) throw InvariantError("trace capture point lies outside the grid");
    t.capture.cell_index = *cell;
    ys.traces.push_back(std::move(t));
  }
  return loaded;
}

}  // namespace origins
