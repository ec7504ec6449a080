#include "origins/grid_io.hpp"

#include <sstream>

#include "origins/csv.hpp"
#include "origins/error.hpp"

namespace origins {

std::string write_grid_text(const GridSpec& grid, std::span<const double> values,
                            const std::map<std::string, std::string>& metadata) {
  if (values.size() != grid.cell_count()) throw InvariantError("grid value count mismatch");
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + "=" + v + "\n";
  out += csv::format_double(grid.bbox().lon_min) + " " + csv::format_double(grid.bbox().lat_min) +
         " " + csv::format_double(grid.resolution()) + " " + std::to_string(grid.nx()) + " " +
         std::to_string(grid.ny()) + "\n";
  for (std::size_t row = 0; row < grid.ny(); ++row) {
    for (std::size_t col = 0; col < grid.nx(); ++col) {
      if (col) out += ' ';
      out += csv::format_double(values[grid.index(col, row)]);
    }
    out += '\n';
  }
  return out;
}

GridFile read_grid_text(std::string_view text) {
  GridFile file;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t nx = 0;
  std::size_t ny = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq != std::string::npos) file.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    std::istringstream fields(line);
    if (!have_header) {
      std::string lon, lat, res;
      if (!(fields >> lon >> lat >> res >> nx >> ny)) throw ParseError("malformed grid header");
      file.grid = GridSpec::from_header(csv::to_double(lon, "lon_min", 0),
                                        csv::to_double(lat, "lat_min", 0),
                                        csv::to_double(res, "resolution", 0), nx, ny);
      file.values.reserve(nx * ny);
      have_header = true;
      continue;
    }
    std::string tok;
    while (fields >> tok) file.values.push_back(csv::to_double(tok, "grid value", 0));
  }
  if (!have_header) throw ParseError("grid file has no header");
  if (file.values.size() != nx * ny) {
    throw ParseError("grid has " + std::to_string(file.values.size()) + " values, expected " +
                     std::to_string(nx * ny));
  }
  return file;
}

nlohmann::json grid_spec_to_json(const GridSpec& grid) {
  return {{"lon_min", grid.bbox().lon_min}, {"lat_min", grid.bbox().lat_min},
          {"lon_max", grid.bbox().lon_max}, {"lat_max", grid.bbox().lat_max},
          {"resolution", grid.resolution()}, {"nx", grid.nx()},
          {"ny", grid.ny()}};
}

nlohmann::json grid_to_json(const GridSpec& grid, std::span<const double> values) {
  auto j = grid_spec_to_json(grid);
  j["values"] = std::vector<double>(values.begin(), values.end());
  return j;
}

}  // namespace origins
