#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "origins/geometry.hpp"

namespace origins {

// Text grid format:
//   # key=value            (optional metadata lines)
//   lon_min lat_min resolution nx ny
//   <ny lines of nx values, southern row first>
struct GridFile {
  GridSpec grid;
  std::vector<double> values;
  std::map<std::string, std::string> metadata;
};

std::string write_grid_text(const GridSpec& grid, std::span<const double> values,
                            const std::map<std::string, std::string>& metadata = {});
GridFile read_grid_text(std::string_view text);

// Structured form: {lon_min, lat_min, lon_max, lat_max, resolution, nx, ny, values}.
nlohmann::json grid_to_json(const GridSpec& grid, std::span<const double> values);
nlohmann::json grid_spec_to_json(const GridSpec& grid);

}  // namespace origins
