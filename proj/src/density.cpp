#include "origins/density.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "origins/csv.hpp"
#include "origins/error.hpp"
#include "origins/grid_io.hpp"

namespace origins {

void check_bandwidth(double h) {
  if (!(h >= kBandwidthMin && h <= kBandwidthMax)) {
    std::ostringstream msg;
    msg << "bandwidth " << h << " outside [" << kBandwidthMin << ", " << kBandwidthMax << "]";
    throw InvariantError(msg.str());
  }
}

std::vector<double> kernel_sum_grid(std::span<const LonLat> points, double h, const GridSpec& grid) {
  if (!(h > 0.0)) throw InvariantError("bandwidth must be positive");
  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  const double res = grid.resolution();
  const double lon0 = grid.bbox().lon_min + 0.5 * res;
  const double lat0 = grid.bbox().lat_min + 0.5 * res;
  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  const double norm = 1.0 / (2.0 * std::numbers::pi * h * h);

  std::vector<double> out(grid.cell_count(), 0.0);
  std::vector<double> ex(nx);
  std::vector<double> ey(ny);
  // The kernel factorizes over axes: nx + ny exponentials per point.
  for (const auto& p : points) {
    for (std::size_t c = 0; c < nx; ++c) {
      const double dx = lon0 + static_cast<double>(c) * res - p.lon;
      ex[c] = std::exp(-dx * dx * inv_two_h2);
    }
    for (std::size_t r = 0; r < ny; ++r) {
      const double dy = lat0 + static_cast<double>(r) * res - p.lat;
      ey[r] = norm * std::exp(-dy * dy * inv_two_h2);
    }
    for (std::size_t r = 0; r < ny; ++r) {
      const double wy = ey[r];
      if (wy == 0.0) continue;
      double* row = out.data() + r * nx;
      for (std::size_t c = 0; c < nx; ++c) row[c] += wy * ex[c];
    }
  }
  return out;
}

std::vector<double> kde_grid(std::span<const LonLat> points, double h, const GridSpec& grid) {
  if (points.empty()) throw InvariantError("kernel density needs at least one point");
  auto out = kernel_sum_grid(points, h, grid);
  const double inv_n = 1.0 / static_cast<double>(points.size());
  for (auto& v : out) v *= inv_n;
  return out;
}

std::vector<std::uint8_t> water_cells(const GridSpec& grid, const WaterMask& mask) {
  std::vector<std::uint8_t> out(grid.cell_count(), 0);
  if (mask.empty()) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask.is_water(grid.cell_center(i)) ? 1 : 0;
  return out;
}

void apply_water_mask(std::span<double> values, std::span<const std::uint8_t> water) {
  if (values.size() != water.size()) throw InvariantError("water mask and grid differ in size");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (water[i]) values[i] = 0.0;
  }
}

std::vector<LonLat> conditional_captures(const SimulationArchive& archive,
                                         const std::set<int>& years,
                                         const std::set<std::size_t>& ports) {
  std::vector<LonLat> points;
  for (const auto& y : archive.years) {
    if (!years.empty() && !years.contains(y.year)) continue;
    for (const auto& t : y.traces) {
      if (ports.contains(t.exit_node)) points.push_back(t.capture.location);
    }
  }
  return points;
}

namespace {

void check_condition(const SimulationArchive& archive, const std::set<int>& years,
                     const std::set<std::size_t>& ports, double h) {
  if (archive.years.empty()) throw InvariantError("archive holds no simulated years");
  if (ports.empty()) throw InvariantError("port set is empty");
  check_bandwidth(h);
  for (int y : years) {
    if (!archive.find_year(y)) throw NotFoundError("year " + std::to_string(y) + " not in archive");
  }
}

}  // namespace

OriginDensityMap conditional_origin_map(const SimulationArchive& archive, const std::set<int>& years,
                                        const std::set<std::size_t>& ports, double h,
                                        std::span<const std::uint8_t> water) {
  check_condition(archive, years, ports, h);
  OriginDensityMap map;
  map.grid = archive.years.front().density.grid;
  map.years.assign(years.begin(), years.end());
  map.ports.assign(ports.begin(), ports.end());
  map.bandwidth = h;

  const auto points = conditional_captures(archive, years, ports);
  map.sample_count = points.size();
  if (points.empty()) return map;

  map.values = kernel_sum_grid(points, h, map.grid);
  if (!water.empty()) apply_water_mask(map.values, water);
  double total = 0.0;
  for (double v : map.values) total += v;
  if (!(total > 0.0)) throw InvariantError("kernel density has no mass on land");
  for (auto& v : map.values) v /= total;
  return map;
}

OriginDensityMap conditional_origin_map(const SimulationArchive& archive, const std::set<int>& years,
                                        const std::set<std::size_t>& ports, double h,
                                        const WaterMask& mask) {
  check_condition(archive, years, ports, h);
  const auto water = water_cells(archive.years.front().density.grid, mask);
  return conditional_origin_map(archive, years, ports, h, water);
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvariantError("distributions differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

nlohmann::json origin_map_to_json(const OriginDensityMap& map, const TradeNetwork& network) {
  nlohmann::json j = grid_to_json(map.grid, map.values);
  if (map.values.empty()) j["values"] = nlohmann::json::array();
  nlohmann::json ports = nlohmann::json::array();
  for (auto p : map.ports) ports.push_back({{"id", network.node(p).id}, {"name", network.node(p).name}});
  j["condition"] = {{"years", map.years}, {"ports", ports}, {"bandwidth", map.bandwidth}};
  j["sample_count"] = map.sample_count;
  return j;
}

}  // namespace origins
