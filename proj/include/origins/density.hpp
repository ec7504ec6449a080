#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "json.hpp"

#include "origins/geometry.hpp"
#include "origins/ingest.hpp"
#include "origins/pipeline.hpp"

namespace origins {

inline constexpr double kBandwidthMin = 0.25;
inline constexpr double kBandwidthMax = 6.0;
inline constexpr double kDefaultBandwidth = 0.75;

// Throws InvariantError naming [0.25, 6] when h is outside the bounds.
void check_bandwidth(double h);

// Sum over points of the isotropic bivariate normal density with standard
// deviation h, evaluated at every cell center. No 1/n factor, so sums over
// a partition of the points add up exactly to the sum over all of them.
std::vector<double> kernel_sum_grid(std::span<const LonLat> points, double h, const GridSpec& grid);

// kernel_sum_grid / n. Throws InvariantError for an empty point set or h <= 0.
std::vector<double> kde_grid(std::span<const LonLat> points, double h, const GridSpec& grid);

// 1 for cells whose center lies in water.
std::vector<std::uint8_t> water_cells(const GridSpec& grid, const WaterMask& mask);

// Zeroes cells flagged in `water`; idempotent.
void apply_water_mask(std::span<double> values, std::span<const std::uint8_t> water);

struct OriginDensityMap {
  GridSpec grid;
  std::vector<double> values;  // empty when sample_count == 0
  std::vector<int> years;
  std::vector<std::size_t> ports;  // node indices
  double bandwidth = kDefaultBandwidth;
  std::size_t sample_count = 0;

  bool empty() const { return sample_count == 0; }
};

// Capture points of traces that exit through `ports` during `years`, in
// (year, individual) order. An empty year set selects every year.
std::vector<LonLat> conditional_captures(const SimulationArchive& archive,
                                         const std::set<int>& years,
                                         const std::set<std::size_t>& ports);

// KDE of the selected captures on the archive grid with water cells zeroed,
// renormalized over land. No matching traces yields an empty map rather than
// an error. Port indices are taken as given (resolve_port_set checks them
// against the network). Throws NotFoundError for a year missing from the
// archive, InvariantError for an empty port set or a bandwidth out of bounds.
OriginDensityMap conditional_origin_map(const SimulationArchive& archive, const std::set<int>& years,
                                        const std::set<std::size_t>& ports, double h,
                                        std::span<const std::uint8_t> water);
OriginDensityMap conditional_origin_map(const SimulationArchive& archive, const std::set<int>& years,
                                        const std::set<std::size_t>& ports, double h,
                                        const WaterMask& mask);

// 0.5 * sum |a - b|.
double total_variation(std::span<const double> a, std::span<const double> b);

nlohmann::json origin_map_to_json(const OriginDensityMap& map, const TradeNetwork& network);

}  // namespace origins
