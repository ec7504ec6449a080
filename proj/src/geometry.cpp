#include "origins/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "origins/error.hpp"

namespace origins {

double degree_distance(LonLat a, LonLat b) { return std::hypot(a.lon - b.lon, a.lat - b.lat); }

namespace {
std::size_t cells_along(double extent, double resolution) {
  // Tolerate representation error so that e.g. 1.0 / 0.05 gives 20, not 21.
  const double n = std::ceil(extent / resolution - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}
}  // namespace

GridSpec::GridSpec(BoundingBox bbox, double resolution) : bbox_(bbox), resolution_(resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvariantError("grid resolution must be positive");
  }
  if (!(bbox.lon_max > bbox.lon_min) || !(bbox.lat_max > bbox.lat_min)) {
    throw InvariantError("grid bounding box is empty");
  }
  nx_ = cells_along(bbox.lon_max - bbox.lon_min, resolution);
  ny_ = cells_along(bbox.lat_max - bbox.lat_min, resolution);
  // The grid covers whole cells; the stored extent is the covered extent.
  bbox_.lon_max = bbox_.lon_min + static_cast<double>(nx_) * resolution_;
  bbox_.lat_max = bbox_.lat_min + static_cast<double>(ny_) * resolution_;
}

GridSpec GridSpec::from_header(double lon_min, double lat_min, double resolution, std::size_t nx,
                               std::size_t ny) {
  if (nx == 0 || ny == 0) throw InvariantError("grid must have at least one cell");
  if (!(resolution > 0.0)) throw InvariantError("grid resolution must be positive");
  GridSpec g;
  g.bbox_ = {lon_min, lat_min, lon_min + static_cast<double>(nx) * resolution,
             lat_min + static_cast<double>(ny) * resolution};
  g.resolution_ = resolution;
  g.nx_ = nx;
  g.ny_ = ny;
  return g;
}

LonLat GridSpec::cell_origin(std::size_t index) const {
  return {bbox_.lon_min + static_cast<double>(col_of(index)) * resolution_,
          bbox_.lat_min + static_cast<double>(row_of(index)) * resolution_};
}

LonLat GridSpec::cell_center(std::size_t index) const {
  const LonLat o = cell_origin(index);
  return {o.lon + 0.5 * resolution_, o.lat + 0.5 * resolution_};
}

std::optional<std::size_t> GridSpec::cell_containing(LonLat p) const {
  const double fx = (p.lon - bbox_.lon_min) / resolution_;
  const double fy = (p.lat - bbox_.lat_min) / resolution_;
  if (!(fx >= 0.0) || !(fy >= 0.0)) return std::nullopt;
  auto col = static_cast<std::size_t>(fx);
  auto row = static_cast<std::size_t>(fy);
  if (fx > static_cast<double>(nx_) || fy > static_cast<double>(ny_)) return std::nullopt;
  col = std::min(col, nx_ - 1);
  row = std::min(row, ny_ - 1);
  return index(col, row);
}

bool GridSpec::cell_contains(std::size_t idx, LonLat p) const {
  const LonLat o = cell_origin(idx);
  return p.lon >= o.lon && p.lon <= o.lon + resolution_ && p.lat >= o.lat &&
         p.lat <= o.lat + resolution_;
}

BoundingBox expanded_bounds(std::span<const LonLat> points, double margin) {
  if (points.empty()) throw InvariantError("cannot bound an empty point set");
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    b.lon_min = std::min(b.lon_min, p.lon);
    b.lat_min = std::min(b.lat_min, p.lat);
    b.lon_max = std::max(b.lon_max, p.lon);
    b.lat_max = std::max(b.lat_max, p.lat);
  }
  b.lon_min -= margin;
  b.lat_min -= margin;
  b.lon_max += margin;
  b.lat_max += margin;
  return b;
}

}  // namespace origins
