#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace origins {

// A point in decimal degrees.
struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

// Euclidean distance in degree space. No great-circle correction: the study
// region spans a few degrees and the covariance range is stated in degrees.
double degree_distance(LonLat a, LonLat b);

struct BoundingBox {
  double lon_min = 0.0;
  double lat_min = 0.0;
  double lon_max = 0.0;
  double lat_max = 0.0;

  bool contains(LonLat p) const {
    return p.lon >= lon_min && p.lon <= lon_max && p.lat >= lat_min && p.lat <= lat_max;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Regular rectangular grid. Cells are indexed row-major from the south-west
// corner: index = row * nx + col, row increasing northwards.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(BoundingBox bbox, double resolution);
  // Reconstructs a grid from its serialized header; the bbox maximum is
  // recovered as min + n * resolution.
  static GridSpec from_header(double lon_min, double lat_min, double resolution, std::size_t nx,
                              std::size_t ny);

  const BoundingBox& bbox() const { return bbox_; }
  double resolution() const { return resolution_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t cell_count() const { return nx_ * ny_; }
  double cell_area() const { return resolution_ * resolution_; }

  std::size_t index(std::size_t col, std::size_t row) const { return row * nx_ + col; }
  std::size_t col_of(std::size_t index) const { return index % nx_; }
  std::size_t row_of(std::size_t index) const { return index / nx_; }

  LonLat cell_center(std::size_t index) const;
  // South-west corner of a cell.
  LonLat cell_origin(std::size_t index) const;
  // Cell containing the point; points on the far edges clamp inward.
  // Empty when the point lies outside the grid extent.
  std::optional<std::size_t> cell_containing(LonLat p) const;
  bool cell_contains(std::size_t index, LonLat p) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  BoundingBox bbox_{};
  double resolution_ = 1.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
};

// Bounding box of a point set expanded by `margin` degrees on every side.
BoundingBox expanded_bounds(std::span<const LonLat> points, double margin);

}  // namespace origins
