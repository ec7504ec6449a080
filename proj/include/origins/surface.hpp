#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "origins/geometry.hpp"
#include "origins/ingest.hpp"
#include "origins/random.hpp"

namespace origins {

// Matérn covariance parameters. Defaults are the values fitted to the 1832
// conflict variogram and used for every year.
struct MaternParams {
  double sill = 0.4;     // sigma^2, intensity^2
  double range = 0.13;   // kappa, degrees
  double smoothness = 3.0;  // nu
  double nugget = 0.1;   // tau^2, intensity^2

  void validate() const;
};

// Modified Bessel function of the second kind, K_nu(x) for x > 0. Integer
// orders use upward recurrence from K_0 and K_1.
double bessel_k(double nu, double x);

// sigma^2 * 2^(1-nu) / Gamma(nu) * (d/kappa)^nu * K_nu(d/kappa), with the
// analytic limit sigma^2 at d = 0.
double matern_cov(double distance, const MaternParams& p);

// Sigma_ij = matern_cov(|s_i - s_j|), without the nugget.
Eigen::MatrixXd build_covariance(std::span<const LonLat> sites, const MaternParams& p);

// Zero-mean simple kriging predictor k(s0, S) (Sigma + tau^2 I)^-1 y.
class SimpleKriging {
 public:
  // Throws InvariantError when Sigma + tau^2 I is not positive definite.
  SimpleKriging(std::vector<LonLat> sites, std::span<const double> values, const MaternParams& p);

  double predict(LonLat at) const;
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  std::vector<LonLat> sites_;
  MaternParams params_;
  Eigen::VectorXd weights_;  // (Sigma + tau^2 I)^-1 y
};

struct ConflictSurface {
  GridSpec grid;
  std::vector<double> values;  // Y-hat per cell, intensity units
};

struct ConflictDensity {
  GridSpec grid;
  std::vector<double> pmf;  // non-negative, sums to 1

  double max() const;
  double at(std::size_t cell) const { return pmf[cell]; }
};

ConflictSurface krige_predict(std::span<const LonLat> sites, std::span<const double> values,
                              const MaternParams& p, const GridSpec& grid);
ConflictSurface krige_predict(std::span<const ConflictObservation> observations,
                              const MaternParams& p, const GridSpec& grid);

// Clamps negative predictions to zero, then divides by the grid total.
// Throws InvariantError when nothing positive remains.
ConflictDensity normalize_surface(const ConflictSurface& surface);

struct CapturePoint {
  LonLat location;
  std::size_t cell_index = 0;
  int year = 0;

  friend bool operator==(const CapturePoint&, const CapturePoint&) = default;
};

// Draws cells i.i.d. from the pmf and jitters each point uniformly inside
// its cell.
std::vector<CapturePoint> sample_captures(const ConflictDensity& density, std::size_t n,
                                          RandomStream& rng, int year = 0);

}  // namespace origins
