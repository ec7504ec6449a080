#include "origins/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "origins/error.hpp"

namespace origins {

void MaternParams::validate() const {
  if (!(sill > 0.0) || !(range > 0.0) || !(smoothness > 0.0) || !(nugget > 0.0)) {
    throw InvariantError("Matérn parameters must all be strictly positive");
  }
}

double bessel_k(double nu, double x) {
  const double order = std::abs(nu);  // K_{-nu} = K_nu
  if (order == std::floor(order) && order <= 100.0) {
    const auto n = static_cast<int>(order);
    double k_prev = boost::math::cyl_bessel_k(0.0, x);
    if (n == 0) return k_prev;
    double k_curr = boost::math::cyl_bessel_k(1.0, x);
    for (int m = 1; m < n; ++m) {
      const double k_next = k_prev + (2.0 * m / x) * k_curr;
      k_prev = k_curr;
      k_curr = k_next;
    }
    return k_curr;
  }
  return boost::math::cyl_bessel_k(order, x);
}

double matern_cov(double distance, const MaternParams& p) {
  const double x = distance / p.range;
  // Below this the relative gap to the sill is under 1e-18 for nu >= 1.
  if (x < 1e-10) return p.sill;
  // K_nu(x) underflows to zero long before x^nu could overflow.
  if (x > 700.0) return 0.0;
  const double nu = p.smoothness;
  const double scale = std::exp((1.0 - nu) * std::log(2.0) - boost::math::lgamma(nu));
  return p.sill * scale * std::pow(x, nu) * bessel_k(nu, x);
}

Eigen::MatrixXd build_covariance(std::span<const LonLat> sites, const MaternParams& p) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = p.sill;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = matern_cov(degree_distance(sites[i], sites[j]), p);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

SimpleKriging::SimpleKriging(std::vector<LonLat> sites, std::span<const double> values,
                             const MaternParams& p)
    : sites_(std::move(sites)), params_(p) {
  p.validate();
  if (sites_.empty()) throw InvariantError("kriging needs at least one observation");
  if (sites_.size() != values.size()) {
    throw InvariantError("kriging sites and values differ in length");
  }
  Eigen::MatrixXd system = build_covariance(sites_, p);
  system.diagonal().array() += p.nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw InvariantError("covariance factorization failed (" + std::to_string(sites_.size()) +
                         " sites); check for duplicate sites or invalid parameters");
  }
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(values.size()));
  weights_ = llt.solve(y);
}

double SimpleKriging::predict(LonLat at) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    sum += matern_cov(degree_distance(at, sites_[i]), params_) *
           weights_[static_cast<Eigen::Index>(i)];
  }
  return sum;
}

double ConflictDensity::max() const {
  return pmf.empty() ? 0.0 : *std::max_element(pmf.begin(), pmf.end());
}

ConflictSurface krige_predict(std::span<const LonLat> sites, std::span<const double> values,
                              const MaternParams& p, const GridSpec& grid) {
  const SimpleKriging model(std::vector<LonLat>(sites.begin(), sites.end()), values, p);
  ConflictSurface surface{grid, std::vector<double>(grid.cell_count())};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    surface.values[c] = model.predict(grid.cell_center(c));
  }
  return surface;
}

ConflictSurface krige_predict(std::span<const ConflictObservation> observations,
                              const MaternParams& p, const GridSpec& grid) {
  std::vector<LonLat> sites;
  std::vector<double> values;
  sites.reserve(observations.size());
  values.reserve(observations.size());
  for (const auto& o : observations) {
    sites.push_back(o.site);
    values.push_back(o.intensity);
  }
  return krige_predict(sites, values, p, grid);
}

ConflictDensity normalize_surface(const ConflictSurface& surface) {
  ConflictDensity d{surface.grid, std::vector<double>(surface.values.size())};
  double total = 0.0;
  for (std::size_t i = 0; i < surface.values.size(); ++i) {
    const double v = surface.values[i];
    if (!std::isfinite(v)) throw InvariantError("conflict surface contains non-finite values");
    d.pmf[i] = std::max(0.0, v);
    total += d.pmf[i];
  }
  if (!(total > 0.0)) throw InvariantError("conflict surface is zero everywhere after clamping");
  for (auto& v : d.pmf) v /= total;
  return d;
}

std::vector<CapturePoint> sample_captures(const ConflictDensity& density, std::size_t n,
                                          RandomStream& rng, int year) {
  std::vector<CapturePoint> out;
  if (n == 0) return out;
  std::vector<double> cdf(density.pmf.size());
  std::partial_sum(density.pmf.begin(), density.pmf.end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0)) throw InvariantError("cannot sample from an empty density");

  // Last cell with positive mass; guards against u * total rounding past cdf.back().
  std::size_t last_positive = cdf.size() - 1;
  while (last_positive > 0 && density.pmf[last_positive] <= 0.0) --last_positive;

  const double res = density.grid.resolution();
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t cell = it == cdf.end() ? last_positive : static_cast<std::size_t>(it - cdf.begin());
    const LonLat o = density.grid.cell_origin(cell);
    const LonLat p{o.lon + res * rng.uniform(), o.lat + res * rng.uniform()};
    out.push_back({p, cell, year});
  }
  return out;
}

}  // namespace origins
