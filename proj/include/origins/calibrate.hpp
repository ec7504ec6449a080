#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "origins/pipeline.hpp"

namespace origins {

// Pearson-form discrepancy sum (E_i - O_i)^2 / E_i. Ports with E_i = 0 and
// O_i = 0 are dropped; E_i = 0 with O_i > 0 throws InvariantError
// "unexplained observations at port k" (k 1-based).
double chi_square(std::span<const double> expected, std::span<const double> observed);

// Everything about a calibration run that does not depend on lambda: the
// pooled conflict density over all configured years, the n capture points,
// their start nodes and terminal reward draws. Holding these fixed across
// lambda values (common random numbers) makes the objective a deterministic
// function of lambda.
class CalibrationProblem {
 public:
  CalibrationProblem(const ModelInputs& inputs, const SimulationConfig& config, std::size_t n,
                     std::uint64_t seed);

  // Exit counts per absorbing slot at `lambda`. Exits do not depend on the
  // move-success draws, so no trajectory is sampled.
  std::vector<double> exit_counts(double lambda) const;

  const ConflictDensity& density() const { return density_; }
  const TradeNetwork& network() const { return *network_; }
  std::size_t size() const { return starts_.size(); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::shared_ptr<const TradeNetwork> network_;
  ConflictDensity density_;
  CostForm form_;
  double move_success_;
  std::uint64_t seed_;
  std::vector<std::size_t> starts_;
  std::vector<std::vector<double>> rewards_;
};

// Exit counts scaled so that sum(E) = sum(observed).
std::vector<double> expected_port_totals(const CalibrationProblem& problem, double lambda,
                                         std::span<const double> observed);

struct CalibrationOptions {
  double lambda_lo = 0.0;
  double lambda_hi = 10.0;
  std::size_t iterations = 40;
};

struct CalibrationResult {
  double lambda = 0.0;
  double statistic = 0.0;
  // Every objective evaluation in order; +inf marks lambdas where a port
  // with observations received no simulated exits.
  std::vector<std::pair<double, double>> trail;
  std::size_t simulation_size = 0;
  std::uint64_t seed = 0;
  bool flat = false;
  std::vector<std::string> warnings;
};

// Golden-section search for the lambda minimizing chi_square(E(lambda), O),
// with both range endpoints also evaluated. lambda* is the smallest lambda
// attaining the minimum over all evaluations. Throws InvariantError for an
// empty range, fewer than two absorbing ports, or an objective that is
// infinite everywhere it was evaluated.
CalibrationResult calibrate_lambda(const CalibrationProblem& problem,
                                   std::span<const double> observed,
                                   const CalibrationOptions& options = {});

// Text table of the evaluation trail followed by lambda*.
std::string format_calibration_report(const CalibrationResult& result);

}  // namespace origins
