#include "origins/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "origins/csv.hpp"
#include "origins/error.hpp"

namespace origins {

double chi_square(std::span<const double> expected, std::span<const double> observed) {
  if (expected.size() != observed.size()) {
    throw InvariantError("expected and observed totals differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double e = expected[i];
    const double o = observed[i];
    if (e < 0.0 || o < 0.0) throw InvariantError("port totals must be non-negative");
    if (e == 0.0) {
      if (o == 0.0) continue;
      throw InvariantError("unexplained observations at port " + std::to_string(i + 1));
    }
    sum += (e - o) * (e - o) / e;
  }
  return sum;
}

CalibrationProblem::CalibrationProblem(const ModelInputs& inputs, const SimulationConfig& config,
                                       std::size_t n, std::uint64_t seed)
    : network_(inputs.network),
      form_(config.cost_form),
      move_success_(config.move_success),
      seed_(seed) {
  config.validate();
  if (n < 1) throw InvariantError("calibration needs at least one simulated individual");

  // One surface from all records active anywhere in the configured years.
  std::vector<ConflictRecord> pooled;
  for (const auto& r : inputs.conflicts.records) {
    if (r.end_year < config.first_year || r.start_year > config.last_year) continue;
    if (r.intensity_code == IntensityCode::Founded && !config.include_founded) continue;
    pooled.push_back(r);
  }
  const auto observations = to_observations(pooled, config.intensity);
  if (observations.empty()) throw InvariantError("no active conflicts in the configured years");
  const GridSpec grid = config.grid_for(*network_);
  density_ = normalize_surface(krige_predict(observations, config.matern, grid));

  RandomStream capture_rng(seed, 0, 0, StreamPurpose::Calibration);
  const auto captures = sample_captures(density_, n, capture_rng);
  const RewardDistribution rewards = config.rewards_for(*network_);
  starts_.reserve(n);
  rewards_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    starts_.push_back(nearest_node(captures[i].location, *network_));
    RandomStream reward_rng(seed, 0, i, StreamPurpose::Reward);
    rewards_.push_back(draw_terminal_rewards(rewards, reward_rng));
  }
}

std::vector<double> CalibrationProblem::exit_counts(double lambda) const {
  const auto costs = std::make_shared<const MovementCosts>(*network_, density_, lambda, form_);
  std::vector<double> counts(network_->absorbing_count(), 0.0);
  MdpInstance mdp{network_, costs, {}, move_success_};
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    mdp.terminal_rewards = rewards_[i];
    const Policy policy = policy_iteration(mdp).policy;
    std::size_t node = starts_[i];
    for (std::size_t hops = 0; !network_->node(node).absorbing; ++hops) {
      if (hops > network_->size()) throw InvariantError("policy cycles without absorbing");
      node = policy.action[node];
    }
    counts[*network_->absorbing_slot(node)] += 1.0;
  }
  return counts;
}

std::vector<double> expected_port_totals(const CalibrationProblem& problem, double lambda,
                                         std::span<const double> observed) {
  auto e = problem.exit_counts(lambda);
  if (observed.size() != e.size()) {
    throw InvariantError("observed totals do not cover every absorbing port");
  }
  double total_o = 0.0;
  for (double o : observed) total_o += o;
  const double scale = total_o / static_cast<double>(problem.size());
  for (auto& v : e) v *= scale;
  return e;
}

CalibrationResult calibrate_lambda(const CalibrationProblem& problem,
                                   std::span<const double> observed,
                                   const CalibrationOptions& options) {
  if (!(options.lambda_lo < options.lambda_hi) || options.lambda_lo < 0.0) {
    throw InvariantError("calibration range must satisfy 0 <= lo < hi");
  }
  if (observed.size() < 2) throw InvariantError("calibration needs at least two ports");

  CalibrationResult result;
  result.simulation_size = problem.size();
  result.seed = problem.seed();

  auto objective = [&](double lambda) {
    double value = std::numeric_limits<double>::infinity();
    try {
      value = chi_square(expected_port_totals(problem, lambda, observed), observed);
    } catch (const InvariantError& e) {
      if (std::string_view(e.what()).find("unexplained observations") == std::string_view::npos) {
        throw;
      }
    }
    result.trail.emplace_back(lambda, value);
    return value;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = options.lambda_lo;
  double b = options.lambda_hi;
  objective(a);
  objective(b);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    // Ties move toward the lower end so flat stretches resolve low.
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [lambda, value] : result.trail) {
    if (value < best || (value == best && lambda < result.lambda)) {
      best = value;
      result.lambda = lambda;
    }
    worst = std::max(worst, value);
  }
  if (!std::isfinite(best)) {
    throw InvariantError("objective is infinite across the whole calibration range");
  }
  result.statistic = best;
  if (worst - best <= 1e-12 * std::max(1.0, best)) {
    result.flat = true;
    result.warnings.push_back("objective is flat over the evaluated range; lambda* is the lower bound");
  }
  return result;
}

std::string format_calibration_report(const CalibrationResult& result) {
  auto sorted = result.trail;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::ostringstream out;
  out << "# n=" << result.simulation_size << " seed=" << result.seed << "\n";
  out << "lambda\tstatistic\n";
  for (const auto& [lambda, value] : sorted) {
    out << csv::format_double(lambda) << '\t'
        << (std::isfinite(value) ? csv::format_double(value) : std::string("inf")) << '\n';
  }
  out << "lambda*\t" << csv::format_double(result.lambda) << '\n';
  out << "statistic\t" << csv::format_double(result.statistic) << '\n';
  for (const auto& w : result.warnings) out << "warning\t" << w << '\n';
  return out.str();
}

}  // namespace origins
