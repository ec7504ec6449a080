// Acceptance run: one PASS / FAIL / SKIP line per criterion at the pinned
// tolerances. Exits non-zero if any criterion fails.
//
// ORIGINS_REAL_DATA may name a data directory holding the original
// datasets; the two criteria that only make sense on them are skipped
// otherwise.
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "golden_values.hpp"
#include "instances.hpp"
#include "origins/calibrate.hpp"
#include "origins/density.hpp"
#include "origins/surface.hpp"
#include "origins/transit.hpp"
#include "test_support.hpp"

using namespace origins;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Verdict skip(std::string d) { return {Outcome::Skip, std::move(d)}; }
Verdict judge(bool ok, std::string d) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(d)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::size_t exit_of(const Policy& policy, const TradeNetwork& net, std::size_t start) {
  std::size_t v = start;
  for (std::size_t k = 0; !net.node(v).absorbing; ++k) {
    if (k > net.size()) return std::numeric_limits<std::size_t>::max();
    v = policy.action[v];
  }
  return v;
}

std::optional<fs::path> real_data_dir() {
  const char* env = std::getenv("ORIGINS_REAL_DATA");
  if (!env || !*env) return std::nullopt;
  return fs::path(env);
}

// ---------------------------------------------------------------------------

Verdict matern_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& c : golden::kMatern) {
    MaternParams p;
    p.smoothness = c.smoothness;
    worst = std::max(worst, std::abs(matern_cov(c.distance, p) / c.value - 1.0));
  }
  const double t = seconds_since(t0);
  return judge(worst <= 1e-10 && t < 1.0,
               "20 pairs, max rel err " + fmt(worst, 3) + ", " + fmt(t, 3) + " s");
}

Verdict kriging_closed_forms() {
  const MaternParams p;
  const std::vector<LonLat> one{{3.0, 7.0}};
  const std::vector<double> y{2.0};
  const double err1 = std::abs(SimpleKriging(one, y, p).predict(one[0]) - 0.4 / (0.4 + 0.1) * 2.0);
  double err2 = 0.0;
  for (const auto& c : golden::kTwoSite) {
    const std::vector<LonLat> s{c.s1, c.s2};
    const std::vector<double> v{c.y1, c.y2};
    err2 = std::max(err2, std::abs(SimpleKriging(s, v, p).predict(c.target) - c.value));
  }
  return judge(err1 <= 1e-12 && err2 <= 1e-10,
               "one-site err " + fmt(err1, 3) + ", two-site max err " + fmt(err2, 3));
}

Verdict density_contract() {
  std::mt19937_64 rng(20240101);
  const SimulationConfig config;
  double worst_sum = 0.0;
  double min_value = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::uniform_real_distribution<double> lon(0.0, 4.0), lat(0.0, 3.0), res(0.05, 0.2);
    std::uniform_int_distribution<int> count(1, 45), code(0, 2);
    ConflictTable table;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const IntensityCode c = std::array{IntensityCode::Attacked, IntensityCode::Destroyed,
                                         IntensityCode::Founded}[code(rng)];
      table.records.push_back(testkit::conflict_at(lon(rng), lat(rng), 1830, 1830, c));
    }
    // Guarantee one non-founded record so that the year is not empty.
    table.records.push_back(testkit::conflict_at(lon(rng), lat(rng), 1830, 1830));
    const auto obs = year_observations(table, 1830, config);
    const GridSpec grid({-0.5, -0.5, 4.5, 3.5}, res(rng));
    const auto d = normalize_surface(krige_predict(obs, config.matern, grid));
    double sum = 0.0;
    for (double v : d.pmf) {
      min_value = std::min(min_value, v);
      sum += v;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return judge(min_value >= 0.0 && worst_sum <= 1e-9,
               "50 tables, min " + fmt(min_value) + ", max |sum-1| " + fmt(worst_sum, 3));
}

Verdict sampler_gof() {
  const GridSpec grid({0, 0, 5, 4}, 0.5);
  std::mt19937_64 wrng(5);
  std::vector<double> w(grid.cell_count());
  for (auto& v : w) v = std::uniform_real_distribution<double>(0.0, 1.0)(wrng);
  w[3] = 0.0;  // a zero-mass cell must never be drawn
  const auto d = testkit::density_from_weights(grid, w);
  const std::size_t n = 100000;
  int passed = 0;
  bool zero_hit = false;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomStream rng(seed, 0, 0, StreamPurpose::Test);
    std::vector<double> counts(grid.cell_count(), 0.0);
    for (const auto& p : sample_captures(d, n, rng)) counts[p.cell_index] += 1.0;
    zero_hit = zero_hit || counts[3] > 0;
    double stat = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (d.pmf[i] == 0.0) continue;
      const double e = d.pmf[i] * n;
      stat += (counts[i] - e) * (counts[i] - e) / e;
      ++k;
    }
    const boost::math::chi_squared dist(static_cast<double>(k - 1));
    passed += boost::math::cdf(boost::math::complement(dist, stat)) > 0.01;
  }
  return judge(passed >= 9 && !zero_hit, std::to_string(passed) + "/10 seeds pass at alpha 0.01");
}

Verdict dijkstra_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4040);
  std::size_t mismatches = 0, checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ports = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const std::size_t transit = std::uniform_int_distribution<std::size_t>(2, 40 - ports)(rng);
    const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, transit)(rng);
    const BoundingBox box{0, 0, 4, 3};
    auto net = std::make_shared<const TradeNetwork>(testkit::random_network(rng, transit, ports, extra, box));
    const auto density = testkit::uniform_density(GridSpec({-0.5, -0.5, 4.5, 3.5}, 0.1));
    // sigma_R^2 = 0: every terminal reward equals its mean.
    auto rewards = RewardDistribution::equal(ports, 10.0, 0.0);
    RandomStream rrng(trial, 0, 0, StreamPurpose::Test);
    const auto mdp = build_mdp(net, density, 0.0, draw_terminal_rewards(rewards, rrng));
    const auto sol = policy_iteration(mdp);
    std::vector<std::vector<double>> dist;
    for (auto p : net->absorbing()) dist.push_back(testkit::network_distance_to(*net, p));
    for (std::size_t s = 0; s < net->size(); ++s) {
      if (net->node(s).absorbing) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& d : dist) best = std::min(best, d[s]);
      const std::size_t e = exit_of(sol.policy, *net, s);
      ++checked;
      if (e >= net->size() || dist[*net->absorbing_slot(e)][s] > best * (1.0 + 1e-12)) ++mismatches;
    }
  }
  const double t = seconds_since(t0);
  return judge(mismatches == 0 && t < 30.0, "100 networks, " + std::to_string(checked) + " nodes, " +
                                                std::to_string(mismatches) + " mismatches, " + fmt(t, 3) +
                                                " s");
}

Verdict conflict_avoidance_switch() {
  const auto inst = testkit::switch_instance();
  std::string detail;
  bool ok = true;
  for (auto form : {CostForm::Literal, CostForm::Ratio}) {
    const double threshold = inst.threshold(form);
    const double step = threshold / 1000.0;
    auto long_route = [&](double lambda) {
      return policy_iteration(build_mdp(inst.network, inst.density, lambda, {10.0}, form)).policy.action[0] ==
             2;  // S -> B1
    };
    // Scan upwards from zero for the first lambda that takes the long route.
    double found = std::numeric_limits<double>::quiet_NaN();
    bool monotone = true;
    for (int k = 0; k <= 2000; ++k) {
      const double lambda = k * step;
      const bool l = long_route(lambda);
      if (l && std::isnan(found)) found = lambda;
      if (!l && !std::isnan(found)) monotone = false;
    }
    const bool this_ok = !std::isnan(found) && monotone && std::abs(found - threshold) <= step;
    ok = ok && this_ok;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(form)) + " threshold " +
              fmt(threshold, 6) + ", switch at " + fmt(found, 6);
  }
  return judge(ok, detail + " (step threshold/1000)");
}

Verdict lambda_recovery() {
  const auto t0 = Clock::now();
  const auto inst = testkit::two_port_instance();
  const std::size_t n = 10000;
  int within = 0;
  std::string lambdas;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const CalibrationProblem truth(inst.inputs, inst.config, n, 1000 + s);
    const auto observed = truth.exit_counts(2.0);
    const CalibrationProblem fit(inst.inputs, inst.config, n, 5000 + s);
    const auto r = calibrate_lambda(fit, observed);
    within += std::abs(r.lambda - 2.0) <= 0.25;
    lambdas += (lambdas.empty() ? "" : " ") + fmt(r.lambda, 3);
  }
  const double t = seconds_since(t0);
  return judge(within >= 9 && t < 120.0, std::to_string(within) + "/10 within 0.25 of 2.0 [" + lambdas +
                                             "], " + fmt(t, 3) + " s");
}

Verdict lambda_on_real_data() {
  const auto dir = real_data_dir();
  if (!dir) return skip("ORIGINS_REAL_DATA not set");
  const auto inputs = load_inputs(*dir);
  if (!inputs.port_totals) return fail("no port_totals.csv in " + dir->string());
  const SimulationConfig config;
  const CalibrationProblem problem(inputs, config, 10000, config.master_seed);
  const auto r = calibrate_lambda(problem, inputs.port_totals->aggregate(*inputs.network));
  return judge(r.lambda >= 1.3 && r.lambda <= 1.8, "lambda* " + fmt(r.lambda, 4));
}

Verdict kde_contracts() {
  const auto inputs = load_inputs(testkit::synthetic_data_dir());
  const auto& net = *inputs.network;
  SimulationConfig config;
  const int year = 1832;
  config.first_year = config.last_year = year;
  std::string detail;
  bool ok = true;

  // Sum to one on land, exactly zero on water, for single ports and sets.
  config.samples_per_year = 2000;
  SimulationArchive small = run_all_years(config, inputs);
  const GridSpec& grid = small.years.front().density.grid;
  const auto water = water_cells(grid, inputs.water);
  double worst_sum = 0.0;
  bool water_zero = true;
  for (const char* spec : {"all", "all-coastal", "off-map", "Lagos", "Porto Novo", "Off Map NE"}) {
    const auto map = conditional_origin_map(small, {year}, resolve_port_set(net, spec), kDefaultBandwidth, water);
    if (map.empty()) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      if (water[i]) water_zero = water_zero && map.values[i] == 0.0;
      sum += map.values[i];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  ok = ok && worst_sum <= 1e-6 && water_zero;
  detail += "max |land sum-1| " + fmt(worst_sum, 3) + (water_zero ? ", water 0" : ", WATER NONZERO");

  // Unnormalized kernel sums are additive over a partition of the ports.
  const auto all = conditional_captures(small, {year}, resolve_port_set(net, "all"));
  const auto whole = kernel_sum_grid(all, kDefaultBandwidth, grid);
  std::vector<double> parts(whole.size(), 0.0);
  for (auto p : net.absorbing()) {
    const auto part = kernel_sum_grid(conditional_captures(small, {year}, {p}), kDefaultBandwidth, grid);
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i] += part[i];
  }
  double additivity = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) additivity = std::max(additivity, std::abs(parts[i] - whole[i]));
  ok = ok && additivity <= 1e-10;
  detail += ", additivity err " + fmt(additivity, 3);

  // The all-ports map approaches the land-restricted conflict density. At a
  // fixed bandwidth the map converges to the smoothed density, so TV to the
  // target has a bias floor (about 0.08 here) and a single draw near the
  // floor is noisy; the mean over replicate seeds is what must decrease.
  std::vector<double> target = small.years.front().density.pmf;
  apply_water_mask(target, water);
  const double land = std::accumulate(target.begin(), target.end(), 0.0);
  for (auto& v : target) v /= land;
  constexpr int kReplicates = 10;
  std::vector<double> tv;
  for (std::size_t n : {1000, 10000, 100000}) {
    double mean = 0.0;
    for (int r = 1; r <= kReplicates; ++r) {
      config.samples_per_year = n;
      config.master_seed = 900 + r;
      const auto archive = run_all_years(config, inputs);
      const auto map = conditional_origin_map(archive, {year}, resolve_port_set(net, "all"), kBandwidthMin, water);
      mean += total_variation(map.values, target) / kReplicates;
    }
    tv.push_back(mean);
  }
  const bool decreasing = tv[0] > tv[1] && tv[1] > tv[2];
  ok = ok && decreasing;
  detail += ", mean TV over " + std::to_string(kReplicates) + " seeds " + fmt(tv[0]) + " > " + fmt(tv[1]) + " > " + fmt(tv[2]);
  return judge(ok, detail);
}

Verdict determinism() {
  const auto t0 = Clock::now();
  testkit::TempDir dir("acceptance-determinism");
  const auto data = testkit::synthetic_data_dir().string();
  const auto a = (dir.path() / "a").string(), b = (dir.path() / "b").string();
  const auto ra = testkit::run_cli({"simulate", "--data", data, "--out", a, "--samples", "1000", "--seed", "11"});
  const double t_one = seconds_since(t0);
  const auto rb = testkit::run_cli(
      {"simulate", "--data", data, "--out", b, "--samples", "1000", "--seed", "11", "--threads", "2"});
  if (ra.code != 0 || rb.code != 0) return fail("simulate failed: " + ra.err + rb.err);
  std::string why;
  const bool same = testkit::directories_identical(a, b, &why);
  std::size_t years = 0;
  for (int y = 1817; y <= 1836; ++y) years += fs::exists(fs::path(a) / ("density_" + std::to_string(y) + ".grid"));
  return judge(same && years == 20 && t_one < 300.0,
               std::to_string(years) + " years x 1000, " + (same ? "byte-identical" : "differ: " + why) +
                   ", one run " + fmt(t_one, 3) + " s");
}

Verdict sankey_conservation() {
  std::mt19937_64 rng(777);
  std::size_t tables = 0, violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ports = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const std::size_t transit = std::uniform_int_distribution<std::size_t>(3, 20)(rng);
    auto network = testkit::random_network(rng, transit, ports, transit / 2, {0, 0, 3, 2});
    ConflictTable conflicts;
    std::uniform_real_distribution<double> lon(0.0, 3.0), lat(0.0, 2.0);
    for (int year = 1820; year <= 1821; ++year) {
      for (int k = 0; k < 4; ++k) conflicts.records.push_back(testkit::conflict_at(lon(rng), lat(rng), year, year));
    }
    const auto inputs = testkit::make_inputs(std::move(network), conflicts);
    SimulationConfig config;
    config.first_year = 1820;
    config.last_year = 1821;
    config.samples_per_year = 60;
    config.master_seed = 100 + trial;
    config.grid_resolution = 0.1;
    config.cost_form = trial % 2 ? CostForm::Ratio : CostForm::Literal;
    const auto archive = run_all_years(config, inputs);
    const auto& net = *inputs.network;
    std::vector<std::set<std::size_t>> sets = {resolve_port_set(net, "all"), {net.absorbing().front()}};
    for (const auto& set : sets) {
      for (const std::set<int>& years : {std::set<int>{}, std::set<int>{1821}}) {
        const auto table = sankey_flows(archive, set, years);
        std::vector<long long> balance(net.size(), 0), expected(net.size(), 0);
        for (const auto& r : table.rows) {
          balance[r.to] += static_cast<long long>(r.count);
          balance[r.from] -= static_cast<long long>(r.count);
        }
        for (const auto& y : archive.years) {
          if (!years.empty() && !years.count(y.year)) continue;
          for (const auto& t : y.traces) {
            if (!set.count(t.exit_node) || t.path.size() < 2) continue;
            ++expected[t.exit_node];
            --expected[t.start_node];
          }
        }
        // Interior nodes: everything that enters leaves again.
        for (std::size_t v = 0; v < net.size(); ++v) violations += balance[v] != expected[v];
        ++tables;
      }
    }
  }
  return judge(violations == 0,
               "50 archives, " + std::to_string(tables) + " tables, " + std::to_string(violations) + " violations");
}

Verdict directional_check() {
  const auto dir = real_data_dir();
  if (!dir) return skip("ORIGINS_REAL_DATA not set");
  const auto inputs = load_inputs(*dir);
  SimulationConfig config;
  config.first_year = config.last_year = 1824;
  const auto archive = run_all_years(config, inputs);
  const auto& net = *inputs.network;
  const GridSpec& grid = archive.years.front().density.grid;
  // North and south halves of the study grid.
  const double mid = 0.5 * (grid.bbox().lat_min + grid.bbox().lat_max);
  auto north_mass = [&](const std::string& spec) {
    const auto map = conditional_origin_map(archive, {1824}, resolve_port_set(net, spec), kDefaultBandwidth, inputs.water);
    double north = 0.0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      if (grid.cell_center(i).lat > mid) north += map.values[i];
    }
    return north;
  };
  const double ne = north_mass("Off Map NE");
  const double coastal = north_mass("all-coastal");
  return judge(ne > 0.5 && coastal < 0.5,
               "Off Map NE north mass " + fmt(ne, 3) + ", coastal south mass " + fmt(1.0 - coastal, 3));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"matern-oracle", matern_oracle},
      {"kriging-closed-forms", kriging_closed_forms},
      {"density-contract", density_contract},
      {"sampler-gof", sampler_gof},
      {"dijkstra-equivalence", dijkstra_equivalence},
      {"conflict-avoidance-switch", conflict_avoidance_switch},
      {"lambda-recovery", lambda_recovery},
      {"lambda-real-data", lambda_on_real_data},
      {"kde-contracts", kde_contracts},
      {"determinism", determinism},
      {"sankey-conservation", sankey_conservation},
      {"directional-1824", directional_check},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    failures += v.outcome == Outcome::Fail;
    std::cout << tag << "  " << name << ": " << v.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria met") << std::endl;
  return failures ? 1 : 0;
}
