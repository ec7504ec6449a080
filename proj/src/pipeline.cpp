#include "origins/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "origins/checksum.hpp"
#include "origins/csv.hpp"
#include "origins/error.hpp"
#include "origins/parallel.hpp"

namespace origins {

void SimulationConfig::validate() const {
  if (first_year > last_year) throw InvariantError("year range is empty");
  if (samples_per_year < 1) throw InvariantError("samples per year must be at least 1");
  if (!(lambda >= 0.0)) throw InvariantError("lambda must be non-negative");
  if (!(reward_variance >= 0.0)) throw InvariantError("reward variance must be non-negative");
  if (!(grid_resolution > 0.0)) throw InvariantError("grid resolution must be positive");
  if (!(grid_margin >= 0.0)) throw InvariantError("grid margin must be non-negative");
  if (!(move_success > 0.0 && move_success <= 1.0)) {
    throw InvariantError("move success probability must lie in (0, 1]");
  }
  matern.validate();
}

GridSpec SimulationConfig::grid_for(const TradeNetwork& network) const {
  if (grid_bbox) return GridSpec(*grid_bbox, grid_resolution);
  std::vector<LonLat> points;
  points.reserve(network.size());
  for (const auto& n : network.nodes()) points.push_back(n.location);
  return GridSpec(expanded_bounds(points, grid_margin), grid_resolution);
}

RewardDistribution SimulationConfig::rewards_for(const TradeNetwork& network) const {
  if (reward_means.empty()) {
    return RewardDistribution::equal(network.absorbing_count(), reward_mean, reward_variance);
  }
  if (reward_means.size() != network.absorbing_count()) {
    throw InvariantError("reward_means has " + std::to_string(reward_means.size()) +
                         " entries but the network has " +
                         std::to_string(network.absorbing_count()) + " ports");
  }
  return {reward_means, reward_variance};
}

nlohmann::json config_to_json(const SimulationConfig& c) {
  nlohmann::json grid = {{"resolution", c.grid_resolution}, {"margin", c.grid_margin}};
  if (c.grid_bbox) {
    grid["bbox"] = {c.grid_bbox->lon_min, c.grid_bbox->lat_min, c.grid_bbox->lon_max,
                    c.grid_bbox->lat_max};
  }
  return {
      {"years", {c.first_year, c.last_year}},
      {"samples_per_year", c.samples_per_year},
      {"lambda", c.lambda},
      {"reward", {{"mean", c.reward_mean}, {"means", c.reward_means}, {"variance", c.reward_variance}}},
      {"matern",
       {{"sill", c.matern.sill},
        {"range", c.matern.range},
        {"smoothness", c.matern.smoothness},
        {"nugget", c.matern.nugget}}},
      {"grid", grid},
      {"master_seed", c.master_seed},
      {"cost_form", std::string(to_string(c.cost_form))},
      {"move_success", c.move_success},
      {"include_founded", c.include_founded},
      {"intensity",
       {{"attacked", c.intensity.attacked},
        {"destroyed", c.intensity.destroyed},
        {"founded", c.intensity.founded}}},
  };
}

SimulationConfig config_from_json(const nlohmann::json& j, SimulationConfig c) {
  static const std::set<std::string> kKeys = {
      "years", "samples_per_year", "lambda", "reward", "matern", "grid", "master_seed",
      "cost_form", "move_success", "include_founded", "intensity"};
  if (!j.is_object()) throw ParseError("configuration must be a JSON object");
  // A misspelt key would otherwise be silently ignored.
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw ParseError("unknown configuration key '" + key + "'");
  }
  try {
    if (j.contains("years")) {
      const auto& y = j.at("years");
      c.first_year = y.at(0).get<int>();
      c.last_year = y.at(1).get<int>();
    }
    c.samples_per_year = j.value("samples_per_year", c.samples_per_year);
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("reward")) {
      const auto& r = j.at("reward");
      c.reward_mean = r.value("mean", c.reward_mean);
      c.reward_means = r.value("means", c.reward_means);
      c.reward_variance = r.value("variance", c.reward_variance);
    }
    if (j.contains("matern")) {
      const auto& m = j.at("matern");
      c.matern.sill = m.value("sill", c.matern.sill);
      c.matern.range = m.value("range", c.matern.range);
      c.matern.smoothness = m.value("smoothness", c.matern.smoothness);
      c.matern.nugget = m.value("nugget", c.matern.nugget);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid_resolution = g.value("resolution", c.grid_resolution);
      c.grid_margin = g.value("margin", c.grid_margin);
      if (g.contains("bbox") && !g.at("bbox").is_null()) {
        const auto& b = g.at("bbox");
        c.grid_bbox = BoundingBox{b.at(0).get<double>(), b.at(1).get<double>(),
                                  b.at(2).get<double>(), b.at(3).get<double>()};
      }
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("cost_form")) {
      const auto form = parse_cost_form(j.at("cost_form").get<std::string>());
      if (!form) throw ParseError("cost_form must be 'literal' or 'ratio'");
      c.cost_form = *form;
    }
    c.move_success = j.value("move_success", c.move_success);
    c.include_founded = j.value("include_founded", c.include_founded);
    if (j.contains("intensity")) {
      const auto& s = j.at("intensity");
      c.intensity.attacked = s.value("attacked", c.intensity.attacked);
      c.intensity.destroyed = s.value("destroyed", c.intensity.destroyed);
      c.intensity.founded = s.value("founded", c.intensity.founded);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
  ColumnMapping m;
  auto read = [&](const char* key, ColumnAliases& out) {
    if (j.contains(key)) out = j.at(key).get<ColumnAliases>();
  };
  try {
    read("conflicts", m.conflicts);
    read("nodes", m.nodes);
    read("edges", m.edges);
    read("ports", m.ports);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid column mapping: ") + e.what());
  }
  return m;
}

ModelInputs load_inputs(const std::filesystem::path& dir, const ColumnMapping& columns) {
  namespace fs = std::filesystem;
  ModelInputs in;
  in.conflicts = parse_conflict_table(read_file(dir / DataFiles::kConflicts), columns.conflicts);

  const std::string nodes = read_file(dir / DataFiles::kNodes);
  if (fs::exists(dir / DataFiles::kEdgeList)) {
    in.network = std::make_shared<const TradeNetwork>(
        parse_trade_network(nodes, read_file(dir / DataFiles::kEdgeList), EdgeFormat::EdgeList,
                            columns.nodes, columns.edges));
  } else {
    in.network = std::make_shared<const TradeNetwork>(
        parse_trade_network(nodes, read_file(dir / DataFiles::kMatrix), EdgeFormat::Matrix,
                            columns.nodes, columns.edges));
  }
  if (fs::exists(dir / DataFiles::kPortTotals)) {
    in.port_totals =
        parse_port_totals(read_file(dir / DataFiles::kPortTotals), *in.network, columns.ports);
  }
  if (fs::exists(dir / DataFiles::kWater)) {
    in.water = parse_water_mask(read_file(dir / DataFiles::kWater));
  }
  return in;
}

NoConflictsError::NoConflictsError(int year)
    : InvariantError("no active conflicts in " + std::to_string(year)), year_(year) {}

const YearSimulation* SimulationArchive::find_year(int year) const {
  auto it = std::find_if(years.begin(), years.end(),
                         [&](const YearSimulation& y) { return y.year == year; });
  return it == years.end() ? nullptr : &*it;
}

std::vector<ConflictObservation> year_observations(const ConflictTable& conflicts, int year,
                                                   const SimulationConfig& config) {
  const auto active = conflicts_active_in_year(conflicts, year, config.include_founded);
  return to_observations(active, config.intensity);
}

YearSimulation simulate_year(int year, const SimulationConfig& config, const ModelInputs& inputs) {
  config.validate();
  const auto observations = year_observations(inputs.conflicts, year, config);
  if (observations.empty()) throw NoConflictsError(year);

  const TradeNetwork& network = *inputs.network;
  const GridSpec grid = config.grid_for(network);

  YearSimulation out;
  out.year = year;
  out.surface = krige_predict(observations, config.matern, grid);
  out.density = normalize_surface(out.surface);

  RandomStream capture_rng(config.master_seed, year, 0, StreamPurpose::Capture);
  const auto captures = sample_captures(out.density, config.samples_per_year, capture_rng, year);

  const auto costs = std::make_shared<const MovementCosts>(network, out.density, config.lambda,
                                                           config.cost_form);
  const RewardDistribution rewards = config.rewards_for(network);

  // With no reward noise every individual faces the same MDP.
  std::optional<PolicySolution> shared_solution;
  if (rewards.variance == 0.0) {
    const MdpInstance mdp{inputs.network, costs, rewards.mean, config.move_success};
    shared_solution = policy_iteration(mdp);
  }

  out.traces.resize(captures.size());
  parallel_for(captures.size(), config.threads, [&](std::size_t i) {
    RandomStream reward_rng(config.master_seed, year, i, StreamPurpose::Reward);
    MdpInstance mdp{inputs.network, costs, draw_terminal_rewards(rewards, reward_rng),
                    config.move_success};
    const Policy policy =
        shared_solution ? shared_solution->policy : policy_iteration(mdp).policy;
    const std::size_t start = nearest_node(captures[i].location, network);
    RandomStream transit_rng(config.master_seed, year, i, StreamPurpose::Transit);
    TransitTrace trace = simulate_trajectory(policy, start, mdp, transit_rng);
    trace.year = year;
    trace.individual = i;
    trace.capture = captures[i];
    out.traces[i] = std::move(trace);
  });
  return out;
}

SimulationArchive run_all_years(const SimulationConfig& config, const ModelInputs& inputs,
                                const std::vector<int>& order) {
  config.validate();
  std::vector<int> years = order;
  if (years.empty()) {
    years.resize(static_cast<std::size_t>(config.last_year - config.first_year + 1));
    std::iota(years.begin(), years.end(), config.first_year);
  }
  SimulationArchive archive;
  archive.config = config;
  for (int year : years) {
    try {
      archive.years.push_back(simulate_year(year, config, inputs));
    } catch (const NoConflictsError& e) {
      archive.skipped.push_back({year, e.what()});
    } catch (const InvariantError& e) {
      throw InvariantError("year " + std::to_string(year) + ": " + e.what());
    }
  }
  std::sort(archive.years.begin(), archive.years.end(),
            [](const YearSimulation& a, const YearSimulation& b) { return a.year < b.year; });
  std::sort(archive.skipped.begin(), archive.skipped.end(),
            [](const SkippedYear& a, const SkippedYear& b) { return a.year < b.year; });
  if (archive.years.empty()) throw InvariantError("every configured year was skipped");
  return archive;
}

FlowTable sankey_flows(const SimulationArchive& archive, const std::set<std::size_t>& ports,
                       const std::set<int>& years) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
  for (const auto& y : archive.years) {
    if (!years.empty() && !years.contains(y.year)) continue;
    for (const auto& t : y.traces) {
      if (!ports.contains(t.exit_node)) continue;
      for (std::size_t k = 1; k < t.path.size(); ++k) {
        if (t.path[k - 1] != t.path[k]) ++counts[{t.path[k - 1], t.path[k]}];
      }
    }
  }
  FlowTable table;
  table.rows.reserve(counts.size());
  for (const auto& [edge, count] : counts) table.rows.push_back({edge.first, edge.second, count});
  return table;
}

std::set<std::size_t> resolve_port_set(const TradeNetwork& network, std::string_view spec) {
  std::set<std::size_t> out;
  std::size_t named = 0;
  const auto rows = csv::parse(spec);
  for (const auto& raw : rows.empty() ? csv::Row{} : rows.front()) {
    if (raw.empty()) continue;
    ++named;
    const std::string key = csv::slug(raw);
    if (key == "all") {
      out.insert(network.absorbing().begin(), network.absorbing().end());
      continue;
    }
    if (key == "allcoastal" || key == "coastal" || key == "offmap") {
      const PortClass wanted = key == "offmap" ? PortClass::OffMap : PortClass::Coastal;
      for (auto a : network.absorbing()) {
        if (network.node(a).port_class == wanted) out.insert(a);
      }
      // A node literally named "Off Map" would be shadowed; aliases win.
      continue;
    }
    const auto idx = network.resolve(raw);
    if (!idx) throw NotFoundError("unknown port '" + raw + "'");
    if (!network.node(*idx).absorbing) throw NotFoundError(raw + " is not a point of sale");
    out.insert(*idx);
  }
  if (named == 0) throw InvariantError("port set is empty");
  if (out.empty()) throw NotFoundError("port alias '" + std::string(spec) + "' matches no port");
  return out;
}

std::set<int> parse_year_set(std::string_view spec) {
  std::set<int> out;
  const auto rows = csv::parse(spec);
  if (rows.empty()) return out;
  for (const auto& item : rows.front()) {
    if (item.empty() || csv::lower(item) == "all") continue;
    const auto colon = item.find(':');
    const auto a = csv::to_integer(item.substr(0, colon), "year", 0);
    const auto b = colon == std::string::npos ? a : csv::to_integer(item.substr(colon + 1), "year", 0);
    if (a > b) throw ParseError("year range inverted: " + item);
    if (b - a > 100000) throw ParseError("year range too long: " + item);
    for (auto y = a; y <= b; ++y) out.insert(static_cast<int>(y));
  }
  return out;
}

}  // namespace origins
