#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "origins/error.hpp"
#include "origins/ingest.hpp"
#include "origins/surface.hpp"
#include "origins/transit.hpp"

namespace origins {

struct SimulationConfig {
  int first_year = 1817;
  int last_year = 1836;
  std::size_t samples_per_year = 1000;
  double lambda = 1.55;
  double reward_mean = 10.0;
  // Optional per-port override of reward_mean (absorbing-slot order).
  std::vector<double> reward_means;
  double reward_variance = 0.1;
  MaternParams matern;
  // Explicit grid; when empty the grid is the node bounding box expanded by
  // grid_margin at grid_resolution.
  std::optional<BoundingBox> grid_bbox;
  double grid_resolution = 0.05;
  double grid_margin = 0.5;
  std::uint64_t master_seed = 1;
  CostForm cost_form = CostForm::Literal;
  double move_success = 0.98;
  bool include_founded = false;
  IntensityScale intensity;
  // Worker count; results do not depend on it.
  unsigned threads = 1;

  void validate() const;
  GridSpec grid_for(const TradeNetwork& network) const;
  RewardDistribution rewards_for(const TradeNetwork& network) const;
};

nlohmann::json config_to_json(const SimulationConfig& config);
// Missing keys keep the values already in `base`.
SimulationConfig config_from_json(const nlohmann::json& j, SimulationConfig base = {});

// Column renames per input file, keyed "conflicts", "nodes", "edges", "ports".
struct ColumnMapping {
  ColumnAliases conflicts;
  ColumnAliases nodes;
  ColumnAliases edges;
  ColumnAliases ports;

  static ColumnMapping from_json(const nlohmann::json& j);
};

struct ModelInputs {
  ConflictTable conflicts;
  std::shared_ptr<const TradeNetwork> network;
  std::optional<PortTotals> port_totals;
  WaterMask water;
};

// Standard file names inside a data directory.
struct DataFiles {
  static constexpr const char* kConflicts = "conflicts.csv";
  static constexpr const char* kNodes = "nodes.csv";
  static constexpr const char* kEdgeList = "edges.csv";
  static constexpr const char* kMatrix = "matrix.csv";
  static constexpr const char* kPortTotals = "port_totals.csv";
  static constexpr const char* kWater = "water.geojson";
};

// Loads conflicts, nodes and edges (edges.csv, else matrix.csv); port totals
// and the water mask are optional. Throws IoError / ParseError / InvariantError.
ModelInputs load_inputs(const std::filesystem::path& dir, const ColumnMapping& columns = {});

// Raised for a year without any active conflict; run_all_years records it
// as skipped.
class NoConflictsError : public InvariantError {
 public:
  explicit NoConflictsError(int year);
  int year() const { return year_; }

 private:
  int year_;
};

struct YearSimulation {
  int year = 0;
  ConflictSurface surface;
  ConflictDensity density;
  std::vector<TransitTrace> traces;
};

struct SkippedYear {
  int year = 0;
  std::string reason;
};

struct SimulationArchive {
  SimulationConfig config;
  std::vector<YearSimulation> years;  // ascending by year
  std::vector<SkippedYear> skipped;

  const YearSimulation* find_year(int year) const;
};

// Kriging observations for one year after the founded-code rule and site
// de-duplication.
std::vector<ConflictObservation> year_observations(const ConflictTable& conflicts, int year,
                                                   const SimulationConfig& config);

// Steps 1-3 for one year: krige, normalize, sample captures, route each
// individual through its own MDP. Throws NoConflictsError.
YearSimulation simulate_year(int year, const SimulationConfig& config, const ModelInputs& inputs);

// Years are independent; `order` permutes execution only (for testing that
// results do not depend on it). Throws InvariantError when every year is
// skipped.
SimulationArchive run_all_years(const SimulationConfig& config, const ModelInputs& inputs,
                                const std::vector<int>& order = {});

struct FlowRow {
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  std::size_t count = 0;

  friend bool operator==(const FlowRow&, const FlowRow&) = default;
};

struct FlowTable {
  std::vector<FlowRow> rows;  // sorted by (from, to)
};

// Edge counts over the paths of traces exiting through `ports` in `years`
// (empty year set = every year).
FlowTable sankey_flows(const SimulationArchive& archive, const std::set<std::size_t>& ports,
                       const std::set<int>& years = {});

// Comma-separated port ids, names or slugs, plus the aliases "all",
// "all-coastal" (coastal ports) and "off-map" (off-map exits). Throws
// NotFoundError for an unknown name or a node that is not absorbing, and
// InvariantError for an empty list.
std::set<std::size_t> resolve_port_set(const TradeNetwork& network, std::string_view spec);

// Comma-separated years or inclusive "A:B" ranges; "all" or "" gives the
// empty set, meaning every year. Throws ParseError.
std::set<int> parse_year_set(std::string_view spec);

}  // namespace origins
