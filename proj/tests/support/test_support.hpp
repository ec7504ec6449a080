#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "origins/ingest.hpp"
#include "origins/pipeline.hpp"
#include "origins/surface.hpp"

namespace origins::testkit {

struct NodeSpec {
  int id = 0;
  std::string name;
  double lon = 0.0;
  double lat = 0.0;
  bool absorbing = false;
  PortClass port_class = PortClass::Inland;
};

// Undirected pairs between transit nodes; a pair touching a port becomes a
// single move into the port.
TradeNetwork make_network(const std::vector<NodeSpec>& nodes,
                          const std::vector<std::pair<int, int>>& edges);

// Chain A(1) - B(2) - Port(3) along the equator at 0.5 degree spacing.
TradeNetwork chain_network();

// Connected random network: a random spanning tree over the transit nodes,
// `extra` additional transit edges, and every port linked to one or two
// transit nodes. Coordinates are uniform in `box`.
TradeNetwork random_network(std::mt19937_64& rng, std::size_t transit, std::size_t ports,
                            std::size_t extra, BoundingBox box);

ConflictDensity uniform_density(const GridSpec& grid);
// Normalizes non-negative weights into a pmf on `grid`.
ConflictDensity density_from_weights(const GridSpec& grid, std::vector<double> weights);

// Shortest network distance (sum of degree lengths) from every node to
// `target`, following move edges forwards. Independent of the library's
// routing code; infinity where unreachable.
std::vector<double> network_distance_to(const TradeNetwork& network, std::size_t target);

// Inputs holding a network and conflict records only.
ModelInputs make_inputs(TradeNetwork network, ConflictTable conflicts, WaterMask water = {});

ConflictRecord conflict_at(double lon, double lat, int start, int end,
                           IntensityCode code = IntensityCode::Attacked);

std::filesystem::path source_dir();
std::filesystem::path synthetic_data_dir();

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Every regular file below `a` exists below `b` with identical bytes and vice
// versa; on mismatch `why` names the first differing file.
bool directories_identical(const std::filesystem::path& a, const std::filesystem::path& b,
                           std::string* why = nullptr);

// Runs the CLI in-process and captures its streams.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace origins::testkit
