#include "test_support.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "origins/checksum.hpp"
#include "origins/cli.hpp"

#ifndef ORIGINS_SOURCE_DIR
#error "ORIGINS_SOURCE_DIR must be defined"
#endif

namespace origins::testkit {

TradeNetwork make_network(const std::vector<NodeSpec>& specs,
                          const std::vector<std::pair<int, int>>& edges) {
  std::vector<Node> nodes;
  std::map<int, std::size_t> pos;
  for (const auto& s : specs) {
    pos[s.id] = nodes.size();
    nodes.push_back({s.id, s.name, {s.lon, s.lat}, s.absorbing, s.port_class});
  }
  const std::size_t n = nodes.size();
  std::vector<std::uint8_t> adj(n * n, 0);
  for (auto [a, b] : edges) {
    const std::size_t i = pos.at(a);
    const std::size_t j = pos.at(b);
    if (!nodes[i].absorbing) adj[i * n + j] = 1;
    if (!nodes[j].absorbing) adj[j * n + i] = 1;
  }
  return TradeNetwork(std::move(nodes), std::move(adj));
}

TradeNetwork chain_network() {
  return make_network({{1, "A", 0.0, 0.0}, {2, "B", 0.5, 0.0}, {3, "Port", 1.0, 0.0, true}},
                      {{1, 2}, {2, 3}});
}

TradeNetwork random_network(std::mt19937_64& rng, std::size_t transit, std::size_t ports,
                            std::size_t extra, BoundingBox box) {
  std::uniform_real_distribution<double> ux(box.lon_min, box.lon_max);
  std::uniform_real_distribution<double> uy(box.lat_min, box.lat_max);
  std::vector<NodeSpec> specs;
  for (std::size_t i = 0; i < transit + ports; ++i) {
    const bool port = i >= transit;
    specs.push_back({static_cast<int>(i + 1), (port ? "P" : "T") + std::to_string(i + 1), ux(rng),
                     uy(rng), port, port ? PortClass::Coastal : PortClass::Inland});
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 1; i < transit; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.emplace_back(static_cast<int>(i + 1), static_cast<int>(parent(rng) + 1));
  }
  std::uniform_int_distribution<std::size_t> any(0, transit - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t a = any(rng);
    const std::size_t b = any(rng);
    if (a != b) edges.emplace_back(static_cast<int>(a + 1), static_cast<int>(b + 1));
  }
  for (std::size_t p = 0; p < ports; ++p) {
    const int id = static_cast<int>(transit + p + 1);
    const std::size_t links = 1 + rng() % 2;
    for (std::size_t l = 0; l < links; ++l) edges.emplace_back(static_cast<int>(any(rng) + 1), id);
  }
  return make_network(specs, edges);
}

ConflictDensity uniform_density(const GridSpec& grid) {
  return density_from_weights(grid, std::vector<double>(grid.cell_count(), 1.0));
}

ConflictDensity density_from_weights(const GridSpec& grid, std::vector<double> weights) {
  if (weights.size() != grid.cell_count()) throw std::invalid_argument("weights size");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& w : weights) w /= total;
  return {grid, std::move(weights)};
}

std::vector<double> network_distance_to(const TradeNetwork& network, std::size_t target) {
  const std::size_t n = network.size();
  // Predecessor lists built from the raw adjacency matrix.
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && network.adjacent(i, j)) pred[j].push_back(i);
    }
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[target] = 0.0;
  queue.emplace(0.0, target);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (auto u : pred[v]) {
      const auto& a = network.node(u).location;
      const auto& b = network.node(v).location;
      const double nd = d + std::hypot(a.lon - b.lon, a.lat - b.lat);
      if (nd < dist[u]) {
        dist[u] = nd;
        queue.emplace(nd, u);
      }
    }
  }
  return dist;
}

ModelInputs make_inputs(TradeNetwork network, ConflictTable conflicts, WaterMask water) {
  ModelInputs in;
  in.conflicts = std::move(conflicts);
  in.network = std::make_shared<const TradeNetwork>(std::move(network));
  in.water = std::move(water);
  return in;
}

ConflictRecord conflict_at(double lon, double lat, int start, int end, IntensityCode code) {
  ConflictRecord r;
  r.city_name = "site";
  r.location = {lon, lat};
  r.start_year = start;
  r.end_year = end;
  r.intensity_code = code;
  return r;
}

std::filesystem::path source_dir() { return ORIGINS_SOURCE_DIR; }
std::filesystem::path synthetic_data_dir() { return source_dir() / "data" / "synthetic"; }

TempDir::TempDir(const std::string& tag) {
  std::string pattern = (std::filesystem::temp_directory_path() / ("origins-" + tag + "-XXXXXX")).string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

std::map<std::string, std::string> file_digests(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

bool directories_identical(const std::filesystem::path& a, const std::filesystem::path& b,
                           std::string* why) {
  const auto fa = file_digests(a);
  const auto fb = file_digests(b);
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    if (it == fb.end() || it->second != bytes) {
      if (why) *why = name;
      return false;
    }
  }
  for (const auto& [name, bytes] : fb) {
    if (!fa.count(name)) {
      if (why) *why = name;
      return false;
    }
  }
  return true;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"origins"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace origins::testkit
