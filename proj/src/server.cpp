#include "origins/server.hpp"

#include "httplib.h"

#include "origins/csv.hpp"
#include "origins/density.hpp"
#include "origins/error.hpp"
#include "origins/grid_io.hpp"

namespace origins {

std::optional<ApiResponse> ResponseCache::get(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void ResponseCache::put(const std::string& key, ApiResponse response) {
  if (capacity_ == 0) return;
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(response);
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, std::move(response));
  index_[key] = order_.begin();
  if (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

std::string request_key(std::string_view path, const QueryParams& params) {
  std::string key(path);
  char sep = '?';
  // multimap iteration is already sorted by name, stable within a name.
  for (const auto& [k, v] : params) {
    key += sep;
    key += k;
    key += '=';
    key += v;
    sep = '&';
  }
  return key;
}

namespace {

ApiResponse json_response(int status, const nlohmann::json& body) {
  return {status, body.dump() + "\n", "application/json"};
}

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

// 400 for malformed or missing parameters.
class BadRequest : public Error {
 public:
  using Error::Error;
};

std::optional<std::string> param(const QueryParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::string required_param(const QueryParams& params, const std::string& name) {
  auto v = param(params, name);
  if (!v || v->empty()) throw BadRequest("missing parameter '" + name + "'");
  return *v;
}

std::set<int> years_param(const QueryParams& params, const std::string& name, bool required) {
  const auto raw = required ? required_param(params, name) : param(params, name).value_or("");
  try {
    return parse_year_set(raw);
  } catch (const ParseError& e) {
    throw BadRequest(std::string("invalid '") + name + "': " + e.what());
  }
}

void require_years(const SimulationArchive& archive, const std::set<int>& years) {
  for (int y : years) {
    if (!archive.find_year(y)) throw NotFoundError("year " + std::to_string(y) + " not in archive");
  }
}

nlohmann::json port_json(const TradeNetwork& net, std::size_t index) {
  const Node& n = net.node(index);
  return {{"id", n.id}, {"name", n.name}, {"class", std::string(to_string(n.port_class))}};
}

}  // namespace

ApiService::ApiService(std::size_t cache_capacity) : cache_(cache_capacity) {}

void ApiService::load(std::shared_ptr<const LoadedArchive> archive) {
  if (!archive || archive->archive.years.empty()) {
    throw InvariantError("cannot serve an archive without simulated years");
  }
  water_ = water_cells(archive->archive.years.front().density.grid, archive->inputs.water);
  archive_ = std::move(archive);
  ready_.store(true);
}

ApiResponse ApiService::handle(std::string_view path, const QueryParams& params) {
  if (!ready()) return error_response(503, "archive not loaded yet");
  const std::string key = request_key(path, params);
  if (auto hit = cache_.get(key)) return *hit;
  ApiResponse response;
  try {
    response = dispatch(path, params);
  } catch (const BadRequest& e) {
    response = error_response(400, e.what());
  } catch (const ParseError& e) {
    response = error_response(400, e.what());
  } catch (const NotFoundError& e) {
    response = error_response(404, e.what());
  } catch (const InvariantError& e) {
    response = error_response(400, e.what());
  } catch (const std::exception& e) {
    // Not cached: an unexpected failure should not become sticky.
    return error_response(500, e.what());
  }
  cache_.put(key, response);
  return response;
}

ApiResponse ApiService::dispatch(std::string_view path, const QueryParams& params) const {
  if (path == "/api/meta") return meta();
  if (path == "/api/density") return density(params);
  if (path == "/api/conflict") return conflict(params);
  if (path == "/api/network") return network();
  if (path == "/api/sankey") return sankey(params);
  return error_response(404, "no such endpoint: " + std::string(path));
}

ApiResponse ApiService::meta() const {
  const SimulationArchive& a = archive_->archive;
  const TradeNetwork& net = *archive_->inputs.network;
  nlohmann::json years = nlohmann::json::array();
  for (const auto& y : a.years) years.push_back(y.year);
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : a.skipped) skipped.push_back({{"year", s.year}, {"reason", s.reason}});
  nlohmann::json ports = nlohmann::json::array();
  for (auto p : net.absorbing()) ports.push_back(port_json(net, p));
  nlohmann::json aliases = nlohmann::json::object();
  for (const char* alias : {"all", "all-coastal", "off-map"}) {
    nlohmann::json ids = nlohmann::json::array();
    try {
      for (auto p : resolve_port_set(net, alias)) ids.push_back(net.node(p).id);
    } catch (const NotFoundError&) {
      // Alias with no members in this network.
    }
    aliases[alias] = ids;
  }
  return json_response(
      200, {{"years", years},
            {"skipped", skipped},
            {"ports", ports},
            {"port_aliases", aliases},
            {"grid", grid_spec_to_json(a.years.front().density.grid)},
            {"bandwidth", {{"min", kBandwidthMin}, {"max", kBandwidthMax}, {"default", kDefaultBandwidth}}},
            {"samples_per_year", a.config.samples_per_year},
            {"lambda", a.config.lambda}});
}

ApiResponse ApiService::density(const QueryParams& params) const {
  const SimulationArchive& a = archive_->archive;
  const TradeNetwork& net = *archive_->inputs.network;
  const std::set<int> years = years_param(params, "year", true);
  const std::string ports_raw = required_param(params, "ports");
  double h = kDefaultBandwidth;
  if (auto raw = param(params, "h"); raw && !raw->empty()) {
    try {
      h = csv::to_double(*raw, "h", 0);
    } catch (const ParseError& e) {
      throw BadRequest(e.what());
    }
  }
  try {
    check_bandwidth(h);
  } catch (const InvariantError& e) {
    throw BadRequest(e.what());
  }
  require_years(a, years);
  const auto ports = resolve_port_set(net, ports_raw);
  const auto map = conditional_origin_map(a, years, ports, h, water_);
  nlohmann::json body = origin_map_to_json(map, net);
  if (map.empty()) {
    body["error"] = "no simulated individuals match this condition";
    body["status"] = 422;
    return json_response(422, body);
  }
  return json_response(200, body);
}

ApiResponse ApiService::conflict(const QueryParams& params) const {
  const SimulationArchive& a = archive_->archive;
  const auto raw = required_param(params, "year");
  int year = 0;
  try {
    year = static_cast<int>(csv::to_integer(raw, "year", 0));
  } catch (const ParseError& e) {
    throw BadRequest(e.what());
  }
  const YearSimulation* ys = a.find_year(year);
  if (!ys) throw NotFoundError("year " + std::to_string(year) + " not in archive");
  nlohmann::json points = nlohmann::json::array();
  for (const auto& r :
       conflicts_active_in_year(archive_->inputs.conflicts, year, a.config.include_founded)) {
    nlohmann::json p = {{"name", r.city_name},          {"lon", r.location.lon},
                        {"lat", r.location.lat},         {"start_year", r.start_year},
                        {"end_year", r.end_year},        {"intensity_code", static_cast<int>(r.intensity_code)}};
    if (r.affiliation) p["affiliation"] = *r.affiliation;
    if (r.source) p["source"] = *r.source;
    points.push_back(std::move(p));
  }
  return json_response(200, {{"year", year},
                             {"points", points},
                             {"surface", grid_to_json(ys->surface.grid, ys->surface.values)}});
}

ApiResponse ApiService::network() const {
  const TradeNetwork& net = *archive_->inputs.network;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : net.nodes()) {
    nlohmann::json j = {{"id", n.id},
                        {"name", n.name},
                        {"lon", n.location.lon},
                        {"lat", n.location.lat},
                        {"absorbing", n.absorbing}};
    if (n.absorbing) j["class"] = std::string(to_string(n.port_class));
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  nlohmann::json port_links = nlohmann::json::array();
  for (const auto& [from, to] : net.edge_list()) {
    nlohmann::json e = {{"from", net.node(from).id}, {"to", net.node(to).id}};
    (net.node(to).absorbing ? port_links : edges).push_back(std::move(e));
  }
  return json_response(200, {{"nodes", nodes}, {"edges", edges}, {"port_links", port_links}});
}

ApiResponse ApiService::sankey(const QueryParams& params) const {
  const SimulationArchive& a = archive_->archive;
  const TradeNetwork& net = *archive_->inputs.network;
  const std::string ports_raw = required_param(params, "ports");
  const std::set<int> years = years_param(params, "years", false);
  require_years(a, years);
  const auto ports = resolve_port_set(net, ports_raw);
  const FlowTable table = sankey_flows(a, ports, years);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"from", net.node(r.from).id},
                    {"to", net.node(r.to).id},
                    {"from_name", net.node(r.from).name},
                    {"to_name", net.node(r.to).name},
                    {"count", r.count}});
  }
  nlohmann::json port_list = nlohmann::json::array();
  for (auto p : ports) port_list.push_back(port_json(net, p));
  return json_response(200, {{"ports", port_list},
                             {"years", std::vector<int>(years.begin(), years.end())},
                             {"rows", rows}});
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  ApiService& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(ApiService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(new Impl{service, {}, {}}) {
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    const ApiResponse r = impl_->service.handle(req.path, params);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw IoError("static directory not found", static_dir->string());
    }
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind", host);
  } else if (!srv.bind_to_port(host, port)) {
    throw IoError("cannot bind", host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace origins
