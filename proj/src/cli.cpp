#include "origins/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "origins/archive.hpp"
#include "origins/calibrate.hpp"
#include "origins/checksum.hpp"
#include "origins/csv.hpp"
#include "origins/density.hpp"
#include "origins/error.hpp"
#include "origins/grid_io.hpp"
#include "origins/pipeline.hpp"
#include "origins/server.hpp"

namespace origins::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json read_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + " is not valid JSON: " + e.what());
  }
}

// Accepts a bare config object or a run manifest carrying one.
SimulationConfig config_from_file(const fs::path& path, SimulationConfig base) {
  const auto j = read_json_file(path);
  if (j.contains("config") && j.at("config").is_object()) return config_from_json(j.at("config"), base);
  return config_from_json(j, base);
}

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError(std::string(what) + " must be A:B");
  try {
    return {csv::to_double(s.substr(0, colon), what, 0), csv::to_double(s.substr(colon + 1), what, 0)};
  } catch (const ParseError& e) {
    throw CLI::ValidationError(e.what());
  }
}

const CLI::Validator kYearRange(
    [](std::string& s) -> std::string {
      const auto colon = s.find(':');
      try {
        const auto a = csv::to_integer(s.substr(0, colon), "year", 0);
        const auto b = colon == std::string::npos ? a : csv::to_integer(s.substr(colon + 1), "year", 0);
        if (a > b) return "year range " + s + " is inverted";
      } catch (const ParseError& e) {
        return e.what();
      }
      return {};
    },
    "A:B");

const CLI::Validator kBandwidth(
    [](std::string& s) -> std::string {
      try {
        check_bandwidth(csv::to_double(s, "bandwidth", 0));
      } catch (const Error& e) {
        return e.what();
      }
      return {};
    },
    "H");

const CLI::Validator kCostForm(
    [](std::string& s) -> std::string {
      return parse_cost_form(s) ? std::string{} : "cost form must be 'literal' or 'ratio'";
    },
    "literal|ratio");

fs::path default_data_dir() {
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return "data/synthetic";
}

ColumnMapping load_columns(const std::string& path) {
  if (path.empty()) return {};
  return ColumnMapping::from_json(read_json_file(path));
}

struct CommonFlags {
  std::string data_dir;
  std::string config_file;
  std::string columns_file;
  std::string years;
  std::size_t samples = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double grid_res = 0.0;
  std::string cost_form;
  double sigma_r2 = 0.0;
  unsigned threads = 1;
  bool include_founded = false;
  bool record_time = false;
  CLI::Option* o_years = nullptr;
  CLI::Option* o_samples = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_grid = nullptr;
  CLI::Option* o_form = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_threads = nullptr;
  CLI::Option* o_founded = nullptr;
};

void add_data_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--data", f.data_dir, "Input data directory (default $ORIGINS_DATA)");
  cmd->add_option("--columns", f.columns_file, "JSON column-name mapping per input file");
}

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON config or a previous run manifest");
  f.o_years = cmd->add_option("--years", f.years, "Inclusive year range A:B")->check(kYearRange);
  f.o_samples = cmd->add_option("--samples", f.samples, "Individuals per year")
                    ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  f.o_lambda = cmd->add_option("--lambda", f.lambda, "Conflict cost scaling factor")
                   ->check(CLI::NonNegativeNumber);
  f.o_seed = cmd->add_option("--seed", f.seed, "Master seed");
  f.o_grid = cmd->add_option("--grid-res", f.grid_res, "Grid resolution in degrees")
                 ->check(CLI::PositiveNumber);
  f.o_form = cmd->add_option("--cost-form", f.cost_form, "Movement cost form")->check(kCostForm);
  f.o_sigma = cmd->add_option("--sigma-r2", f.sigma_r2, "Terminal reward variance")
                  ->check(CLI::NonNegativeNumber);
  f.o_threads = cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on it)")
                    ->check(CLI::Range(1u, 1024u));
  f.o_founded = cmd->add_flag("--include-founded", f.include_founded,
                              "Let founding records (code 9) enter the conflict surface");
  cmd->add_flag("--record-time", f.record_time, "Add a timestamp to the manifest");
}

SimulationConfig effective_config(const CommonFlags& f) {
  SimulationConfig c;
  if (!f.config_file.empty()) c = config_from_file(f.config_file, c);
  if (f.o_years && f.o_years->count()) {
    const auto colon = f.years.find(':');
    c.first_year = static_cast<int>(csv::to_integer(f.years.substr(0, colon), "year", 0));
    c.last_year = colon == std::string::npos
                      ? c.first_year
                      : static_cast<int>(csv::to_integer(f.years.substr(colon + 1), "year", 0));
  }
  if (f.o_samples && f.o_samples->count()) c.samples_per_year = f.samples;
  if (f.o_lambda && f.o_lambda->count()) c.lambda = f.lambda;
  if (f.o_seed && f.o_seed->count()) c.master_seed = f.seed;
  if (f.o_grid && f.o_grid->count()) c.grid_resolution = f.grid_res;
  if (f.o_form && f.o_form->count()) c.cost_form = *parse_cost_form(f.cost_form);
  if (f.o_sigma && f.o_sigma->count()) c.reward_variance = f.sigma_r2;
  if (f.o_threads && f.o_threads->count()) c.threads = f.threads;
  if (f.o_founded && f.o_founded->count()) c.include_founded = f.include_founded;
  c.validate();
  return c;
}

fs::path data_dir_of(const CommonFlags& f) {
  return f.data_dir.empty() ? default_data_dir() : fs::path(f.data_dir);
}

// Maps library exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

// ---------------------------------------------------------------------------

int cmd_validate(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const fs::path dir = data_dir_of(f);
  int code = kExitOk;
  auto fail = [&](const std::string& file, const std::exception& e, bool io) {
    out << "FAIL " << file << ": " << e.what() << '\n';
    code = io ? kExitIo : std::max(code, kExitDomain);
  };
  ColumnMapping columns;
  try {
    columns = load_columns(f.columns_file);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return dynamic_cast<const IoError*>(&e) ? kExitIo : kExitDomain;
  }
  SimulationConfig config;
  if (!f.config_file.empty()) {
    try {
      config = config_from_file(f.config_file, config);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return dynamic_cast<const IoError*>(&e) ? kExitIo : kExitDomain;
    }
  }

  std::optional<ConflictTable> conflicts;
  try {
    conflicts = parse_conflict_table(read_file(dir / DataFiles::kConflicts), columns.conflicts);
    std::size_t active_years = 0;
    for (int y = config.first_year; y <= config.last_year; ++y) {
      if (!year_observations(*conflicts, y, config).empty()) ++active_years;
    }
    out << "ok   " << DataFiles::kConflicts << ": " << conflicts->records.size() << " records, "
        << active_years << " of " << (config.last_year - config.first_year + 1)
        << " years with active conflicts\n";
    if (active_years == 0) {
      out << "FAIL " << DataFiles::kConflicts << ": no active conflicts in " << config.first_year
          << ":" << config.last_year << '\n';
      code = std::max(code, kExitDomain);
    }
  } catch (const IoError& e) {
    fail(DataFiles::kConflicts, e, true);
  } catch (const Error& e) {
    fail(DataFiles::kConflicts, e, false);
  }

  std::optional<TradeNetwork> network;
  const bool edge_list = fs::exists(dir / DataFiles::kEdgeList);
  const std::string edge_file = edge_list ? DataFiles::kEdgeList : DataFiles::kMatrix;
  try {
    network = parse_trade_network(read_file(dir / DataFiles::kNodes), read_file(dir / edge_file),
                                  edge_list ? EdgeFormat::EdgeList : EdgeFormat::Matrix,
                                  columns.nodes, columns.edges);
    out << "ok   " << DataFiles::kNodes << " + " << edge_file << ": " << network->size()
        << " nodes, " << network->absorbing_count() << " absorbing\n";
    const GridSpec grid = config.grid_for(*network);
    out << "ok   grid: " << grid.nx() << " x " << grid.ny() << " cells at "
        << csv::format_double(grid.resolution()) << " degrees\n";
  } catch (const IoError& e) {
    fail(DataFiles::kNodes + std::string(" + ") + edge_file, e, true);
  } catch (const Error& e) {
    fail(DataFiles::kNodes + std::string(" + ") + edge_file, e, false);
  }

  if (fs::exists(dir / DataFiles::kPortTotals)) {
    if (!network) {
      out << "skip " << DataFiles::kPortTotals << ": needs a valid network\n";
    } else {
      try {
        const auto totals =
            parse_port_totals(read_file(dir / DataFiles::kPortTotals), *network, columns.ports);
        double sum = 0.0;
        for (double v : totals.aggregate(*network)) sum += v;
        out << "ok   " << DataFiles::kPortTotals << ": " << totals.entries.size() << " entries, total "
            << csv::format_double(sum) << '\n';
      } catch (const Error& e) {
        fail(DataFiles::kPortTotals, e, dynamic_cast<const IoError*>(&e) != nullptr);
      }
    }
  } else {
    out << "skip " << DataFiles::kPortTotals << ": not present (calibration unavailable)\n";
  }

  if (fs::exists(dir / DataFiles::kWater)) {
    try {
      const auto mask = parse_water_mask(read_file(dir / DataFiles::kWater));
      out << "ok   " << DataFiles::kWater << ": " << mask.polygons().size() << " polygons\n";
    } catch (const Error& e) {
      fail(DataFiles::kWater, e, dynamic_cast<const IoError*>(&e) != nullptr);
    }
  } else {
    out << "skip " << DataFiles::kWater << ": not present (no ocean masking)\n";
  }
  out << (code == kExitOk ? "valid\n" : "invalid\n");
  return code;
}

int cmd_simulate(const CommonFlags& f, const std::string& out_dir, std::ostream& out,
                 std::ostream& err) {
  const SimulationConfig config = effective_config(f);
  const fs::path dir = data_dir_of(f);
  const ModelInputs inputs = load_inputs(dir, load_columns(f.columns_file));
  const SimulationArchive archive = run_all_years(config, inputs);
  for (const auto& s : archive.skipped) err << "notice: skipped " << s.year << ": " << s.reason << '\n';

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.inputs = input_checksums(dir);
  if (f.record_time) manifest.created = utc_now();
  write_archive(out_dir, archive, inputs, manifest);

  std::size_t traces = 0;
  for (const auto& y : archive.years) traces += y.traces.size();
  out << "simulated " << archive.years.size() << " years, " << traces << " traces -> " << out_dir
      << '\n';
  return kExitOk;
}

int cmd_calibrate(const CommonFlags& f, const std::string& range, std::size_t n,
                  std::size_t iterations, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
  SimulationConfig config = effective_config(f);
  const auto [lo, hi] = parse_pair(range, "range");
  if (!(lo < hi) || lo < 0.0) throw CLI::ValidationError("--range must satisfy 0 <= lo < hi");
  const fs::path dir = data_dir_of(f);
  const ModelInputs inputs = load_inputs(dir, load_columns(f.columns_file));
  if (!inputs.port_totals) {
    throw IoError("observed port totals are required", (dir / DataFiles::kPortTotals).string());
  }
  PortTotals in_range;
  for (const auto& e : inputs.port_totals->entries) {
    if (!e.year || (*e.year >= config.first_year && *e.year <= config.last_year)) {
      in_range.entries.push_back(e);
    }
  }
  const auto observed = in_range.aggregate(*inputs.network);
  const CalibrationProblem problem(inputs, config, n, config.master_seed);
  const CalibrationResult result =
      calibrate_lambda(problem, observed, {lo, hi, iterations});
  const std::string report = format_calibration_report(result);
  out << report;
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';

  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory", out_dir);
    nlohmann::json trail = nlohmann::json::array();
    for (const auto& [l, v] : result.trail) {
      trail.push_back({{"lambda", l}, {"statistic", std::isfinite(v) ? nlohmann::json(v) : nlohmann::json()}});
    }
    const nlohmann::json summary = {{"lambda", result.lambda},
                                    {"statistic", result.statistic},
                                    {"flat", result.flat},
                                    {"warnings", result.warnings},
                                    {"simulation_size", result.simulation_size},
                                    {"observed", observed},
                                    {"trail", trail}};
    RunManifest manifest;
    manifest.command = "calibrate";
    manifest.config = config_to_json(config);
    manifest.master_seed = config.master_seed;
    manifest.inputs = input_checksums(dir);
    if (f.record_time) manifest.created = utc_now();
    manifest.extra["calibration"] = {{"range", {lo, hi}}, {"n", n}, {"iterations", iterations}};
    const std::string report_json = dump_json(summary);
    write_file(fs::path(out_dir) / "calibration.txt", report);
    write_file(fs::path(out_dir) / "calibration.json", report_json);
    manifest.outputs["calibration.txt"] = sha256_hex(report);
    manifest.outputs["calibration.json"] = sha256_hex(report_json);
    write_file(fs::path(out_dir) / "manifest.json", dump_json(manifest.to_json()));
  }
  return kExitOk;
}

std::string port_slug(const TradeNetwork& net, const std::string& spec,
                      const std::set<std::size_t>& ports) {
  const std::string s = csv::slug(spec);
  if (s == "all" || s == "allcoastal" || s == "offmap") return s;
  std::string out;
  for (auto p : ports) {
    if (!out.empty()) out += '-';
    out += csv::slug(net.node(p).name);
  }
  return out;
}

struct ExportFlags {
  std::string archive_dir;
  std::string out_dir;
  std::vector<std::string> years;
  std::vector<std::string> ports;
  double bandwidth = kDefaultBandwidth;
  std::string mask;
  bool sankey = false;
  bool record_time = false;
};

int cmd_export_map(const ExportFlags& f, std::ostream& out, std::ostream& err) {
  const LoadedArchive loaded = read_archive(f.archive_dir);
  const SimulationArchive& archive = loaded.archive;
  const TradeNetwork& net = *loaded.inputs.network;

  WaterMask mask = loaded.inputs.water;
  if (!f.mask.empty()) mask = csv::lower(f.mask) == "none" ? WaterMask{} : parse_water_mask(read_file(f.mask));
  const auto water = water_cells(archive.years.front().density.grid, mask);

  std::vector<int> years;
  for (const auto& spec : f.years) {
    const auto set = parse_year_set(spec);
    years.insert(years.end(), set.begin(), set.end());
  }
  for (int y : years) {
    if (!archive.find_year(y)) throw NotFoundError("year " + std::to_string(y) + " not in archive");
  }

  std::error_code ec;
  fs::create_directories(f.out_dir, ec);
  if (ec) throw IoError("cannot create output directory", f.out_dir);

  RunManifest manifest;
  manifest.command = "export-map";
  manifest.config = {{"years", years}, {"ports", f.ports}, {"bandwidth", f.bandwidth},
                     {"mask", f.mask.empty() ? "archive" : f.mask}, {"sankey", f.sankey}};
  manifest.master_seed = archive.config.master_seed;
  manifest.inputs["manifest.json"] = sha256_hex(read_file(fs::path(f.archive_dir) / "manifest.json"));
  if (f.record_time) manifest.created = utc_now();

  int code = kExitOk;
  for (const auto& spec : f.ports) {
    const auto ports = resolve_port_set(net, spec);
    const std::string slug = port_slug(net, spec, ports);
    std::string port_ids;
    for (auto p : ports) port_ids += (port_ids.empty() ? "" : ",") + std::to_string(net.node(p).id);
    for (int y : years) {
      const auto map = conditional_origin_map(archive, {y}, ports, f.bandwidth, water);
      if (map.empty()) {
        err << "warning: no simulated individuals left through " << spec << " in " << y << '\n';
        code = kExitDomain;
        continue;
      }
      const std::map<std::string, std::string> meta = {
          {"years", std::to_string(y)},
          {"ports", port_ids},
          {"bandwidth", csv::format_double(f.bandwidth)},
          {"sample_count", std::to_string(map.sample_count)}};
      const std::string name = "origin_" + std::to_string(y) + "_" + slug + ".grid";
      const std::string body = write_grid_text(map.grid, map.values, meta);
      write_file(fs::path(f.out_dir) / name, body);
      manifest.outputs[name] = sha256_hex(body);
      out << "wrote " << name << " (" << map.sample_count << " individuals)\n";
    }
    if (f.sankey) {
      const std::set<int> year_set(years.begin(), years.end());
      const FlowTable table = sankey_flows(archive, ports, year_set);
      std::string body = "from_id,to_id,from_name,to_name,count\n";
      for (const auto& r : table.rows) {
        body += std::to_string(net.node(r.from).id) + "," + std::to_string(net.node(r.to).id) + "," +
                csv::escape(net.node(r.from).name) + "," + csv::escape(net.node(r.to).name) + "," +
                std::to_string(r.count) + "\n";
      }
      const std::string name = "sankey_" + slug + ".csv";
      write_file(fs::path(f.out_dir) / name, body);
      manifest.outputs[name] = sha256_hex(body);
      out << "wrote " << name << " (" << table.rows.size() << " edges)\n";
    }
  }
  write_file(fs::path(f.out_dir) / "manifest.json", dump_json(manifest.to_json()));
  return code;
}

int cmd_serve(const std::string& archive_dir, const std::string& host, int port,
              const std::string& static_dir, std::ostream& out, std::ostream& err) {
  // Handle termination signals synchronously on this thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ApiService service;
  HttpServer server(service, static_dir.empty() ? std::nullopt
                                                : std::optional<fs::path>(static_dir));
  const int bound = server.start(host, port);
  out << "listening on http://" << host << ":" << bound << '\n' << std::flush;
  try {
    service.load(std::make_shared<const LoadedArchive>(read_archive(archive_dir)));
  } catch (const Error& e) {
    server.stop();
    throw;
  }
  out << "archive loaded from " << archive_dir << '\n' << std::flush;
  int sig = 0;
  sigwait(&signals, &sig);
  err << "shutting down\n";
  server.stop();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic origins of displaced individuals from conflict and trade-route data",
               "origins"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonFlags validate_flags;
  auto* validate = app.add_subcommand("validate", "Parse and check every input file");
  add_data_flags(validate, validate_flags);
  validate->add_option("--config", validate_flags.config_file, "JSON config (year range, grid)");

  CommonFlags sim_flags;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run every configured year and write an archive");
  add_data_flags(simulate, sim_flags);
  add_model_flags(simulate, sim_flags);
  simulate->add_option("--out", sim_out, "Archive directory")->required();

  CommonFlags cal_flags;
  std::string cal_range = "0:10";
  std::size_t cal_n = 10000;
  std::size_t cal_iterations = 40;
  std::string cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "Fit lambda to observed port totals");
  add_data_flags(calibrate, cal_flags);
  add_model_flags(calibrate, cal_flags);
  calibrate->add_option("--range", cal_range, "Search range lo:hi")->capture_default_str();
  calibrate->add_option("--n", cal_n, "Simulated individuals per objective evaluation")->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  calibrate->add_option("--iterations", cal_iterations, "Golden-section iterations")->capture_default_str();
  calibrate->add_option("--out", cal_out, "Directory for the report and manifest");

  ExportFlags exp;
  auto* export_map = app.add_subcommand("export-map", "Write conditional origin maps from an archive");
  export_map->add_option("--archive", exp.archive_dir, "Archive directory")->required();
  export_map->add_option("--out", exp.out_dir, "Output directory")->required();
  export_map->add_option("--year", exp.years, "Year, list or A:B range (repeatable)")->required();
  export_map->add_option("--ports", exp.ports,
                         "Port set: ids or names, comma separated, or all / all-coastal / off-map "
                         "(repeatable)")
      ->required();
  export_map->add_option("--bandwidth", exp.bandwidth, "Kernel bandwidth in degrees")->capture_default_str()
      ->check(kBandwidth);
  export_map->add_option("--mask", exp.mask, "Water mask file, or 'none' (default: archive mask)");
  export_map->add_flag("--sankey", exp.sankey, "Also write the flow table per port set");
  export_map->add_flag("--record-time", exp.record_time, "Add a timestamp to the manifest");

  std::string serve_archive;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_static;
  auto* serve = app.add_subcommand("serve", "Serve an archive over HTTP");
  serve->add_option("--archive", serve_archive, "Archive directory")->required();
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_port, "TCP port (0 picks a free one)")->capture_default_str()
      ->check(CLI::Range(0, 65535));
  serve->add_option("--static", serve_static, "Directory with UI assets to serve at /")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  return guarded(err, [&]() -> int {
    try {
      if (*validate) return cmd_validate(validate_flags, out, err);
      if (*simulate) return cmd_simulate(sim_flags, sim_out, out, err);
      if (*calibrate) {
        return cmd_calibrate(cal_flags, cal_range, cal_n, cal_iterations, cal_out, out, err);
      }
      if (*export_map) return cmd_export_map(exp, out, err);
      if (*serve) return cmd_serve(serve_archive, serve_host, serve_port, serve_static, out, err);
    } catch (const CLI::ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    return kExitUsage;
  });
}

}  // namespace origins::cli
