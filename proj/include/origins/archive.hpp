#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "origins/pipeline.hpp"

namespace origins {

inline constexpr const char* kToolName = "origins";
inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record written next to every command output. Checksums are
// lowercase SHA-256 of the file bytes.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t master_seed = 0;
  std::map<std::string, std::string> inputs;   // file name -> checksum
  std::map<std::string, std::string> outputs;  // file name -> checksum
  // Only set on request, so that repeated runs stay byte-identical.
  std::optional<std::string> created;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Deterministic two-space-indented JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

// Checksums of the standard input files present in `data_dir`.
std::map<std::string, std::string> input_checksums(const std::filesystem::path& data_dir);

// Canonical re-serializations of the inputs.
std::string write_port_totals_csv(const PortTotals& totals, const TradeNetwork& network);
std::string write_water_mask(const WaterMask& mask);

// Columns: year, individual, capture_lon, capture_lat, start_node, exit_node,
// path. Node columns hold node ids; path ids are joined by '>'.
std::string write_traces_csv(const SimulationArchive& archive, const TradeNetwork& network);

// Archive directory layout:
//   manifest.json, traces.csv, surface_<year>.grid, density_<year>.grid,
//   inputs/ (canonical copies of the model inputs, so the archive is
//   self-contained).
// Dwell counts and movement costs are not persisted.
struct ArchiveLayout {
  static constexpr const char* kManifest = "manifest.json";
  static constexpr const char* kTraces = "traces.csv";
  static constexpr const char* kInputs = "inputs";
  static std::string surface_file(int year) { return "surface_" + std::to_string(year) + ".grid"; }
  static std::string density_file(int year) { return "density_" + std::to_string(year) + ".grid"; }
};

// Fills manifest.outputs and the year lists, then writes everything. Throws
// IoError.
void write_archive(const std::filesystem::path& dir, const SimulationArchive& archive,
                   const ModelInputs& inputs, RunManifest manifest);

struct LoadedArchive {
  SimulationArchive archive;
  ModelInputs inputs;
  RunManifest manifest;
};

// Throws IoError for missing files, ParseError / InvariantError for content
// that does not match the manifest.
LoadedArchive read_archive(const std::filesystem::path& dir);

}  // namespace origins
