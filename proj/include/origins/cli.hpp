#pragma once

#include <iosfwd>

namespace origins::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;

// Environment variable naming the default data directory.
inline constexpr const char* kDataDirEnv = "ORIGINS_DATA";

// Parses argv and runs one of validate, simulate, calibrate, export-map,
// serve. Never throws; errors are reported on `err` and mapped to the exit
// codes above.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace origins::cli
