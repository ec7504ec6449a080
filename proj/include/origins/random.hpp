#pragma once

#include <cstdint>
#include <random>

namespace origins {

// What a substream is used for; part of the seed derivation so that e.g. the
// reward draws of individual 7 never share bits with its transit draws.
enum class StreamPurpose : std::uint64_t {
  Capture = 1,
  Reward = 2,
  Transit = 3,
  Calibration = 4,
  Test = 99,
};

// Mixes (master seed, year, index, purpose) into an independent 64-bit seed.
// Pure function, so any execution order yields the same streams.
std::uint64_t derive_seed(std::uint64_t master, std::int64_t year, std::uint64_t index,
                          StreamPurpose purpose);

// Seeded stream with platform-independent transforms: std distributions are
// implementation-defined, which would tie archives to one standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::int64_t year, std::uint64_t index, StreamPurpose purpose)
      : engine_(derive_seed(master, year, index, purpose)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace origins
