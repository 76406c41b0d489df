#pragma once

#include <cstdint>
#include <random>

namespace ecgmon {

// Portable seeded generator. std::mt19937_64 is fully specified by the
// standard; the distributions are not, so uniform and Gaussian draws are
// derived here from raw 64-bit outputs to keep streams bit-identical across
// standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ecgmon
