#pragma once

#include <cstdint>
#include <vector>

#include "ecgmon/frame.hpp"

namespace ecgmon {

struct AdcConfig {
  int resolution_bits = 12;
  double vref = 3.3;           // V
  double sample_rate = 500.0;  // Hz

  std::uint32_t max_code() const noexcept { return (std::uint32_t{1} << resolution_bits) - 1; }
  void validate() const;
};

using AdcCode = std::uint16_t;

// round(v / vref * (2^bits - 1)), half away from zero, clamped to the code range.
AdcCode quantize(double volts, const AdcConfig& cfg);

// Throws std::invalid_argument for a code above the configured range.
double dequantize(std::uint32_t code, const AdcConfig& cfg);

std::vector<AdcCode> quantize_frame(const SampleFrame& volts, const AdcConfig& cfg);
SampleFrame dequantize_frame(const std::vector<AdcCode>& codes, const AdcConfig& cfg,
                             double start_time = 0.0);

}  // namespace ecgmon
