#include "ecgmon/adc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecgmon {

void AdcConfig::validate() const {
  if (resolution_bits < 1 || resolution_bits > 16) {
    throw std::invalid_argument("resolution_bits must lie in [1, 16]");
  }
  if (!(vref > 0.0) || !std::isfinite(vref)) throw std::invalid_argument("vref must be positive");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("sample_rate must be positive");
  }
}

AdcCode quantize(double volts, const AdcConfig& cfg) {
  const double full_scale = static_cast<double>(cfg.max_code());
  if (std::isnan(volts)) return 0;
  // std::round rounds halves away from zero.
  const double code = std::round(volts / cfg.vref * full_scale);
  return static_cast<AdcCode>(std::clamp(code, 0.0, full_scale));
}

double dequantize(std::uint32_t code, const AdcConfig& cfg) {
  if (code > cfg.max_code()) {
    throw std::invalid_argument("ADC code " + std::to_string(code) + " exceeds " +
                                std::to_string(cfg.max_code()));
  }
  return static_cast<double>(code) / static_cast<double>(cfg.max_code()) * cfg.vref;
}

std::vector<AdcCode> quantize_frame(const SampleFrame& volts, const AdcConfig& cfg) {
  if (volts.unit != Unit::Volt) throw std::invalid_argument("quantize_frame expects volts");
  std::vector<AdcCode> codes(volts.size());
  std::transform(volts.values.begin(), volts.values.end(), codes.begin(),
                 [&cfg](double v) { return quantize(v, cfg); });
  return codes;
}

SampleFrame dequantize_frame(const std::vector<AdcCode>& codes, const AdcConfig& cfg,
                             double start_time) {
  std::vector<double> values(codes.size());
  std::transform(codes.begin(), codes.end(), values.begin(),
                 [&cfg](AdcCode c) { return dequantize(c, cfg); });
  return SampleFrame(cfg.sample_rate, Unit::Volt, std::move(values), start_time);
}

}  // namespace ecgmon
