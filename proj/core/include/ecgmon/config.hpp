#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ecgmon/adc.hpp"
#include "ecgmon/dsp.hpp"
#include "ecgmon/frontend.hpp"
#include "ecgmon/signal.hpp"
#include "ecgmon/telemetry.hpp"

namespace ecgmon {

enum class SourceMode { Ecg, Sine };

struct PipelineConfig {
  double sample_rate = 500.0;
  SourceMode source = SourceMode::Ecg;
  double sine_amplitude_mv = 0.6;  // ~2 V p-p after the 1650x chain
  EcgTemplateParams ecg;
  NoiseConfig noise;
  ComponentValues components;
  FrontEndSpec frontend = FrontEndSpec::bench_tuned();
  AdcConfig adc;
  std::size_t half_capacity = 512;
  bool fft_notch_enabled = true;
  double notch_center_hz = 50.0;
  double notch_half_band_hz = 2.0;
  std::size_t smooth_window = 5;
  TriggerConfig trigger;
  AlertPolicy alert;
  int fb_width = 128;
  int fb_height = 64;
  std::string device_id = "ecgmon-0";
  std::string location = "unknown";
  std::int64_t timestamp = 0;
  std::size_t max_ecg = kDefaultMaxEcgSamples;
  std::string sink;  // empty: no publishing
  bool include_metrics = false;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// INI-style `key = value` lines grouped under `[section]` headers; `#` and `;`
// start comments. Unknown sections or keys are errors. In [frontend],
// `preset = bench|design` is applied before the other keys regardless of
// position; `design` derives the spec from the [components] section.
PipelineConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
PipelineConfig load_config(const std::string& path);

// Applies one `section.key=value` override (the CLI's --set).
void apply_override(PipelineConfig& cfg, const std::string& dotted_key, const std::string& value);

}  // namespace ecgmon
