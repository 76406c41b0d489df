#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecgmon/config.hpp"
#include "ecgmon/dsp.hpp"
#include "ecgmon/frontend.hpp"
#include "ecgmon/telemetry.hpp"

namespace ecgmon {

// A module failure inside run_pipeline; what() is prefixed with the module name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

struct StreamStats {
  std::size_t halves = 0;
  std::size_t samples_consumed = 0;
  bool overrun = false;
  std::uint64_t sequence_gaps = 0;
};

struct PipelineResult {
  HeartRateReading reading;
  std::optional<MetricsReport> metrics;
  std::optional<AlertEvent> alert;
  std::vector<std::string> telemetry;  // encoded payloads, in publish order
  bool frontend_saturated = false;
  StreamStats stream;
  SampleFrame conditioned;  // volts after digital filtering
};

// generate -> noise -> front end -> quantize -> ping-pong -> notch + smooth
// -> edge detection -> heart rate -> telemetry and alerts.
// `sink` overrides cfg.sink when non-null.
PipelineResult run_pipeline(const PipelineConfig& cfg, double bpm, double duration,
                            Sink* sink = nullptr);

}  // namespace ecgmon
