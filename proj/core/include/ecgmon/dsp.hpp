#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecgmon/frame.hpp"

namespace ecgmon {

// Zeroes every FFT bin within [center - half_band, center + half_band] (and
// its conjugate mirror) and transforms back. Output length equals input length.
SampleFrame fft_notch(const SampleFrame& frame, double center_hz = 50.0, double half_band_hz = 2.0);

// Centered moving average; near the edges the window is truncated to the
// samples that exist. `window` must be odd.
SampleFrame smooth_emg(const SampleFrame& frame, std::size_t window = 5);

// Unset optionals resolve per frame: trigger level at the midrange
// (min+max)/2 and band at 2% of peak-to-peak.
struct TriggerConfig {
  std::optional<double> trigger_level;
  std::optional<double> band_epsilon;
  std::size_t run_length = 3;
  double refractory_s = 0.25;
  std::size_t start_index = 0;

  void validate() const;
};

enum class EdgeKind { Rising, Falling };

struct EdgeEvent {
  std::size_t sample_index = 0;
  double time = 0.0;
  EdgeKind kind = EdgeKind::Rising;
};

struct ResolvedTrigger {
  double level = 0.0;
  double band = 0.0;
};
ResolvedTrigger resolve_trigger(const SampleFrame& frame, const TriggerConfig& cfg);

// Scans from cfg.start_index for run_length consecutive non-decreasing samples
// with a net rise that either cross the trigger level or have their middle
// sample within band_epsilon of it; that middle sample is the edge. Scanning resumes after the run and at least one
// refractory interval past the edge.
std::vector<EdgeEvent> detect_rising_edges(const SampleFrame& frame, const TriggerConfig& cfg);

// Mirror image of detect_rising_edges. Not used for heart rate.
std::vector<EdgeEvent> detect_falling_edges(const SampleFrame& frame, const TriggerConfig& cfg);

struct HeartRateReading {
  double bpm = 0.0;
  double period_s = 0.0;
  EdgeEvent first;   // earlier edge of the pair the rate was taken from
  EdgeEvent second;
  std::optional<double> median_period_s;  // over all consecutive pairs, when > 2 edges
  std::size_t edge_count = 0;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rate from the latest consecutive pair of rising edges. Throws
// InsufficientData with fewer than two rising edges.
HeartRateReading heart_rate_from_edges(const std::vector<EdgeEvent>& edges, double sample_rate);

}  // namespace ecgmon
