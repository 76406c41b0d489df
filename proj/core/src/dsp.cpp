#include "ecgmon/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

namespace ecgmon {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

}  // namespace

SampleFrame fft_notch(const SampleFrame& frame, double center_hz, double half_band_hz) {
  frame.validate();
  const double nyquist = frame.sample_rate / 2.0;
  if (!(center_hz >= 0.0) || center_hz >= nyquist) {
    throw std::invalid_argument("notch center must lie below the Nyquist frequency");
  }
  if (!(half_band_hz >= 0.0)) throw std::invalid_argument("half_band must be >= 0");
  const std::size_t n = frame.size();
  if (n < 2) throw std::invalid_argument("fft_notch needs at least two samples");

  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> time(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> spec(fftw_alloc_complex(bins));
  PlanPtr forward;
  PlanPtr inverse;
  {
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    forward.reset(fftw_plan_dft_r2c_1d(len, time.get(), spec.get(), FFTW_ESTIMATE));
    inverse.reset(fftw_plan_dft_c2r_1d(len, spec.get(), time.get(), FFTW_ESTIMATE));
  }

  std::copy(frame.values.begin(), frame.values.end(), time.get());
  fftw_execute(forward.get());

  // Only the non-negative half is stored; the inverse real transform treats
  // it as Hermitian, so the mirror bins follow.
  const double bin_hz = frame.sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (std::abs(f - center_hz) <= half_band_hz) {
      spec.get()[k][0] = 0.0;
      spec.get()[k][1] = 0.0;
    }
  }
  fftw_execute(inverse.get());

  SampleFrame out = frame;
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = time.get()[i] * scale;
  return out;
}

SampleFrame smooth_emg(const SampleFrame& frame, std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw std::invalid_argument("smoothing window must be odd and >= 1");
  }
  SampleFrame out = frame;
  const auto& in = frame.values;
  const std::size_t n = in.size();
  const std::size_t half = window / 2;
  // Prefix sums keep the edge-truncated average O(n).
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (window == 1) break;
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out.values[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

void TriggerConfig::validate() const {
  if (band_epsilon && !(*band_epsilon >= 0.0)) throw std::invalid_argument("band_epsilon must be >= 0");
  if (run_length < 3) throw std::invalid_argument("run_length must be >= 3");
  if (!(refractory_s >= 0.0)) throw std::invalid_argument("refractory must be >= 0");
}

ResolvedTrigger resolve_trigger(const SampleFrame& frame, const TriggerConfig& cfg) {
  ResolvedTrigger t;
  double lo = 0.0;
  double hi = 0.0;
  if (!frame.empty()) {
    const auto [mn, mx] = std::minmax_element(frame.values.begin(), frame.values.end());
    lo = *mn;
    hi = *mx;
  }
  t.level = cfg.trigger_level.value_or((lo + hi) / 2.0);
  t.band = cfg.band_epsilon.value_or(0.02 * (hi - lo));
  return t;
}

namespace {

std::vector<EdgeEvent> detect_edges(const SampleFrame& frame, const TriggerConfig& cfg,
                                    EdgeKind kind) {
  cfg.validate();
  std::vector<EdgeEvent> edges;
  const auto& v = frame.values;
  const std::size_t run = cfg.run_length;
  if (v.size() < run) return edges;

  const ResolvedTrigger trig = resolve_trigger(frame, cfg);
  const auto refractory =
      static_cast<std::size_t>(std::llround(cfg.refractory_s * frame.sample_rate));
  const bool rising = kind == EdgeKind::Rising;

  std::size_t i = cfg.start_index;
  while (i + run <= v.size()) {
    bool monotone = true;
    for (std::size_t j = i + 1; j < i + run && monotone; ++j) {
      monotone = rising ? v[j] >= v[j - 1] : v[j] <= v[j - 1];
    }
    const double first = v[i];
    const double last = v[i + run - 1];
    const std::size_t mid = i + run / 2;
    const bool net_change = rising ? last > first : last < first;
    // Near the trigger: the run crosses the level, or its middle sample sits
    // inside the band.
    const bool crosses = rising ? (first <= trig.level && trig.level <= last)
                                : (first >= trig.level && trig.level >= last);
    const bool near = crosses || std::abs(v[mid] - trig.level) <= trig.band;
    if (monotone && net_change && near) {
      edges.push_back({mid, frame.time_at(mid), kind});
      i = std::max(i + run, mid + refractory);
    } else {
      ++i;
    }
  }
  return edges;
}

}  // namespace

std::vector<EdgeEvent> detect_rising_edges(const SampleFrame& frame, const TriggerConfig& cfg) {
  return detect_edges(frame, cfg, EdgeKind::Rising);
}

std::vector<EdgeEvent> detect_falling_edges(const SampleFrame& frame, const TriggerConfig& cfg) {
  return detect_edges(frame, cfg, EdgeKind::Falling);
}

HeartRateReading heart_rate_from_edges(const std::vector<EdgeEvent>& edges, double sample_rate) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  std::vector<EdgeEvent> rising;
  std::copy_if(edges.begin(), edges.end(), std::back_inserter(rising),
               [](const EdgeEvent& e) { return e.kind == EdgeKind::Rising; });
  if (rising.size() < 2) {
    throw InsufficientData("heart rate needs at least two rising edges, got " +
                           std::to_string(rising.size()));
  }

  auto period_of = [sample_rate](const EdgeEvent& a, const EdgeEvent& b) {
    return (static_cast<double>(b.sample_index) - static_cast<double>(a.sample_index)) / sample_rate;
  };

  HeartRateReading reading;
  reading.first = rising[rising.size() - 2];
  reading.second = rising.back();
  reading.period_s = period_of(reading.first, reading.second);
  if (!(reading.period_s > 0.0)) throw std::invalid_argument("edges must be strictly increasing");
  reading.bpm = 60.0 / reading.period_s;
  reading.edge_count = rising.size();

  if (rising.size() > 2) {
    std::vector<double> periods;
    for (std::size_t k = 1; k < rising.size(); ++k) periods.push_back(period_of(rising[k - 1], rising[k]));
    const std::size_t m = periods.size() / 2;
    std::nth_element(periods.begin(), periods.begin() + static_cast<std::ptrdiff_t>(m), periods.end());
    double median = periods[m];
    if (periods.size() % 2 == 0) {
      median = (median + *std::max_element(periods.begin(), periods.begin() + static_cast<std::ptrdiff_t>(m))) / 2.0;
    }
    reading.median_period_s = median;
  }
  return reading;
}

}  // namespace ecgmon
