#include "ecgmon/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ecgmon/rng.hpp"

namespace ecgmon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double sample_rate, double duration) {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be >= 0");
  }
}

}  // namespace

void EcgTemplateParams::validate() const {
  for (std::size_t i = 0; i < waves.size(); ++i) {
    if (!(waves[i].width > 0.0)) throw std::invalid_argument("ECG wave widths must be > 0");
    if (!std::isfinite(waves[i].amplitude_mv)) {
      throw std::invalid_argument("ECG wave amplitude must be finite");
    }
    if (i > 0 && !(waves[i].center > waves[i - 1].center)) {
      throw std::invalid_argument("ECG wave centers must be strictly increasing (P,Q,R,S,T)");
    }
  }
  if (waves.front().center < 0.0 || waves.back().center > 1.0) {
    throw std::invalid_argument("ECG wave centers must lie in [0, 1]");
  }
  if (!(r_wave().amplitude_mv >= 0.0)) throw std::invalid_argument("R amplitude must not be negative");
}

void NoiseConfig::validate() const {
  require_non_negative(mains_amplitude_mv, "mains_amplitude_mv");
  require_non_negative(wander_amplitude_mv, "wander_amplitude_mv");
  require_non_negative(emg_sigma_mv, "emg_sigma_mv");
  require_non_negative(common_mode_amplitude_mv, "common_mode_amplitude_mv");
  require_non_negative(mains_freq_hz, "mains_freq_hz");
  require_non_negative(wander_freq_hz, "wander_freq_hz");
  require_non_negative(common_mode_freq_hz, "common_mode_freq_hz");
  if (!std::isfinite(dc_offset_mv)) throw std::invalid_argument("dc_offset_mv must be finite");
}

void SourceSignal::validate() const {
  differential.validate();
  common_mode.validate();
  if (differential.sample_rate != common_mode.sample_rate ||
      differential.size() != common_mode.size()) {
    throw std::invalid_argument("differential and common-mode frames must match in rate and length");
  }
}

SampleFrame generate_ecg(const EcgTemplateParams& params, double bpm, double sample_rate,
                         double duration) {
  require_positive(bpm, "bpm");
  require_positive(sample_rate, "sample_rate");
  require_positive(duration, "duration");
  if (sample_rate < 4.0 * bpm / 60.0) {
    throw std::invalid_argument("sample_rate must be at least 4x the beat frequency");
  }
  params.validate();

  const double period = 60.0 / bpm;
  const std::size_t n = sample_count(sample_rate, duration);
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double beats = static_cast<double>(i) / sample_rate / period;
    const double phase = beats - std::floor(beats);
    double v = 0.0;
    for (const auto& w : params.waves) {
      // Neighbouring beats contribute the tails that wrap across the boundary.
      for (int k = -1; k <= 1; ++k) {
        const double d = (phase - w.center - k) / w.width;
        v += w.amplitude_mv * std::exp(-0.5 * d * d);
      }
    }
    values[i] = v;
  }
  return SampleFrame(sample_rate, Unit::Millivolt, std::move(values));
}

SampleFrame generate_sine(double freq, double amplitude_mv, double sample_rate, double duration) {
  require_positive(sample_rate, "sample_rate");
  require_positive(duration, "duration");
  require_non_negative(freq, "freq");
  if (!std::isfinite(amplitude_mv)) throw std::invalid_argument("amplitude must be finite");
  if (freq >= sample_rate / 2.0) {
    throw std::invalid_argument("sine frequency must be below the Nyquist frequency");
  }
  const std::size_t n = sample_count(sample_rate, duration);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = amplitude_mv * std::sin(kTwoPi * freq * static_cast<double>(i) / sample_rate);
  }
  return SampleFrame(sample_rate, Unit::Millivolt, std::move(values));
}

SourceSignal add_noise(const SampleFrame& src, const NoiseConfig& cfg) {
  src.validate();
  cfg.validate();
  SeededRng rng(cfg.rng_seed);

  SourceSignal out;
  out.differential = src;
  out.common_mode = SampleFrame(src.sample_rate, src.unit, std::vector<double>(src.size(), 0.0),
                                src.start_time);
  auto& diff = out.differential.values;
  auto& cm = out.common_mode.values;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double t = src.time_at(i);
    double noise = cfg.dc_offset_mv;
    if (cfg.mains_amplitude_mv > 0.0) {
      noise += cfg.mains_amplitude_mv * std::sin(kTwoPi * cfg.mains_freq_hz * t);
    }
    if (cfg.wander_amplitude_mv > 0.0) {
      noise += cfg.wander_amplitude_mv * std::sin(kTwoPi * cfg.wander_freq_hz * t);
    }
    if (cfg.emg_sigma_mv > 0.0) noise += cfg.emg_sigma_mv * rng.gaussian();
    diff[i] += noise;
    if (cfg.common_mode_amplitude_mv > 0.0) {
      cm[i] = cfg.common_mode_amplitude_mv * std::sin(kTwoPi * cfg.common_mode_freq_hz * t);
    }
  }
  return out;
}

}  // namespace ecgmon
