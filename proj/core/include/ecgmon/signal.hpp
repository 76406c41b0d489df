#pragma once

#include <array>
#include <cstdint>

#include "ecgmon/frame.hpp"

namespace ecgmon {

// One Gaussian bump of the beat template. Center and width are fractions of
// the beat period; amplitude is in millivolts.
struct EcgWave {
  double amplitude_mv = 0.0;
  double center = 0.0;
  double width = 0.0;
};

// P, Q, R, S, T in that order.
struct EcgTemplateParams {
  std::array<EcgWave, 5> waves{{
      {0.12, 0.18, 0.040},
      {-0.08, 0.36, 0.012},
      {0.80, 0.40, 0.022},
      {-0.15, 0.44, 0.015},
      {0.30, 0.66, 0.080},
  }};

  const EcgWave& r_wave() const noexcept { return waves[2]; }
  void validate() const;
};

struct NoiseConfig {
  double mains_amplitude_mv = 0.0;
  double mains_freq_hz = 50.0;
  double wander_amplitude_mv = 0.0;
  double wander_freq_hz = 0.2;
  double emg_sigma_mv = 0.0;
  double dc_offset_mv = 0.0;
  double common_mode_amplitude_mv = 0.0;
  double common_mode_freq_hz = 50.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// Electrode-level signal: differential ECG plus the common-mode pickup that the
// front end has to reject. Both frames are in millivolts.
struct SourceSignal {
  SampleFrame differential;
  SampleFrame common_mode;

  void validate() const;
};

// Periodic sum-of-Gaussians ECG with beat period 60/bpm seconds.
SampleFrame generate_ecg(const EcgTemplateParams& params, double bpm, double sample_rate,
                         double duration);

// values[n] = amplitude * sin(2*pi*freq*n/sample_rate), in millivolts.
SampleFrame generate_sine(double freq, double amplitude_mv, double sample_rate, double duration);

// Adds mains, baseline wander, seeded EMG noise and DC offset to `src` and
// synthesizes the common-mode channel.
SourceSignal add_noise(const SampleFrame& src, const NoiseConfig& cfg);

}  // namespace ecgmon
