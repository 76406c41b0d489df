#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ecgmon/frame.hpp"
#include "ecgmon/signal.hpp"

namespace ecgmon {

// Resistor (ohm) and capacitor (farad) values of the acquisition board.
struct ComponentValues {
  // Instrumentation amplifier: two-op-amp input stage plus difference stage.
  double r1 = 5e3, r2 = 5e3, r3 = 50e3, r4 = 50e3, r5 = 10e3, r7 = 20e3;
  // High-pass RC.
  double r_hp = 100.47e3;
  double c2 = 22e-6;
  // Low-pass RC.
  double r15 = 22.5e3;
  double c3 = 100e-9;
  // Notch legs.
  double r31 = 31.96e3, r27 = 31.96e3;
  double c5 = 100e-9, c7 = 100e-9;
  // Post-amplifier, gain = 1 + ra/rb.
  double ra = 74e3, rb = 1e3;

  void validate() const;
};

double instrument_gain(const ComponentValues& c);
double highpass_cutoff(double c2_farad, double r_hp_ohm);
double lowpass_cutoff(double c3_farad, double r15_ohm);
double notch_center(double r31_ohm, double c5_farad, double r27_ohm, double c7_farad);
double voltage_gain(const ComponentValues& c);

enum class StageKind { Highpass, Lowpass, Notch };
std::string_view to_string(StageKind kind);

struct FrontEndSpec {
  double instrument_gain = 22.0;
  double voltage_gain = 75.0;
  double f_ch = 0.072;   // Hz
  double f_cl = 70.73;   // Hz
  double f_0 = 49.79;    // Hz
  double notch_q = 5.0;
  bool notch_enabled = true;
  double cmrr_db = 93.16;
  double lift_bias = 1.65;  // V
  double clip_low = 0.0;    // V
  double clip_high = 3.3;   // V
  std::array<StageKind, 3> stage_order{StageKind::Notch, StageKind::Lowpass, StageKind::Highpass};
  // Declared, never simulated.
  double input_impedance_ohm = 13.2e6;
  // Input-referred white noise used by the short-circuit noise run.
  double input_noise_rms_v = 6.5e-6;
  std::uint64_t noise_seed = 7;

  double chain_gain() const noexcept { return instrument_gain * voltage_gain; }
  void validate() const;

  // Nominal design values derived from the component formulas.
  static FrontEndSpec from_components(const ComponentValues& c);
  // Board as characterised on the bench: gain 1650, 0.18-70.2 Hz, 93.16 dB CMRR.
  static FrontEndSpec bench_tuned();
};

// Second-order section in difference-equation form:
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
// First-order stages leave b2 = a2 = 0.
class DiscretizedFilter {
 public:
  DiscretizedFilter() = default;
  DiscretizedFilter(std::array<double, 3> b, std::array<double, 2> a, double sample_rate);

  double process(double x) noexcept {
    const double y = b_[0] * x + s1_;
    s1_ = b_[1] * x - a_[0] * y + s2_;
    s2_ = b_[2] * x - a_[1] * y;
    return y;
  }
  void reset() noexcept { s1_ = s2_ = 0.0; }

  const std::array<double, 3>& b() const noexcept { return b_; }
  const std::array<double, 2>& a() const noexcept { return a_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::array<double, 2> state() const noexcept { return {s1_, s2_}; }

  std::complex<double> response(double freq_hz) const;
  std::array<std::complex<double>, 2> poles() const;
  bool is_stable() const;

 private:
  std::array<double, 3> b_{1.0, 0.0, 0.0};
  std::array<double, 2> a_{0.0, 0.0};
  double sample_rate_ = 1.0;
  // Transposed direct form II state.
  double s1_ = 0.0;
  double s2_ = 0.0;
};

// Bilinear transform prewarped at the stage's characteristic frequency.
DiscretizedFilter discretize(StageKind kind, const FrontEndSpec& spec, double sample_rate);

struct FrontEndOutput {
  SampleFrame frame;  // volts
  bool saturated = false;
  std::size_t clipped_samples = 0;
};

// Stateful chain: right-leg-drive common-mode attenuation, the filter stages in
// spec order, gain, lift and rail clipping. Input in millivolts, output in volts.
class FrontEnd {
 public:
  FrontEnd(const FrontEndSpec& spec, double sample_rate);

  // One sample through the chain before clipping.
  double process_unclipped(double differential_mv, double common_mode_mv) noexcept;
  FrontEndOutput run(const SourceSignal& sig);
  void reset() noexcept;

  const FrontEndSpec& spec() const noexcept { return spec_; }
  std::complex<double> response(double freq_hz) const;

 private:
  FrontEndSpec spec_;
  double sample_rate_;
  double cm_attenuation_;
  std::vector<DiscretizedFilter> stages_;
};

FrontEndOutput apply_frontend(const SourceSignal& sig, const FrontEndSpec& spec, double sample_rate);

struct MetricsReport {
  double differential_gain = 0.0;
  double common_mode_gain = 0.0;
  double cmrr_db = 0.0;
  double bandwidth_low = 0.0;   // Hz
  double bandwidth_high = 0.0;  // Hz
  double bw = 0.0;              // Hz
  double mains_attenuation_db = 0.0;
  double input_impedance = 0.0;    // ohm
  double equiv_input_noise = 0.0;  // V
};

// Amplitude gain of the simulated chain for a sine probe at `freq_hz`.
// `common_mode` drives the common-mode input instead of the differential one.
double measure_gain(const FrontEndSpec& spec, double sample_rate, double freq_hz,
                    bool common_mode = false);

MetricsReport measure_metrics(const FrontEndSpec& spec, double sample_rate);

struct ResponsePoint {
  double freq_hz;
  double mag_db;
};
// Analytic magnitude of the discretized chain including gain.
std::vector<ResponsePoint> frequency_response(const FrontEndSpec& spec, double sample_rate,
                                              const std::vector<double>& freqs);
std::vector<double> log_spaced(double f_lo, double f_hi, std::size_t count);

}  // namespace ecgmon
