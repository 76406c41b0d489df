#include "ecgmon/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ecgmon/rng.hpp"

namespace ecgmon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

double rc_cutoff(double r, double c) { return 1.0 / (kTwoPi * r * c); }

}  // namespace

void ComponentValues::validate() const {
  for (double v : {r1, r2, r3, r4, r5, r7, r_hp, c2, r15, c3, r31, r27, c5, c7, ra, rb}) {
    require_positive(v, "component value");
  }
}

double instrument_gain(const ComponentValues& c) {
  const double input_sum = c.r1 + c.r2;
  if (input_sum == 0.0 || c.r5 == 0.0) {
    throw std::invalid_argument("instrument gain: zero denominator (R1+R2 or R5)");
  }
  return (1.0 + (c.r3 + c.r4) / input_sum) * (c.r7 / c.r5);
}

double voltage_gain(const ComponentValues& c) {
  if (c.rb == 0.0) throw std::invalid_argument("voltage gain: zero denominator (Rb)");
  return 1.0 + c.ra / c.rb;
}

double highpass_cutoff(double c2_farad, double r_hp_ohm) {
  require_positive(c2_farad, "C2");
  require_positive(r_hp_ohm, "R_hp");
  return rc_cutoff(r_hp_ohm, c2_farad);
}

double lowpass_cutoff(double c3_farad, double r15_ohm) {
  require_positive(c3_farad, "C3");
  require_positive(r15_ohm, "R15");
  return rc_cutoff(r15_ohm, c3_farad);
}

double notch_center(double r31_ohm, double c5_farad, double r27_ohm, double c7_farad) {
  require_positive(r31_ohm, "R31");
  require_positive(c5_farad, "C5");
  require_positive(r27_ohm, "R27");
  require_positive(c7_farad, "C7");
  return std::sqrt(rc_cutoff(r31_ohm, c5_farad) * rc_cutoff(r27_ohm, c7_farad));
}

std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::Highpass: return "highpass";
    case StageKind::Lowpass: return "lowpass";
    case StageKind::Notch: return "notch";
  }
  return "?";
}

void FrontEndSpec::validate() const {
  require_positive(instrument_gain, "instrument_gain");
  require_positive(voltage_gain, "voltage_gain");
  require_positive(f_ch, "f_ch");
  require_positive(f_cl, "f_cl");
  require_positive(f_0, "f_0");
  require_positive(notch_q, "notch_q");
  if (!(f_ch < f_cl)) throw std::invalid_argument("front end requires f_ch < f_cl");
  if (!(f_ch < f_0 && f_0 < f_cl)) throw std::invalid_argument("front end requires f_ch < f_0 < f_cl");
  if (!std::isfinite(cmrr_db)) throw std::invalid_argument("cmrr_db must be finite");
  if (!(lift_bias >= 0.0 && lift_bias <= 3.3)) {
    throw std::invalid_argument("lift_bias must lie in [0, 3.3] V");
  }
  if (!(clip_low < clip_high)) throw std::invalid_argument("clip_low must be below clip_high");
  if (!(input_noise_rms_v >= 0.0)) throw std::invalid_argument("input_noise_rms_v must be >= 0");
  auto order = stage_order;
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw std::invalid_argument("stage_order must list each stage exactly once");
  }
}

FrontEndSpec FrontEndSpec::from_components(const ComponentValues& c) {
  c.validate();
  FrontEndSpec spec;
  spec.instrument_gain = ecgmon::instrument_gain(c);
  spec.voltage_gain = ecgmon::voltage_gain(c);
  spec.f_ch = highpass_cutoff(c.c2, c.r_hp);
  spec.f_cl = lowpass_cutoff(c.c3, c.r15);
  spec.f_0 = notch_center(c.r31, c.c5, c.r27, c.c7);
  return spec;
}

FrontEndSpec FrontEndSpec::bench_tuned() {
  FrontEndSpec spec;
  spec.instrument_gain = 22.0;
  spec.voltage_gain = 75.0;
  spec.f_ch = 0.18;
  spec.f_cl = 70.2;
  spec.f_0 = 49.79;
  spec.cmrr_db = 93.16;
  return spec;
}

DiscretizedFilter::DiscretizedFilter(std::array<double, 3> b, std::array<double, 2> a,
                                     double sample_rate)
    : b_(b), a_(a), sample_rate_(sample_rate) {
  require_positive(sample_rate, "sample_rate");
}

std::complex<double> DiscretizedFilter::response(double freq_hz) const {
  const std::complex<double> z1 = std::polar(1.0, -kTwoPi * freq_hz / sample_rate_);
  const std::complex<double> z2 = z1 * z1;
  return (b_[0] + b_[1] * z1 + b_[2] * z2) / (1.0 + a_[0] * z1 + a_[1] * z2);
}

std::array<std::complex<double>, 2> DiscretizedFilter::poles() const {
  // Roots of z^2 + a1 z + a2.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a_[0] * a_[0] - 4.0 * a_[1]));
  return {(-a_[0] + disc) / 2.0, (-a_[0] - disc) / 2.0};
}

bool DiscretizedFilter::is_stable() const {
  const auto p = poles();
  return std::abs(p[0]) < 1.0 && std::abs(p[1]) < 1.0;
}

DiscretizedFilter discretize(StageKind kind, const FrontEndSpec& spec, double sample_rate) {
  require_positive(sample_rate, "sample_rate");
  const double nyquist = sample_rate / 2.0;
  const double freq = kind == StageKind::Highpass  ? spec.f_ch
                      : kind == StageKind::Lowpass ? spec.f_cl
                                                   : spec.f_0;
  require_positive(freq, "stage frequency");
  if (freq >= nyquist) {
    throw std::invalid_argument(std::string(to_string(kind)) +
                                " frequency must be below the Nyquist frequency");
  }
  // Prewarped bilinear transform: the analog prototype normalised to its
  // characteristic frequency maps s -> (1/k)(1 - z^-1)/(1 + z^-1).
  const double k = std::tan(std::numbers::pi * freq / sample_rate);
  switch (kind) {
    case StageKind::Highpass: {
      const double norm = 1.0 / (1.0 + k);
      return DiscretizedFilter({norm, -norm, 0.0}, {(k - 1.0) * norm, 0.0}, sample_rate);
    }
    case StageKind::Lowpass: {
      const double norm = 1.0 / (1.0 + k);
      return DiscretizedFilter({k * norm, k * norm, 0.0}, {(k - 1.0) * norm, 0.0}, sample_rate);
    }
    case StageKind::Notch: {
      require_positive(spec.notch_q, "notch_q");
      const double k2 = k * k;
      const double a0 = 1.0 + k / spec.notch_q + k2;
      const double b0 = (1.0 + k2) / a0;
      const double b1 = 2.0 * (k2 - 1.0) / a0;
      return DiscretizedFilter({b0, b1, b0}, {b1, (1.0 - k / spec.notch_q + k2) / a0},
                               sample_rate);
    }
  }
  throw std::invalid_argument("unknown stage kind");
}

FrontEnd::FrontEnd(const FrontEndSpec& spec, double sample_rate)
    : spec_(spec),
      sample_rate_(sample_rate),
      cm_attenuation_(std::pow(10.0, -spec.cmrr_db / 20.0)) {
  spec_.validate();
  require_positive(sample_rate, "sample_rate");
  for (StageKind kind : spec_.stage_order) {
    if (kind == StageKind::Notch && !spec_.notch_enabled) continue;
    stages_.push_back(discretize(kind, spec_, sample_rate));
  }
}

double FrontEnd::process_unclipped(double differential_mv, double common_mode_mv) noexcept {
  double x = (differential_mv + common_mode_mv * cm_attenuation_) * 1e-3;
  for (auto& stage : stages_) x = stage.process(x);
  return spec_.lift_bias + spec_.chain_gain() * x;
}

FrontEndOutput FrontEnd::run(const SourceSignal& sig) {
  sig.validate();
  if (sig.differential.sample_rate != sample_rate_) {
    throw std::invalid_argument("signal sample rate does not match the front end");
  }
  FrontEndOutput out;
  out.frame = SampleFrame(sample_rate_, Unit::Volt, std::vector<double>(sig.differential.size()),
                          sig.differential.start_time);
  const auto& diff = sig.differential.values;
  const auto& cm = sig.common_mode.values;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double y = process_unclipped(diff[i], cm[i]);
    const double clipped = std::clamp(y, spec_.clip_low, spec_.clip_high);
    if (clipped != y) ++out.clipped_samples;
    out.frame.values[i] = clipped;
  }
  out.saturated = out.clipped_samples > 0;
  return out;
}

void FrontEnd::reset() noexcept {
  for (auto& stage : stages_) stage.reset();
}

std::complex<double> FrontEnd::response(double freq_hz) const {
  std::complex<double> h = spec_.chain_gain();
  for (const auto& stage : stages_) h *= stage.response(freq_hz);
  return h;
}

FrontEndOutput apply_frontend(const SourceSignal& sig, const FrontEndSpec& spec, double sample_rate) {
  FrontEnd chain(spec, sample_rate);
  return chain.run(sig);
}

namespace {

// Samples needed for the slowest pole of the chain to decay by e^-12.
std::size_t settle_samples(const FrontEndSpec& spec, double sample_rate) {
  double tau = 1.0 / (kTwoPi * spec.f_ch);
  tau = std::max(tau, 1.0 / (kTwoPi * spec.f_cl));
  if (spec.notch_enabled) tau = std::max(tau, spec.notch_q / (std::numbers::pi * spec.f_0));
  return static_cast<std::size_t>(std::ceil(12.0 * tau * sample_rate));
}

// Least-squares fit of a*sin + b*cos + c over the window; returns sqrt(a^2+b^2).
double fit_amplitude(const std::vector<double>& y, std::size_t first, double omega) {
  double ss = 0, sc = 0, s1 = 0, cc = 0, c1 = 0, n = 0, ys = 0, yc = 0, y1 = 0;
  for (std::size_t i = first; i < y.size(); ++i) {
    const double s = std::sin(omega * static_cast<double>(i));
    const double c = std::cos(omega * static_cast<double>(i));
    ss += s * s; sc += s * c; s1 += s; cc += c * c; c1 += c; n += 1.0;
    ys += y[i] * s; yc += y[i] * c; y1 += y[i];
  }
  // Solve the 3x3 normal equations by Cramer's rule.
  const double m[3][3] = {{ss, sc, s1}, {sc, cc, c1}, {s1, c1, n}};
  const double r[3] = {ys, yc, y1};
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(m);
  double coef[2];
  for (int col = 0; col < 2; ++col) {
    double mc[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) mc[i][j] = (j == col) ? r[i] : m[i][j];
    }
    coef[col] = det3(mc) / det;
  }
  return std::hypot(coef[0], coef[1]);
}

constexpr double kDifferentialProbeMv = 0.2;
constexpr double kCommonModeProbeMv = 100.0;

}  // namespace

double measure_gain(const FrontEndSpec& spec, double sample_rate, double freq_hz, bool common_mode) {
  require_positive(freq_hz, "probe frequency");
  if (freq_hz >= sample_rate / 2.0) {
    throw std::invalid_argument("probe frequency must be below the Nyquist frequency");
  }
  FrontEnd chain(spec, sample_rate);
  const std::size_t settle = settle_samples(spec, sample_rate);
  const double cycles = std::max(4.0, std::ceil(2.0 * freq_hz));
  const auto window = static_cast<std::size_t>(std::llround(cycles * sample_rate / freq_hz));
  const double omega = kTwoPi * freq_hz / sample_rate;
  // Keep the probe linear even if the chain passed it at full gain, so a poor
  // CMRR setting cannot clip its own measurement.
  const double headroom_v = std::min(spec.lift_bias - spec.clip_low, spec.clip_high - spec.lift_bias);
  const double linear_limit_mv = 0.8 * headroom_v / spec.chain_gain() * 1e3;
  const double amp_mv =
      std::min(common_mode ? kCommonModeProbeMv : kDifferentialProbeMv, linear_limit_mv);

  std::vector<double> y(settle + window);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = amp_mv * std::sin(omega * static_cast<double>(i));
    const double v = common_mode ? chain.process_unclipped(0.0, x) : chain.process_unclipped(x, 0.0);
    y[i] = std::clamp(v, spec.clip_low, spec.clip_high);
  }
  return fit_amplitude(y, settle, omega) / (amp_mv * 1e-3);
}

namespace {

// Log-domain bisection for the frequency where the gain crosses `target`;
// `above` must have gain above target and `below` gain below it.
double bisect_crossing(const FrontEndSpec& spec, double sample_rate, double target, double above,
                       double below) {
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = std::sqrt(above * below);
    if (measure_gain(spec, sample_rate, mid) > target) {
      above = mid;
    } else {
      below = mid;
    }
    if (std::abs(std::log(above / below)) < 1e-6) break;
  }
  return std::sqrt(above * below);
}

}  // namespace

MetricsReport measure_metrics(const FrontEndSpec& spec, double sample_rate) {
  spec.validate();
  MetricsReport report;

  constexpr double kMidBandHz = 10.0;
  report.differential_gain = measure_gain(spec, sample_rate, kMidBandHz);
  report.common_mode_gain = measure_gain(spec, sample_rate, kMidBandHz, true);
  report.cmrr_db = 20.0 * std::log10(report.differential_gain / report.common_mode_gain);

  // Band edges are taken on the chain with the notch bypassed; its stopband is
  // not a band edge. Reference level is the response peak of the first-order
  // high-pass/low-pass pair at the geometric centre of the band.
  FrontEndSpec band_spec = spec;
  band_spec.notch_enabled = false;
  const double f_ref = std::sqrt(spec.f_ch * spec.f_cl);
  const double target = measure_gain(band_spec, sample_rate, f_ref) * kInvSqrt2;

  double low_above = f_ref;
  double low_below = spec.f_ch;
  for (int i = 0; i < 40 && measure_gain(band_spec, sample_rate, low_below) > target; ++i) {
    low_above = low_below;
    low_below /= 2.0;
  }
  report.bandwidth_low = bisect_crossing(band_spec, sample_rate, target, low_above, low_below);

  const double f_max = 0.49 * sample_rate;
  double high_above = f_ref;
  double high_below = std::min(spec.f_cl, f_max);
  for (int i = 0; i < 40 && measure_gain(band_spec, sample_rate, high_below) > target; ++i) {
    if (high_below >= f_max) {
      throw std::runtime_error("upper -3 dB point lies above the Nyquist frequency");
    }
    high_above = high_below;
    high_below = std::min(high_below * 1.25, f_max);
  }
  report.bandwidth_high = bisect_crossing(band_spec, sample_rate, target, high_above, high_below);
  report.bw = report.bandwidth_high - report.bandwidth_low;

  report.mains_attenuation_db = 20.0 * std::log10(measure_gain(spec, sample_rate, 50.0) /
                                                  measure_gain(spec, sample_rate, 20.0));
  report.input_impedance = spec.input_impedance_ohm;

  // Short-circuit noise: no differential signal, only the input-referred noise.
  FrontEnd chain(spec, sample_rate);
  SeededRng rng(spec.noise_seed);
  const std::size_t settle = settle_samples(spec, sample_rate);
  const auto run = settle + static_cast<std::size_t>(std::llround(10.0 * sample_rate));
  double peak = 0.0;
  for (std::size_t i = 0; i < run; ++i) {
    const double noise_mv = spec.input_noise_rms_v * 1e3 * rng.gaussian();
    const double y = std::clamp(chain.process_unclipped(noise_mv, 0.0), spec.clip_low, spec.clip_high);
    if (i >= settle) peak = std::max(peak, std::abs(y - spec.lift_bias));
  }
  report.equiv_input_noise = peak / report.differential_gain;
  return report;
}

std::vector<ResponsePoint> frequency_response(const FrontEndSpec& spec, double sample_rate,
                                              const std::vector<double>& freqs) {
  FrontEnd chain(spec, sample_rate);
  std::vector<ResponsePoint> points;
  points.reserve(freqs.size());
  for (double f : freqs) points.push_back({f, 20.0 * std::log10(std::abs(chain.response(f)))});
  return points;
}

std::vector<double> log_spaced(double f_lo, double f_hi, std::size_t count) {
  require_positive(f_lo, "f_lo");
  if (!(f_hi > f_lo)) throw std::invalid_argument("f_hi must exceed f_lo");
  if (count < 2) return {f_lo};
  std::vector<double> out(count);
  const double step = std::log(f_hi / f_lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = f_lo * std::exp(step * static_cast<double>(i));
  return out;
}

}  // namespace ecgmon
