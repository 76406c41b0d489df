#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ecgmon/frontend.hpp"
#include "oracles.hpp"

namespace ecgmon {
namespace {

using oracle::kPi;

// R for a given RC corner: hand inversion of f = 1/(2 pi R C).
double solve_r(double f, double c) { return 1.0 / (2.0 * kPi * f * c); }

ComponentValues gain22_components() {
  ComponentValues c;
  c.r3 = c.r4 = 50e3;
  c.r1 = c.r2 = 5e3;
  c.r7 = 20e3;
  c.r5 = 10e3;
  return c;
}

TEST(InstrumentGain, ReproducesTwentyTwo) {
  EXPECT_DOUBLE_EQ(instrument_gain(gain22_components()), 22.0);
}

TEST(InstrumentGain, CollapsedFirstStageAndSymmetricCase) {
  ComponentValues c = gain22_components();
  c.r3 = c.r4 = 1e-12;
  EXPECT_NEAR(instrument_gain(c), c.r7 / c.r5, 1e-12);
  c.r3 = c.r1;
  c.r4 = c.r2;
  c.r7 = c.r5;
  EXPECT_DOUBLE_EQ(instrument_gain(c), 2.0);
}

TEST(InstrumentGain, ZeroDenominatorRejected) {
  ComponentValues c = gain22_components();
  c.r1 = c.r2 = 0.0;
  EXPECT_THROW(instrument_gain(c), std::invalid_argument);
  c = gain22_components();
  c.r5 = 0.0;
  EXPECT_THROW(instrument_gain(c), std::invalid_argument);
}

TEST(Cutoffs, SolvedComponentsReproduceDesignFrequencies) {
  const double c2 = 22e-6;
  EXPECT_NEAR(highpass_cutoff(c2, solve_r(0.072, c2)), 0.072, 0.005 * 0.072);
  const double c3 = 100e-9;
  EXPECT_NEAR(lowpass_cutoff(c3, solve_r(70.73, c3)), 70.73, 0.005 * 70.73);
  const double c = 100e-9;
  const double r = solve_r(49.79, c);
  EXPECT_NEAR(notch_center(r, c, r, c), 49.79, 0.005 * 49.79);
}

TEST(Cutoffs, DefaultBoardComponentsMatchDesign) {
  const auto spec = FrontEndSpec::from_components(ComponentValues{});
  EXPECT_DOUBLE_EQ(spec.instrument_gain, 22.0);
  EXPECT_DOUBLE_EQ(spec.chain_gain(), 1650.0);
  EXPECT_NEAR(spec.f_ch, 0.072, 0.005 * 0.072);
  EXPECT_NEAR(spec.f_cl, 70.73, 0.005 * 70.73);
  EXPECT_NEAR(spec.f_0, 49.79, 0.005 * 49.79);
}

TEST(Cutoffs, UnitRcAndScalingLaws) {
  const double r = 1.0 / (2.0 * kPi);
  EXPECT_NEAR(highpass_cutoff(1.0, r), 1.0, 1e-12);
  EXPECT_NEAR(lowpass_cutoff(1.0, r), 1.0, 1e-12);
  EXPECT_NEAR(highpass_cutoff(2e-6, 1e4) * 2.0, highpass_cutoff(1e-6, 1e4), 1e-12);
  EXPECT_NEAR(lowpass_cutoff(1e-7, 5e3), 2.0 * lowpass_cutoff(1e-7, 1e4), 1e-9);
  for (double k : {0.5, 3.0, 10.0}) {
    EXPECT_NEAR(lowpass_cutoff(1e-7 * k, 2e4 * k), lowpass_cutoff(1e-7, 2e4) / (k * k), 1e-9);
    EXPECT_NEAR(highpass_cutoff(1e-6, 1e5 * k), highpass_cutoff(1e-6, 1e5) / k, 1e-12);
  }
}

TEST(Cutoffs, NotchGeometricMean) {
  const double c = 1e-7;
  EXPECT_NEAR(notch_center(solve_r(40, c), c, solve_r(40, c), c), 40.0, 1e-9);
  EXPECT_NEAR(notch_center(solve_r(25, c), c, solve_r(100, c), c), 50.0, 1e-9);
}

TEST(Cutoffs, NonPositiveRejected) {
  EXPECT_THROW(highpass_cutoff(0.0, 1e3), std::invalid_argument);
  EXPECT_THROW(lowpass_cutoff(1e-6, -1.0), std::invalid_argument);
  EXPECT_THROW(notch_center(1e3, 1e-6, 0.0, 1e-6), std::invalid_argument);
}

TEST(Discretize, HighpassRejectsDc) {
  auto hp = discretize(StageKind::Highpass, FrontEndSpec::bench_tuned(), 500);
  double y = 1.0;
  for (int i = 0; i < 500 * 60; ++i) y = hp.process(1.0);
  EXPECT_LT(std::abs(y), 1e-6);
  EXPECT_NEAR(std::abs(oracle::biquad_response(hp.b(), hp.a(), 0.0, 500)), 0.0, 1e-15);
}

TEST(Discretize, LowpassIsThreeDbDownAtCutoff) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto lp = discretize(StageKind::Lowpass, spec, 500);
  const double mag_db = oracle::db(std::abs(oracle::biquad_response(lp.b(), lp.a(), spec.f_cl, 500)));
  EXPECT_NEAR(mag_db, -3.0103, 0.2);
  EXPECT_NEAR(std::abs(lp.response(spec.f_cl)),
              std::abs(oracle::biquad_response(lp.b(), lp.a(), spec.f_cl, 500)), 1e-12);
}

TEST(Discretize, NotchDepthAndPassband) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto notch = discretize(StageKind::Notch, spec, 500);
  const double at_center = std::abs(oracle::biquad_response(notch.b(), notch.a(), spec.f_0, 500));
  EXPECT_LE(oracle::db(std::max(at_center, 1e-300)), -30.0);
  EXPECT_GE(oracle::db(std::abs(oracle::biquad_response(notch.b(), notch.a(), 20.0, 500))), -1.0);
  EXPECT_NEAR(std::abs(oracle::biquad_response(notch.b(), notch.a(), 0.0, 500)), 1.0, 1e-12);
}

TEST(Discretize, NyquistRejected) {
  auto spec = FrontEndSpec::bench_tuned();
  EXPECT_THROW(discretize(StageKind::Lowpass, spec, 140.0), std::invalid_argument);
  EXPECT_THROW(discretize(StageKind::Notch, spec, 99.0), std::invalid_argument);
}

TEST(Discretize, StableForRandomAdmissibleSpecs) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> log_u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    FrontEndSpec spec;
    const double fs = 100.0 + 2000.0 * log_u(gen);
    spec.f_ch = 0.01 * std::pow(100.0, log_u(gen));           // 0.01 .. 1 Hz
    spec.f_cl = spec.f_ch * 4 + (0.45 * fs - spec.f_ch * 4) * log_u(gen);
    spec.f_0 = spec.f_ch + (spec.f_cl - spec.f_ch) * (0.05 + 0.9 * log_u(gen));
    spec.notch_q = 0.3 + 30.0 * log_u(gen);
    ASSERT_NO_THROW(spec.validate());
    for (StageKind k : {StageKind::Highpass, StageKind::Lowpass, StageKind::Notch}) {
      EXPECT_TRUE(discretize(k, spec, fs).is_stable()) << to_string(k) << " trial " << trial;
    }
  }
}

SourceSignal differential_only(const std::vector<double>& mv, double fs) {
  SourceSignal s;
  s.differential = SampleFrame(fs, Unit::Millivolt, mv);
  s.common_mode = SampleFrame(fs, Unit::Millivolt, std::vector<double>(mv.size(), 0.0));
  return s;
}

std::vector<double> sine_mv(double f, double amp, double fs, double seconds) {
  std::vector<double> v(static_cast<std::size_t>(std::llround(fs * seconds)));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs);
  return v;
}

double tail_peak_to_peak(const std::vector<double>& v, std::size_t from) {
  const auto [mn, mx] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(from), v.end());
  return *mx - *mn;
}

TEST(ApplyFrontend, ZeroInputSitsAtLiftBias) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto out = apply_frontend(differential_only(std::vector<double>(1000, 0.0), 500), spec, 500);
  for (double v : out.frame.values) EXPECT_DOUBLE_EQ(v, spec.lift_bias);
  EXPECT_FALSE(out.saturated);
  EXPECT_EQ(out.frame.unit, Unit::Volt);
}

TEST(ApplyFrontend, MidBandGainOf1650) {
  const auto spec = FrontEndSpec::bench_tuned();
  // 1 mV peak-to-peak at 10 Hz.
  const auto out = apply_frontend(differential_only(sine_mv(10, 0.5, 500, 40), 500), spec, 500);
  const double vpp = tail_peak_to_peak(out.frame.values, 500 * 30);
  EXPECT_NEAR(vpp, 1.65, 0.02 * 1.65);
  // Same figure from the analytic response of the discretized chain.
  FrontEnd chain(spec, 500);
  EXPECT_NEAR(vpp, 1e-3 * std::abs(chain.response(10.0)), 2e-3);
}

TEST(ApplyFrontend, CommonModeIsRejectedByCmrrAndNotch) {
  const auto spec = FrontEndSpec::bench_tuned();
  SourceSignal s = differential_only(std::vector<double>(500 * 40, 0.0), 500);
  s.common_mode.values = sine_mv(50, 100.0, 500, 40);  // 100 mV amplitude
  const auto out = apply_frontend(s, spec, 500);
  const double ripple = tail_peak_to_peak(out.frame.values, 500 * 30) / 2.0;
  const double bound = 100e-3 * spec.chain_gain() / std::pow(10.0, spec.cmrr_db / 20.0);
  EXPECT_LE(ripple, bound);
  // The notch takes it down by at least another order of magnitude.
  EXPECT_LE(ripple, 0.1 * bound);
}

TEST(ApplyFrontend, LinearBelowClipping) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto small = apply_frontend(differential_only(sine_mv(7, 0.1, 500, 30), 500), spec, 500);
  const auto twice = apply_frontend(differential_only(sine_mv(7, 0.2, 500, 30), 500), spec, 500);
  for (std::size_t i = 500 * 20; i < small.frame.size(); i += 37) {
    const double a = small.frame.values[i] - spec.lift_bias;
    const double b = twice.frame.values[i] - spec.lift_bias;
    EXPECT_NEAR(b, 2.0 * a, 0.01 * 0.165 + 1e-12);
  }
}

TEST(ApplyFrontend, ClipsToRailsAndFlags) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto out = apply_frontend(differential_only(sine_mv(10, 5.0, 500, 5), 500), spec, 500);
  EXPECT_TRUE(out.saturated);
  EXPECT_GT(out.clipped_samples, 0u);
  for (double v : out.frame.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 3.3);
  }
}

TEST(ApplyFrontend, StageOrderDoesNotChangeLinearResult) {
  auto spec = FrontEndSpec::bench_tuned();
  const auto input = differential_only(sine_mv(3, 0.3, 500, 10), 500);
  const auto a = apply_frontend(input, spec, 500);
  spec.stage_order = {StageKind::Highpass, StageKind::Notch, StageKind::Lowpass};
  const auto b = apply_frontend(input, spec, 500);
  for (std::size_t i = 0; i < a.frame.size(); ++i) EXPECT_NEAR(a.frame.values[i], b.frame.values[i], 1e-9);
}

TEST(FrontEndSpec, ValidationCatchesOrdering) {
  auto spec = FrontEndSpec::bench_tuned();
  spec.f_0 = 100.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = FrontEndSpec::bench_tuned();
  spec.lift_bias = 4.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = FrontEndSpec::bench_tuned();
  spec.stage_order = {StageKind::Notch, StageKind::Notch, StageKind::Highpass};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(MeasureGain, AgreesWithAnalyticResponse) {
  const auto spec = FrontEndSpec::bench_tuned();
  FrontEnd chain(spec, 500);
  for (double f : {0.1, 0.5, 5.0, 20.0, 45.0, 60.0, 90.0}) {
    const double analytic = std::abs(chain.response(f));
    EXPECT_NEAR(measure_gain(spec, 500, f), analytic, 0.002 * analytic + 1e-6) << f << " Hz";
  }
}

TEST(MeasureMetrics, BenchTunedChain) {
  const auto m = measure_metrics(FrontEndSpec::bench_tuned(), 500);
  EXPECT_NEAR(m.differential_gain, 1650.0, 0.02 * 1650.0);
  EXPECT_NEAR(m.cmrr_db, 93.16, 0.1);
  EXPECT_GE(m.bandwidth_low, 0.1);
  EXPECT_LE(m.bandwidth_low, 0.3);
  EXPECT_GE(m.bandwidth_high, 69.0);
  EXPECT_LE(m.bandwidth_high, 72.0);
  EXPECT_LE(m.mains_attenuation_db, -12.6);
  EXPECT_DOUBLE_EQ(m.input_impedance, 13.2e6);
  EXPECT_GT(m.equiv_input_noise, 0.0);
  EXPECT_LT(m.equiv_input_noise, 1e-4);
  // Defining formulas hold exactly on the reported values.
  EXPECT_DOUBLE_EQ(m.cmrr_db, 20.0 * std::log10(m.differential_gain / m.common_mode_gain));
  EXPECT_DOUBLE_EQ(m.bw, m.bandwidth_high - m.bandwidth_low);
}

TEST(MeasureMetrics, EqualGainsGiveZeroCmrr) {
  auto spec = FrontEndSpec::bench_tuned();
  spec.cmrr_db = 0.0;
  const auto m = measure_metrics(spec, 500);
  EXPECT_NEAR(m.common_mode_gain, m.differential_gain, 1e-6 * m.differential_gain);
  EXPECT_NEAR(m.cmrr_db, 0.0, 1e-6);
}

TEST(MeasureMetrics, NotchDisabledLeavesPlainLowpassRolloff) {
  auto spec = FrontEndSpec::bench_tuned();
  spec.notch_enabled = false;
  const auto m = measure_metrics(spec, 500);
  auto lp = [&](double f) { return 1.0 / std::sqrt(1.0 + (f / spec.f_cl) * (f / spec.f_cl)); };
  EXPECT_NEAR(m.mains_attenuation_db, oracle::db(lp(50.0) / lp(20.0)), 1.0);
}

TEST(MeasureMetrics, DesignPresetBandEdges) {
  const auto m = measure_metrics(FrontEndSpec::from_components(ComponentValues{}), 500);
  EXPECT_NEAR(m.bandwidth_low, 0.072, 0.005);
  EXPECT_NEAR(m.bandwidth_high, 70.73, 1.0);
}

TEST(FrequencyResponse, MatchesStageProductOracle) {
  const auto spec = FrontEndSpec::bench_tuned();
  const auto freqs = log_spaced(0.05, 200.0, 40);
  const auto points = frequency_response(spec, 500, freqs);
  ASSERT_EQ(points.size(), freqs.size());
  const auto hp = discretize(StageKind::Highpass, spec, 500);
  const auto lp = discretize(StageKind::Lowpass, spec, 500);
  const auto nt = discretize(StageKind::Notch, spec, 500);
  for (const auto& p : points) {
    const double mag = spec.chain_gain() * std::abs(oracle::biquad_response(hp.b(), hp.a(), p.freq_hz, 500)) *
                       std::abs(oracle::biquad_response(lp.b(), lp.a(), p.freq_hz, 500)) *
                       std::abs(oracle::biquad_response(nt.b(), nt.a(), p.freq_hz, 500));
    EXPECT_NEAR(p.mag_db, oracle::db(mag), 1e-9);
  }
}

}  // namespace
}  // namespace ecgmon
