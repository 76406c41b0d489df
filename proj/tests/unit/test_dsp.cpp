#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecgmon/dsp.hpp"
#include "oracles.hpp"

namespace ecgmon {
namespace {

using oracle::kPi;

SampleFrame sine_frame(double f, double amp, double fs, double seconds, double phase = 0.0) {
  std::vector<double> v(static_cast<std::size_t>(std::llround(fs * seconds)));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs + phase);
  return SampleFrame(fs, Unit::Volt, std::move(v));
}

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

TEST(FftNotch, ZeroFrameStaysZero) {
  const auto out = fft_notch(SampleFrame(500, Unit::Volt, std::vector<double>(256, 0.0)));
  ASSERT_EQ(out.size(), 256u);
  for (double v : out.values) EXPECT_EQ(v, 0.0);
}

TEST(FftNotch, MatchesNaiveDftOracle) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t n : {2u, 7u, 64u, 255u, 500u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = noise(gen);
    const auto out = fft_notch(SampleFrame(500, Unit::Volt, x), 50.0, 2.0);
    const auto ref = oracle::naive_notch(x, 500, 50.0, 2.0);
    ASSERT_EQ(out.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(out.values[i], ref[i], 1e-9) << "n=" << n;
  }
}

TEST(FftNotch, RemovesMainsWithIntegerCycles) {
  const auto in = sine_frame(50, 1.0, 500, 2.0);
  const auto out = fft_notch(in);
  EXPECT_LE(oracle::rms(out.values), 0.01 * oracle::rms(in.values));
}

TEST(FftNotch, PreservesPassband) {
  const auto in = sine_frame(10, 1.0, 500, 2.0);
  const auto out = fft_notch(in, 50.0, 2.0);
  EXPECT_NEAR(oracle::rms(out.values), oracle::rms(in.values), 0.01 * oracle::rms(in.values));
}

TEST(FftNotch, IdempotentAndEnergyNonIncreasing) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = noise(gen);
  const SampleFrame in(500, Unit::Volt, x);
  const auto once = fft_notch(in);
  const auto twice = fft_notch(once);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(twice.values[i], once.values[i], 1e-9 * std::max(1.0, std::abs(once.values[i])));
  }
  EXPECT_LE(energy(once.values), energy(x));
}

TEST(FftNotch, KeepsFrameMetadata) {
  SampleFrame in = sine_frame(5, 1.0, 250, 1.0);
  in.start_time = 3.0;
  const auto out = fft_notch(in);
  EXPECT_DOUBLE_EQ(out.sample_rate, 250.0);
  EXPECT_DOUBLE_EQ(out.start_time, 3.0);
  EXPECT_EQ(out.unit, Unit::Volt);
}

TEST(FftNotch, RejectsBadArguments) {
  EXPECT_THROW(fft_notch(SampleFrame(500, Unit::Volt, {1.0})), std::invalid_argument);
  EXPECT_THROW(fft_notch(sine_frame(5, 1, 100, 1), 50.0), std::invalid_argument);
  EXPECT_THROW(fft_notch(sine_frame(5, 1, 500, 1), 50.0, -1.0), std::invalid_argument);
}

TEST(SmoothEmg, WindowOneIsIdentity) {
  const auto in = sine_frame(3, 1.0, 500, 1.0);
  EXPECT_EQ(smooth_emg(in, 1).values, in.values);
}

TEST(SmoothEmg, ConstantUnchanged) {
  const SampleFrame in(500, Unit::Volt, std::vector<double>(50, 0.7));
  for (double v : smooth_emg(in, 5).values) EXPECT_NEAR(v, 0.7, 1e-13);
}

TEST(SmoothEmg, EdgesUseTruncatedWindow) {
  const SampleFrame in(500, Unit::Volt, {1, 2, 3, 4, 5, 6});
  const auto out = smooth_emg(in, 5).values;
  ASSERT_EQ(out.size(), 6u);
  EXPECT_DOUBLE_EQ(out[0], 2.0);       // (1+2+3)/3
  EXPECT_DOUBLE_EQ(out[1], 2.5);       // (1+2+3+4)/4
  EXPECT_DOUBLE_EQ(out[2], 3.0);
  EXPECT_DOUBLE_EQ(out[5], 5.0);       // (4+5+6)/3
}

TEST(SmoothEmg, WhiteNoiseVarianceDropsByWindow) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = noise(gen);
  const auto out = smooth_emg(SampleFrame(500, Unit::Volt, x), 5);
  const double ratio = oracle::variance(out.values) / oracle::variance(x);
  EXPECT_NEAR(ratio, 0.2, 0.02);
}

TEST(SmoothEmg, EvenWindowRejected) {
  EXPECT_THROW(smooth_emg(SampleFrame(500, Unit::Volt, {1, 2, 3}), 4), std::invalid_argument);
  EXPECT_THROW(smooth_emg(SampleFrame(500, Unit::Volt, {1, 2, 3}), 0), std::invalid_argument);
}

TEST(DetectEdges, ConstantFrameHasNone) {
  const SampleFrame in(500, Unit::Volt, std::vector<double>(100, 1.0));
  EXPECT_TRUE(detect_rising_edges(in, {}).empty());
  EXPECT_TRUE(detect_falling_edges(in, {}).empty());
}

TEST(DetectEdges, RampHandTrace) {
  // 0, 1/9, ..., 1. Runs starting at 0..2 stay below 0.5 and their middle
  // sample is outside the band; the run 3,4,5 (0.33..0.56) crosses, mid = 4.
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[i] = i / 9.0;
  TriggerConfig cfg;
  cfg.trigger_level = 0.5;
  cfg.band_epsilon = 0.02;
  const auto edges = detect_rising_edges(SampleFrame(500, Unit::Volt, v), cfg);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].sample_index, 4u);
  EXPECT_DOUBLE_EQ(edges[0].time, 4.0 / 500.0);
  EXPECT_EQ(edges[0].kind, EdgeKind::Rising);
}

TEST(DetectEdges, TwoHertzSineOneSecond) {
  TriggerConfig cfg;
  cfg.trigger_level = 0.0;
  cfg.refractory_s = 0.2;
  const auto edges = detect_rising_edges(sine_frame(2, 1.0, 500, 1.0), cfg);
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_NEAR(static_cast<double>(edges[1].sample_index - edges[0].sample_index), 250.0, 2.0);
}

TEST(DetectEdges, FallingMirrorsRising) {
  TriggerConfig cfg;
  cfg.trigger_level = 0.0;
  cfg.refractory_s = 0.2;
  const auto frame = sine_frame(2, 1.0, 500, 1.0);
  auto mirrored = frame;
  for (auto& v : mirrored.values) v = -v;
  const auto rising = detect_rising_edges(frame, cfg);
  const auto falling = detect_falling_edges(mirrored, cfg);
  ASSERT_EQ(rising.size(), falling.size());
  for (std::size_t i = 0; i < rising.size(); ++i) {
    EXPECT_EQ(rising[i].sample_index, falling[i].sample_index);
    EXPECT_EQ(falling[i].kind, EdgeKind::Falling);
  }
}

TEST(DetectEdges, StartIndexSkipsEarlierEdges) {
  TriggerConfig cfg;
  cfg.trigger_level = 0.0;
  cfg.refractory_s = 0.2;
  cfg.start_index = 100;
  const auto edges = detect_rising_edges(sine_frame(2, 1.0, 500, 1.0), cfg);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_GE(edges[0].sample_index, 100u);
}

TEST(DetectEdges, ShortFrameGivesNone) {
  EXPECT_TRUE(detect_rising_edges(SampleFrame(500, Unit::Volt, {0.0, 1.0}), {}).empty());
}

TEST(DetectEdges, TranslationEquivariant) {
  TriggerConfig cfg;
  cfg.trigger_level = 0.0;
  cfg.refractory_s = 0.2;
  const double fs = 500;
  const auto base = sine_frame(1.5, 1.0, fs, 4.0, 0.7);
  const auto base_edges = detect_rising_edges(base, cfg);
  for (std::size_t k : {1u, 17u, 133u}) {
    // Same waveform delayed by k samples.
    std::vector<double> shifted(base.size() + k);
    for (std::size_t n = 0; n < shifted.size(); ++n) {
      shifted[n] = std::sin(2 * kPi * 1.5 * (static_cast<double>(n) - static_cast<double>(k)) / fs + 0.7);
    }
    const auto edges = detect_rising_edges(SampleFrame(fs, Unit::Volt, shifted), cfg);
    std::vector<std::size_t> expect, got;
    for (const auto& e : base_edges) {
      if (e.sample_index > 50 && e.sample_index + 50 < base.size()) expect.push_back(e.sample_index + k);
    }
    for (const auto& e : edges) {
      if (e.sample_index > 50 + k && e.sample_index + 50 < base.size() + k) got.push_back(e.sample_index);
    }
    EXPECT_EQ(got, expect) << "k=" << k;
  }
}

TEST(DetectEdges, SineEdgeCountProperty) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> freq(0.5, 5.0), dur(1.0, 10.0), phase(0.0, 2 * kPi);
  for (int trial = 0; trial < 200; ++trial) {
    const double f = freq(gen);
    const double t = dur(gen);
    TriggerConfig cfg;
    cfg.trigger_level = 0.0;
    cfg.refractory_s = 0.4 / f;
    const auto edges = detect_rising_edges(sine_frame(f, 1.0, 500, t, phase(gen)), cfg);
    const double expected = std::floor(f * t);
    EXPECT_LE(std::abs(static_cast<double>(edges.size()) - expected), 1.0)
        << "f=" << f << " T=" << t << " got " << edges.size();
    for (std::size_t i = 1; i < edges.size(); ++i) ASSERT_GT(edges[i].sample_index, edges[i - 1].sample_index);
  }
}

TEST(DetectEdges, DefaultTriggerResolvesToMidrangeAndBand) {
  const SampleFrame in(500, Unit::Volt, {1.0, 3.0, 2.0});
  const auto t = resolve_trigger(in, {});
  EXPECT_DOUBLE_EQ(t.level, 2.0);
  EXPECT_DOUBLE_EQ(t.band, 0.04);
}

TEST(HeartRate, TwoHertzIs120Bpm) {
  const std::vector<EdgeEvent> edges{{500, 1.0, EdgeKind::Rising}, {750, 1.5, EdgeKind::Rising}};
  const auto r = heart_rate_from_edges(edges, 500);
  EXPECT_DOUBLE_EQ(r.period_s, 0.5);
  EXPECT_DOUBLE_EQ(r.bpm, 120.0);
  EXPECT_FALSE(r.median_period_s);
  EXPECT_EQ(r.first.sample_index, 500u);
  EXPECT_EQ(r.second.sample_index, 750u);
}

TEST(HeartRate, OneEdgeIsInsufficient) {
  EXPECT_THROW(heart_rate_from_edges({{10, 0.02, EdgeKind::Rising}}, 500), InsufficientData);
  EXPECT_THROW(heart_rate_from_edges({}, 500), InsufficientData);
  // Falling edges do not count.
  EXPECT_THROW(heart_rate_from_edges({{10, 0.02, EdgeKind::Rising}, {20, 0.04, EdgeKind::Falling}}, 500),
               InsufficientData);
}

TEST(HeartRate, LatestPairAndMedian) {
  const std::vector<EdgeEvent> edges{{0, 0, EdgeKind::Rising},
                                     {400, 0.8, EdgeKind::Rising},
                                     {900, 1.8, EdgeKind::Rising},
                                     {1300, 2.6, EdgeKind::Rising}};
  const auto r = heart_rate_from_edges(edges, 500);
  EXPECT_DOUBLE_EQ(r.period_s, 0.8);
  EXPECT_DOUBLE_EQ(r.bpm, 75.0);
  ASSERT_TRUE(r.median_period_s);
  EXPECT_DOUBLE_EQ(*r.median_period_s, 0.8);
  EXPECT_EQ(r.edge_count, 4u);
}

TEST(HeartRate, AmplitudeScaleInvariant) {
  const auto frame = sine_frame(1.3, 1.0, 500, 5.0, 0.3);
  TriggerConfig cfg;
  cfg.trigger_level = 0.1;
  cfg.band_epsilon = 0.02;
  const double bpm = heart_rate_from_edges(detect_rising_edges(frame, cfg), 500).bpm;
  for (double scale : {0.001, 2.0, 1650.0}) {
    auto scaled = frame;
    for (auto& v : scaled.values) v *= scale;
    TriggerConfig sc = cfg;
    sc.trigger_level = *cfg.trigger_level * scale;
    sc.band_epsilon = *cfg.band_epsilon * scale;
    EXPECT_DOUBLE_EQ(heart_rate_from_edges(detect_rising_edges(scaled, sc), 500).bpm, bpm) << scale;
  }
  EXPECT_NEAR(bpm, 78.0, 1.0);
}

}  // namespace
}  // namespace ecgmon
