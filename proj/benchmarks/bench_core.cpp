#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "ecgmon/adc.hpp"
#include "ecgmon/dsp.hpp"
#include "ecgmon/frontend.hpp"
#include "ecgmon/pingpong.hpp"
#include "ecgmon/pipeline.hpp"
#include "ecgmon/signal.hpp"

using namespace ecgmon;

namespace {

SampleFrame noisy_ecg(double seconds) {
  NoiseConfig noise;
  noise.mains_amplitude_mv = 0.3;
  noise.emg_sigma_mv = 0.05;
  auto sig = add_noise(generate_ecg(EcgTemplateParams{}, 72, 500, seconds), noise);
  return apply_frontend(sig, FrontEndSpec::bench_tuned(), 500).frame;
}

void BM_FftNotch(benchmark::State& state) {
  const auto frame = noisy_ecg(static_cast<double>(state.range(0)) / 500.0);
  for (auto _ : state) benchmark::DoNotOptimize(fft_notch(frame));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FftNotch)->Arg(512)->Arg(5000)->Arg(1 << 15);

void BM_PingPongPush(benchmark::State& state) {
  PingPongBuffer buf(static_cast<std::size_t>(state.range(0)));
  AdcCode c = 0;
  for (auto _ : state) {
    if (buf.push_sample(c++ & 0x0fff)) benchmark::DoNotOptimize(buf.take_ready_half());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PingPongPush)->Arg(64)->Arg(512);

void BM_FrontEnd(benchmark::State& state) {
  NoiseConfig noise;
  const auto sig = add_noise(generate_ecg(EcgTemplateParams{}, 72, 500, 10), noise);
  const auto spec = FrontEndSpec::bench_tuned();
  for (auto _ : state) benchmark::DoNotOptimize(apply_frontend(sig, spec, 500));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sig.differential.size()));
}
BENCHMARK(BM_FrontEnd);

void BM_DetectRisingEdges(benchmark::State& state) {
  const auto frame = smooth_emg(fft_notch(noisy_ecg(10)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(detect_rising_edges(frame, TriggerConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frame.size()));
}
BENCHMARK(BM_DetectRisingEdges);

void BM_MeasureMetrics(benchmark::State& state) {
  const auto spec = FrontEndSpec::bench_tuned();
  for (auto _ : state) benchmark::DoNotOptimize(measure_metrics(spec, 500));
}
BENCHMARK(BM_MeasureMetrics)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  PipelineConfig cfg;
  cfg.noise.mains_amplitude_mv = 0.3;
  cfg.noise.emg_sigma_mv = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(cfg, 72.0, 10.0));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
