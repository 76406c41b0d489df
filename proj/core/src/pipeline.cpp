#include "ecgmon/pipeline.hpp"

#include <algorithm>

#include "ecgmon/adc.hpp"
#include "ecgmon/pingpong.hpp"
#include "ecgmon/signal.hpp"

namespace ecgmon {

namespace {

template <typename Fn>
auto stage(const char* module, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(module, e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, double bpm, double duration, Sink* sink) {
  stage("config", [&] { cfg.validate(); });
  PipelineResult result;

  const SourceSignal source = stage("signal_model", [&] {
    const SampleFrame clean =
        cfg.source == SourceMode::Sine
            ? generate_sine(bpm / 60.0, cfg.sine_amplitude_mv, cfg.sample_rate, duration)
            : generate_ecg(cfg.ecg, bpm, cfg.sample_rate, duration);
    return add_noise(clean, cfg.noise);
  });

  const FrontEndOutput analog = stage("analog_frontend", [&] {
    return apply_frontend(source, cfg.frontend, cfg.sample_rate);
  });
  result.frontend_saturated = analog.saturated;

  // Timer-paced conversion straight into the double buffer; the consumer
  // drains each half as soon as it is reported ready.
  std::vector<AdcCode> codes;
  stage("acquisition", [&] {
    AdcConfig adc = cfg.adc;
    adc.sample_rate = cfg.sample_rate;
    PingPongBuffer buffer(cfg.half_capacity);
    std::optional<std::uint64_t> last_seq;
    auto drain = [&] {
      while (auto half = buffer.take_ready_half()) {
        if (last_seq && half->sequence != *last_seq + 1) ++result.stream.sequence_gaps;
        last_seq = half->sequence;
        codes.insert(codes.end(), half->codes.begin(), half->codes.end());
        ++result.stream.halves;
      }
    };
    for (double v : analog.frame.values) {
      if (buffer.push_sample(quantize(v, adc))) drain();
    }
    buffer.flush();
    drain();
    result.stream.samples_consumed = codes.size();
    result.stream.overrun = buffer.overrun_flag();
  });

  result.conditioned = stage("dsp", [&] {
    AdcConfig adc = cfg.adc;
    adc.sample_rate = cfg.sample_rate;
    SampleFrame volts = dequantize_frame(codes, adc, source.differential.start_time);
    if (cfg.fft_notch_enabled && volts.size() >= 2) {
      volts = fft_notch(volts, cfg.notch_center_hz, cfg.notch_half_band_hz);
    }
    return smooth_emg(volts, cfg.smooth_window);
  });

  result.reading = stage("dsp", [&] {
    return heart_rate_from_edges(detect_rising_edges(result.conditioned, cfg.trigger), cfg.sample_rate);
  });

  if (cfg.include_metrics) {
    result.metrics = stage("analog_frontend", [&] { return measure_metrics(cfg.frontend, cfg.sample_rate); });
  }

  stage("telemetry", [&] {
    TelemetryRecord rec;
    rec.device_id = cfg.device_id;
    rec.timestamp = cfg.timestamp;
    rec.bpm = result.reading.bpm;
    rec.location = cfg.location;
    const std::size_t keep = std::min(codes.size(), cfg.max_ecg);
    rec.ecg.assign(codes.end() - static_cast<std::ptrdiff_t>(keep), codes.end());
    result.telemetry.push_back(encode_record(rec, cfg.max_ecg));

    result.alert = evaluate_alert(result.reading.bpm, cfg.alert, cfg.location, cfg.timestamp);
    if (result.alert) result.telemetry.push_back(encode_alert(*result.alert));

    std::unique_ptr<Sink> owned;
    if (!sink && !cfg.sink.empty()) {
      owned = make_sink(cfg.sink);
      sink = owned.get();
    }
    if (sink) {
      for (const auto& payload : result.telemetry) publish(*sink, payload);
    }
  });
  return result;
}

}  // namespace ecgmon
