#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ecgmon/adc.hpp"
#include "ecgmon/config.hpp"
#include "ecgmon/dsp.hpp"
#include "ecgmon/frame.hpp"
#include "ecgmon/frontend.hpp"
#include "ecgmon/pingpong.hpp"
#include "ecgmon/pipeline.hpp"
#include "ecgmon/render.hpp"
#include "ecgmon/signal.hpp"
#include "ecgmon/telemetry.hpp"

using namespace ecgmon;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
  PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", 0, "expected section.key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("configuration", 0, e.what());
  }
  return cfg;
}

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV frame from a path or stdin. Files too short to infer a rate from fall
// back to the configured rate.
SampleFrame load_frame(const std::string& path, Unit unit, double fallback_rate) {
  const std::string text = read_all(path);
  std::size_t rows = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line != "\r" && line.rfind("time", 0) != 0) ++rows;
  }
  std::istringstream in(text);
  try {
    return read_csv(in, unit, rows < 2 ? std::optional<double>(fallback_rate) : std::nullopt);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument((path == "-" ? std::string("<stdin>") : path) + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string frame_csv(const SampleFrame& frame) {
  std::ostringstream out;
  write_csv(out, frame);
  return out.str();
}

ordered_json metrics_json(const MetricsReport& m) {
  ordered_json j;
  j["differential_gain"] = m.differential_gain;
  j["common_mode_gain"] = m.common_mode_gain;
  j["cmrr_db"] = m.cmrr_db;
  j["bandwidth_low"] = m.bandwidth_low;
  j["bandwidth_high"] = m.bandwidth_high;
  j["bw"] = m.bw;
  j["mains_attenuation_db"] = m.mains_attenuation_db;
  j["input_impedance"] = m.input_impedance;
  j["equiv_input_noise"] = m.equiv_input_noise;
  return j;
}

SourceSignal make_source(const PipelineConfig& cfg, double bpm, double duration) {
  const SampleFrame clean =
      cfg.source == SourceMode::Sine
          ? generate_sine(bpm / 60.0, cfg.sine_amplitude_mv, cfg.sample_rate, duration)
          : generate_ecg(cfg.ecg, bpm, cfg.sample_rate, duration);
  return add_noise(clean, cfg.noise);
}

AdcConfig adc_of(const PipelineConfig& cfg) {
  AdcConfig adc = cfg.adc;
  adc.sample_rate = cfg.sample_rate;
  return adc;
}

void apply_source_flag(PipelineConfig& cfg, const std::string& source) {
  if (source.empty()) return;
  apply_override(cfg, "pipeline.source", source);
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  double bpm = 72.0;
  double duration = 10.0;
  std::string source;
  std::string stage = "source";
  std::string out;
};

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  PipelineConfig cfg = resolve_config(g);
  apply_source_flag(cfg, o.source);
  const SourceSignal sig = make_source(cfg, o.bpm, o.duration);
  SampleFrame frame = sig.differential;
  if (o.stage != "source") {
    const FrontEndOutput analog = apply_frontend(sig, cfg.frontend, cfg.sample_rate);
    if (analog.saturated) {
      std::cerr << "warning: front end saturated on " << analog.clipped_samples << " samples\n";
    }
    frame = analog.frame;
    if (o.stage == "adc") {
      const auto codes = quantize_frame(frame, adc_of(cfg));
      frame = SampleFrame(cfg.sample_rate, Unit::AdcCode, std::vector<double>(codes.begin(), codes.end()));
    }
  }
  write_text(o.out, frame_csv(frame));
  return kExitOk;
}

// ---- metrics ---------------------------------------------------------------

struct MetricsOptions {
  std::string response;
  std::size_t points = 200;
};

int cmd_metrics(const GlobalOptions& g, const MetricsOptions& o) {
  const PipelineConfig cfg = resolve_config(g);
  const MetricsReport m = measure_metrics(cfg.frontend, cfg.sample_rate);
  std::cout << metrics_json(m).dump() << '\n';
  if (!o.response.empty()) {
    const auto freqs = log_spaced(0.01, 0.99 * cfg.sample_rate / 2.0, o.points);
    std::string csv = "freq_hz,mag_db\n";
    for (const auto& p : frequency_response(cfg.frontend, cfg.sample_rate, freqs)) {
      csv += format_number(p.freq_hz) + "," + format_number(p.mag_db) + "\n";
    }
    write_text(o.response, csv);
  }
  return kExitOk;
}

// ---- notch -----------------------------------------------------------------

struct NotchOptions {
  std::string in = "-";
  std::string out;
  std::string unit = "V";
  std::optional<double> center;
  std::optional<double> half_band;
};

int cmd_notch(const GlobalOptions& g, const NotchOptions& o) {
  const PipelineConfig cfg = resolve_config(g);
  const SampleFrame frame = load_frame(o.in, unit_from_string(o.unit), cfg.sample_rate);
  const SampleFrame out = fft_notch(frame, o.center.value_or(cfg.notch_center_hz),
                                    o.half_band.value_or(cfg.notch_half_band_hz));
  write_text(o.out, frame_csv(out));
  return kExitOk;
}

// ---- detect ----------------------------------------------------------------

struct DetectOptions {
  std::string in = "-";
  std::string unit = "V";
  std::optional<double> level;
  std::optional<double> refractory;
  std::optional<std::size_t> run_length;
  bool falling = false;
};

int cmd_detect(const GlobalOptions& g, const DetectOptions& o) {
  const PipelineConfig cfg = resolve_config(g);
  const SampleFrame frame = load_frame(o.in, unit_from_string(o.unit), cfg.sample_rate);
  TriggerConfig trig = cfg.trigger;
  if (o.level) trig.trigger_level = o.level;
  if (o.refractory) trig.refractory_s = *o.refractory;
  if (o.run_length) trig.run_length = *o.run_length;

  const auto edges = o.falling ? detect_falling_edges(frame, trig) : detect_rising_edges(frame, trig);
  ordered_json j;
  j["edges"] = ordered_json::array();
  for (const auto& e : edges) j["edges"].push_back({{"index", e.sample_index}, {"t", e.time}});

  int code = kExitOk;
  try {
    const auto reading = heart_rate_from_edges(edges, frame.sample_rate);
    j["bpm"] = reading.bpm;
    j["period_s"] = reading.period_s;
    if (reading.median_period_s) j["median_period_s"] = *reading.median_period_s;
  } catch (const InsufficientData& e) {
    j["bpm"] = nullptr;
    j["period_s"] = nullptr;
    std::cerr << "ecgmon: " << e.what() << '\n';
    code = kExitRuntime;
  }
  std::cout << j.dump() << '\n';
  return code;
}

// ---- stream ----------------------------------------------------------------

struct StreamOptions {
  double bpm = 72.0;
  double duration = 5.0;
  std::optional<std::size_t> half_capacity;
  bool free_running = false;
  int consumer_delay_ms = 0;
};

int cmd_stream(const GlobalOptions& g, const StreamOptions& o) {
  const PipelineConfig cfg = resolve_config(g);
  const AdcConfig adc = adc_of(cfg);
  const FrontEndOutput analog =
      apply_frontend(make_source(cfg, o.bpm, o.duration), cfg.frontend, cfg.sample_rate);
  const auto codes = quantize_frame(analog.frame, adc);

  PingPongBuffer buffer(o.half_capacity.value_or(cfg.half_capacity));
  std::size_t printed = 0;
  std::thread consumer([&] {
    while (true) {
      auto half = buffer.wait_ready_half(std::chrono::milliseconds(100));
      if (!half) {
        if (buffer.closed() && buffer.pending_events() == 0) break;
        continue;
      }
      ordered_json j;
      j["seq"] = half->sequence;
      j["half"] = half->half;
      j["overrun"] = half->overrun;
      j["codes"] = half->codes;
      std::cout << j.dump() << '\n';
      ++printed;
      if (o.consumer_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o.consumer_delay_ms));
    }
  });

  // Producer: the timer/DMA side. Unless free-running, it waits for each
  // completed half to be picked up, which keeps the output reproducible.
  for (AdcCode c : codes) {
    if (buffer.push_sample(c) && !o.free_running) {
      while (buffer.pending_events() != 0) std::this_thread::sleep_for(std::chrono::microseconds(50));
    }
  }
  buffer.flush();
  if (!o.free_running) {
    while (buffer.pending_events() != 0) std::this_thread::sleep_for(std::chrono::microseconds(50));
  }
  buffer.close();
  consumer.join();
  std::cout.flush();
  std::cerr << "stream: " << printed << " halves, " << buffer.total_consumed() << "/"
            << buffer.total_written() << " samples consumed, overruns " << buffer.overrun_count() << '\n';
  return kExitOk;
}

// ---- plot ------------------------------------------------------------------

struct PlotOptions {
  std::string in = "-";
  std::string unit = "V";
  std::string svg;
  std::string from_telemetry;
  std::optional<double> v_min;
  std::optional<double> v_max;
  bool no_ascii = false;
};

int cmd_plot(const GlobalOptions& g, const PlotOptions& o) {
  const PipelineConfig cfg = resolve_config(g);
  std::vector<double> values;
  if (!o.from_telemetry.empty()) {
    const RetrieveResult r = retrieve_records(o.from_telemetry);
    if (r.warnings > 0) std::cerr << "warning: skipped " << r.warnings << " malformed line(s)\n";
    values = r.ecg;
  } else {
    values = load_frame(o.in, unit_from_string(o.unit), cfg.sample_rate).values;
  }
  auto [lo, hi] = auto_range(values);
  if (o.v_min) lo = *o.v_min;
  if (o.v_max) hi = *o.v_max;
  const PlotTrace trace = map_to_trace(values, cfg.fb_width, cfg.fb_height, lo, hi);
  if (o.svg == "-") {
    write_text(o.svg, render_svg(trace, cfg.fb_width, cfg.fb_height));
  } else if (!o.svg.empty()) {
    export_svg(o.svg, render_svg(trace, cfg.fb_width, cfg.fb_height));
  }
  if (!o.no_ascii) {
    Framebuffer fb(cfg.fb_width, cfg.fb_height);
    draw_trace(fb, std::nullopt, trace);
    std::cout << export_ascii(fb);
  }
  return kExitOk;
}

// ---- send ------------------------------------------------------------------

struct SendOptions {
  std::string in = "-";
  std::string unit = "code";
  std::string sink;
  std::optional<double> bpm;
  std::optional<double> low_bpm;
  std::optional<double> high_bpm;
  std::optional<std::string> location;
  std::optional<std::string> device_id;
  std::optional<std::int64_t> timestamp;
};

int cmd_send(const GlobalOptions& g, const SendOptions& o) {
  PipelineConfig cfg = resolve_config(g);
  if (o.low_bpm) cfg.alert.low_bpm = *o.low_bpm;
  if (o.high_bpm) cfg.alert.high_bpm = *o.high_bpm;
  cfg.alert.validate();
  const std::string sink_spec = !o.sink.empty() ? o.sink : !cfg.sink.empty() ? cfg.sink : "stdout";
  auto sink = make_sink(sink_spec);

  const SampleFrame frame = load_frame(o.in, unit_from_string(o.unit), cfg.sample_rate);
  TelemetryRecord rec;
  rec.device_id = o.device_id.value_or(cfg.device_id);
  rec.location = o.location.value_or(cfg.location);
  rec.timestamp = o.timestamp.value_or(cfg.timestamp);
  rec.bpm = o.bpm;
  if (!rec.bpm) {
    try {
      rec.bpm = heart_rate_from_edges(detect_rising_edges(frame, cfg.trigger), frame.sample_rate).bpm;
    } catch (const InsufficientData& e) {
      std::cerr << "warning: " << e.what() << "; sending bpm null\n";
    }
  }
  const std::size_t keep = std::min(frame.size(), cfg.max_ecg);
  rec.ecg.assign(frame.values.end() - static_cast<std::ptrdiff_t>(keep), frame.values.end());

  std::vector<std::string> payloads{encode_record(rec, cfg.max_ecg)};
  if (rec.bpm) {
    if (const auto alert = evaluate_alert(*rec.bpm, cfg.alert, rec.location, rec.timestamp)) {
      // Stands in for the voice prompt.
      std::cerr << "ALERT: " << alert->message << " at " << alert->location << '\n';
      payloads.push_back(encode_alert(*alert));
    }
  }
  for (const auto& p : payloads) {
    const DeliveryReceipt r = publish(*sink, p);
    if (sink_spec != "stdout") {
      std::cerr << "sent " << r.bytes << " bytes to " << r.sink << " in " << r.attempts << " attempt(s)\n";
    }
  }
  return kExitOk;
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
  double bpm = 72.0;
  double duration = 10.0;
  std::string source;
  std::string sink;
  bool metrics = false;
};

int cmd_run(const GlobalOptions& g, const RunOptions& o) {
  PipelineConfig cfg = resolve_config(g);
  apply_source_flag(cfg, o.source);
  if (!o.sink.empty()) cfg.sink = o.sink;
  if (o.metrics) cfg.include_metrics = true;
  const PipelineResult r = run_pipeline(cfg, o.bpm, o.duration);

  ordered_json j;
  j["bpm"] = r.reading.bpm;
  j["period_s"] = r.reading.period_s;
  j["edges"] = r.reading.edge_count;
  if (r.reading.median_period_s) j["median_period_s"] = *r.reading.median_period_s;
  j["alert"] = r.alert ? ordered_json(r.alert->message) : ordered_json(nullptr);
  j["saturated"] = r.frontend_saturated;
  j["halves"] = r.stream.halves;
  j["overrun"] = r.stream.overrun;
  if (r.metrics) j["metrics"] = metrics_json(*r.metrics);
  std::cout << j.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECG monitor simulation: acquisition, conditioning, heart rate and telemetry"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path, "INI configuration file");
  app.add_option("--set", g.overrides, "Override a config key, e.g. --set alert.high_bpm=110")
      ->type_name("SECTION.KEY=VALUE");

  int status = kExitOk;

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic signal as CSV");
  simulate->add_option("--bpm", sim.bpm, "Heart rate of the source")->capture_default_str();
  simulate->add_option("--duration", sim.duration, "Seconds to generate")->capture_default_str();
  simulate->add_option("--source", sim.source, "ecg or sine (default from config)");
  simulate->add_option("--stage", sim.stage, "source (mV), frontend (V) or adc (codes)")
      ->check(CLI::IsMember({"source", "frontend", "adc"}))
      ->capture_default_str();
  simulate->add_option("-o,--out", sim.out, "Output CSV path (default stdout)");
  simulate->callback([&] { status = cmd_simulate(g, sim); });

  MetricsOptions met;
  auto* metrics = app.add_subcommand("metrics", "Measure gain, CMRR, bandwidth, mains attenuation and noise");
  metrics->add_option("--response", met.response, "Also write the frequency response CSV here");
  metrics->add_option("--points", met.points, "Frequency points in the response")->capture_default_str();
  metrics->callback([&] { status = cmd_metrics(g, met); });

  NotchOptions nt;
  auto* notch = app.add_subcommand("notch", "FFT mains removal on a CSV frame");
  notch->add_option("-i,--in", nt.in, "Input CSV (- for stdin)")->capture_default_str();
  notch->add_option("-o,--out", nt.out, "Output CSV (default stdout)");
  notch->add_option("--unit", nt.unit, "mV, V or code")->capture_default_str();
  notch->add_option("--center", nt.center, "Center frequency in Hz");
  notch->add_option("--half-band", nt.half_band, "Half width of the removed band in Hz");
  notch->callback([&] { status = cmd_notch(g, nt); });

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Edge-trigger heart-rate detection on a CSV frame");
  detect->add_option("-i,--in", det.in, "Input CSV (- for stdin)")->capture_default_str();
  detect->add_option("--unit", det.unit, "mV, V or code")->capture_default_str();
  detect->add_option("--level", det.level, "Trigger level (default: frame midrange)");
  detect->add_option("--refractory", det.refractory, "Refractory interval in seconds");
  detect->add_option("--run-length", det.run_length, "Samples per monotone run");
  detect->add_flag("--falling", det.falling, "Report falling edges instead");
  detect->callback([&] { status = cmd_detect(g, det); });

  StreamOptions st;
  auto* stream = app.add_subcommand("stream", "Print ping-pong half-buffer events as JSON lines");
  stream->add_option("--bpm", st.bpm, "Heart rate of the source")->capture_default_str();
  stream->add_option("--duration", st.duration, "Seconds to acquire")->capture_default_str();
  stream->add_option("--half-capacity", st.half_capacity, "Samples per half buffer");
  stream->add_flag("--free-running", st.free_running,
                   "Do not wait for the consumer; overruns then depend on scheduling");
  stream->add_option("--consumer-delay-ms", st.consumer_delay_ms, "Delay after each consumed half");
  stream->callback([&] { status = cmd_stream(g, st); });

  PlotOptions pl;
  auto* plot = app.add_subcommand("plot", "Render a CSV frame or telemetry file as ASCII and SVG");
  plot->add_option("-i,--in", pl.in, "Input CSV (- for stdin)")->capture_default_str();
  plot->add_option("--unit", pl.unit, "mV, V or code")->capture_default_str();
  plot->add_option("--svg", pl.svg, "Write an SVG here (- for stdout)");
  plot->add_option("--from-telemetry", pl.from_telemetry, "Plot the ECG arrays of a JSON-lines file");
  plot->add_option("--v-min", pl.v_min, "Bottom of the value range");
  plot->add_option("--v-max", pl.v_max, "Top of the value range");
  plot->add_flag("--no-ascii", pl.no_ascii, "Skip the terminal rendering");
  plot->callback([&] { status = cmd_plot(g, pl); });

  SendOptions sd;
  auto* send = app.add_subcommand("send", "Encode a frame as a telemetry record and publish it");
  send->add_option("-i,--in", sd.in, "Input CSV (- for stdin)")->capture_default_str();
  send->add_option("--unit", sd.unit, "mV, V or code")->capture_default_str();
  send->add_option("--sink", sd.sink, "file:<path>, stdout or http:<port>");
  send->add_option("--bpm", sd.bpm, "Use this rate instead of detecting one");
  send->add_option("--low-bpm", sd.low_bpm, "Low alert threshold");
  send->add_option("--high-bpm", sd.high_bpm, "High alert threshold");
  send->add_option("--location", sd.location, "Location placeholder");
  send->add_option("--device-id", sd.device_id, "Device identifier");
  send->add_option("--timestamp", sd.timestamp, "Seconds since epoch");
  send->callback([&] { status = cmd_send(g, sd); });

  RunOptions rn;
  auto* run = app.add_subcommand("run", "Full pipeline from synthesis to telemetry");
  run->add_option("--bpm", rn.bpm, "Heart rate of the source")->capture_default_str();
  run->add_option("--duration", rn.duration, "Seconds to simulate")->capture_default_str();
  run->add_option("--source", rn.source, "ecg or sine (default from config)");
  run->add_option("--sink", rn.sink, "file:<path>, stdout or http:<port>");
  run->add_flag("--metrics", rn.metrics, "Include front-end metrics");
  run->callback([&] { status = cmd_run(g, rn); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "ecgmon: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "ecgmon: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ecgmon: " << e.what() << '\n';
    return kExitRuntime;
  }
  return status;
}
