#include "ecgmon/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <vector>

namespace ecgmon {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

void PipelineConfig::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("pipeline.sample_rate must be positive");
  if (half_capacity == 0) throw std::invalid_argument("pipeline.half_capacity must be > 0");
  if (smooth_window == 0 || smooth_window % 2 == 0) {
    throw std::invalid_argument("dsp.smooth_window must be odd");
  }
  if (fb_width <= 0 || fb_height <= 0) throw std::invalid_argument("render size must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(frontend.f_cl < nyquist) || (frontend.notch_enabled && !(frontend.f_0 < nyquist))) {
    throw std::invalid_argument("pipeline.sample_rate must exceed twice the front-end low-pass and notch frequencies");
  }
  if (fft_notch_enabled && !(notch_center_hz < nyquist)) {
    throw std::invalid_argument("dsp.notch_center_hz must lie below the Nyquist frequency");
  }
  ecg.validate();
  noise.validate();
  frontend.validate();
  adc.validate();
  trigger.validate();
  alert.validate();
  if (!sink.empty()) make_sink(sink);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  return out;
}

std::size_t to_count(const std::string& v) {
  const long long n = to_integer(v);
  if (n < 0) throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

StageKind to_stage(const std::string& v) {
  if (v == "highpass") return StageKind::Highpass;
  if (v == "lowpass") return StageKind::Lowpass;
  if (v == "notch") return StageKind::Notch;
  throw std::invalid_argument("unknown stage '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

#define ECGMON_NUM(key, field) {key, [](PipelineConfig& c, const std::string& v) { c.field = to_double(v); }}
#define ECGMON_CNT(key, field) {key, [](PipelineConfig& c, const std::string& v) { c.field = to_count(v); }}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t = {
        ECGMON_NUM("pipeline.sample_rate", sample_rate),
        {"pipeline.source",
         [](PipelineConfig& c, const std::string& v) {
           if (v == "ecg") c.source = SourceMode::Ecg;
           else if (v == "sine") c.source = SourceMode::Sine;
           else throw std::invalid_argument("source must be ecg or sine");
         }},
        ECGMON_NUM("pipeline.sine_amplitude_mv", sine_amplitude_mv),
        ECGMON_CNT("pipeline.half_capacity", half_capacity),
        {"pipeline.include_metrics", [](PipelineConfig& c, const std::string& v) { c.include_metrics = to_bool(v); }},

        ECGMON_NUM("noise.mains_amplitude_mv", noise.mains_amplitude_mv),
        ECGMON_NUM("noise.mains_freq_hz", noise.mains_freq_hz),
        ECGMON_NUM("noise.wander_amplitude_mv", noise.wander_amplitude_mv),
        ECGMON_NUM("noise.wander_freq_hz", noise.wander_freq_hz),
        ECGMON_NUM("noise.emg_sigma_mv", noise.emg_sigma_mv),
        ECGMON_NUM("noise.dc_offset_mv", noise.dc_offset_mv),
        ECGMON_NUM("noise.common_mode_amplitude_mv", noise.common_mode_amplitude_mv),
        ECGMON_NUM("noise.common_mode_freq_hz", noise.common_mode_freq_hz),
        {"noise.seed", [](PipelineConfig& c, const std::string& v) { c.noise.rng_seed = to_count(v); }},

        ECGMON_NUM("components.r1", components.r1), ECGMON_NUM("components.r2", components.r2),
        ECGMON_NUM("components.r3", components.r3), ECGMON_NUM("components.r4", components.r4),
        ECGMON_NUM("components.r5", components.r5), ECGMON_NUM("components.r7", components.r7),
        ECGMON_NUM("components.r_hp", components.r_hp), ECGMON_NUM("components.c2", components.c2),
        ECGMON_NUM("components.r15", components.r15), ECGMON_NUM("components.c3", components.c3),
        ECGMON_NUM("components.r31", components.r31), ECGMON_NUM("components.r27", components.r27),
        ECGMON_NUM("components.c5", components.c5), ECGMON_NUM("components.c7", components.c7),
        ECGMON_NUM("components.ra", components.ra), ECGMON_NUM("components.rb", components.rb),

        {"frontend.preset",
         [](PipelineConfig& c, const std::string& v) {
           if (v == "bench") c.frontend = FrontEndSpec::bench_tuned();
           else if (v == "design") c.frontend = FrontEndSpec::from_components(c.components);
           else throw std::invalid_argument("preset must be bench or design");
         }},
        ECGMON_NUM("frontend.instrument_gain", frontend.instrument_gain),
        ECGMON_NUM("frontend.voltage_gain", frontend.voltage_gain),
        ECGMON_NUM("frontend.f_ch", frontend.f_ch),
        ECGMON_NUM("frontend.f_cl", frontend.f_cl),
        ECGMON_NUM("frontend.f_0", frontend.f_0),
        ECGMON_NUM("frontend.notch_q", frontend.notch_q),
        {"frontend.notch_enabled", [](PipelineConfig& c, const std::string& v) { c.frontend.notch_enabled = to_bool(v); }},
        ECGMON_NUM("frontend.cmrr_db", frontend.cmrr_db),
        ECGMON_NUM("frontend.lift_bias", frontend.lift_bias),
        ECGMON_NUM("frontend.clip_low", frontend.clip_low),
        ECGMON_NUM("frontend.clip_high", frontend.clip_high),
        {"frontend.stage_order",
         [](PipelineConfig& c, const std::string& v) {
           std::vector<StageKind> kinds;
           std::stringstream ss(v);
           std::string item;
           while (std::getline(ss, item, ',')) kinds.push_back(to_stage(trim(item)));
           if (kinds.size() != 3) throw std::invalid_argument("stage_order needs three stages");
           std::copy(kinds.begin(), kinds.end(), c.frontend.stage_order.begin());
         }},
        ECGMON_NUM("frontend.input_impedance_ohm", frontend.input_impedance_ohm),
        ECGMON_NUM("frontend.input_noise_rms_v", frontend.input_noise_rms_v),
        {"frontend.noise_seed", [](PipelineConfig& c, const std::string& v) { c.frontend.noise_seed = to_count(v); }},

        {"adc.resolution_bits", [](PipelineConfig& c, const std::string& v) { c.adc.resolution_bits = static_cast<int>(to_integer(v)); }},
        ECGMON_NUM("adc.vref", adc.vref),

        {"dsp.fft_notch", [](PipelineConfig& c, const std::string& v) { c.fft_notch_enabled = to_bool(v); }},
        ECGMON_NUM("dsp.notch_center_hz", notch_center_hz),
        ECGMON_NUM("dsp.notch_half_band_hz", notch_half_band_hz),
        ECGMON_CNT("dsp.smooth_window", smooth_window),

        {"trigger.level", [](PipelineConfig& c, const std::string& v) { c.trigger.trigger_level = to_double(v); }},
        {"trigger.band_epsilon", [](PipelineConfig& c, const std::string& v) { c.trigger.band_epsilon = to_double(v); }},
        ECGMON_CNT("trigger.run_length", trigger.run_length),
        ECGMON_NUM("trigger.refractory_s", trigger.refractory_s),
        ECGMON_CNT("trigger.start_index", trigger.start_index),

        ECGMON_NUM("alert.low_bpm", alert.low_bpm),
        ECGMON_NUM("alert.high_bpm", alert.high_bpm),
        {"alert.inclusive", [](PipelineConfig& c, const std::string& v) { c.alert.inclusive_bounds = to_bool(v); }},

        {"render.width", [](PipelineConfig& c, const std::string& v) { c.fb_width = static_cast<int>(to_integer(v)); }},
        {"render.height", [](PipelineConfig& c, const std::string& v) { c.fb_height = static_cast<int>(to_integer(v)); }},

        {"telemetry.device_id", [](PipelineConfig& c, const std::string& v) { c.device_id = v; }},
        {"telemetry.location", [](PipelineConfig& c, const std::string& v) { c.location = v; }},
        {"telemetry.timestamp", [](PipelineConfig& c, const std::string& v) { c.timestamp = to_integer(v); }},
        ECGMON_CNT("telemetry.max_ecg", max_ecg),
        {"telemetry.sink", [](PipelineConfig& c, const std::string& v) { c.sink = v; }},
    };
    static constexpr const char* kWaves[] = {"p", "q", "r", "s", "t"};
    for (std::size_t w = 0; w < 5; ++w) {
      const std::string prefix = std::string("ecg.") + kWaves[w];
      t[prefix + "_amplitude_mv"] = [w](PipelineConfig& c, const std::string& v) { c.ecg.waves[w].amplitude_mv = to_double(v); };
      t[prefix + "_center"] = [w](PipelineConfig& c, const std::string& v) { c.ecg.waves[w].center = to_double(v); };
      t[prefix + "_width"] = [w](PipelineConfig& c, const std::string& v) { c.ecg.waves[w].width = to_double(v); };
    }
    return t;
  }();
  return table;
}

#undef ECGMON_NUM
#undef ECGMON_CNT

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

// Components feed the design preset, and the preset must not clobber
// explicit frontend keys, so apply in that order.
int apply_rank(const std::string& key) {
  if (key.starts_with("components.")) return 0;
  if (key == "frontend.preset") return 1;
  return 2;
}

}  // namespace

PipelineConfig parse_config(std::istream& in, const std::string& source_name) {
  std::vector<Entry> entries;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source_name, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(setters().begin(), setters().end(), [&](const auto& kv) {
        return kv.first.starts_with(section + ".");
      });
      if (!known) throw ConfigError(source_name, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source_name, line_no, "expected key = value");
    if (section.empty()) throw ConfigError(source_name, line_no, "key outside of a [section]");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (!setters().contains(key)) throw ConfigError(source_name, line_no, "unknown key '" + key + "'");
    entries.push_back({key, trim(line.substr(eq + 1)), line_no});
  }

  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return apply_rank(a.key) < apply_rank(b.key);
  });
  PipelineConfig cfg;
  for (const auto& e : entries) {
    try {
      setters().at(e.key)(cfg, e.value);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(source_name, e.line, e.key + ": " + err.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& err) {
    // Point at the line that set the key the message leads with, if any.
    const std::string what = err.what();
    std::size_t line = 0;
    for (const auto& e : entries) {
      if (what.starts_with(e.key + " ") || what.starts_with(e.key + ":")) line = e.line;
    }
    throw ConfigError(source_name, line, what);
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  return parse_config(in, path);
}

void apply_override(PipelineConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const auto it = setters().find(dotted_key);
  if (it == setters().end()) throw ConfigError("--set", 0, "unknown key '" + dotted_key + "'");
  try {
    it->second(cfg, value);
  } catch (const std::invalid_argument& err) {
    throw ConfigError("--set", 0, dotted_key + ": " + err.what());
  }
}

}  // namespace ecgmon
