#include "ecgmon/telemetry.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include "ecgmon/render.hpp"

namespace ecgmon {

std::string format_number(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("JSON cannot encode non-finite numbers");
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

namespace {

std::string quote(const std::string& text) { return nlohmann::json(text).dump(); }

}  // namespace

std::string encode_record(const TelemetryRecord& rec, std::size_t max_ecg) {
  if (rec.ecg.size() > max_ecg) {
    throw PayloadTooLarge("ecg has " + std::to_string(rec.ecg.size()) + " samples, limit is " +
                          std::to_string(max_ecg));
  }
  if (rec.bpm && !(*rec.bpm > 0.0)) throw std::invalid_argument("bpm must be > 0 when present");

  std::string out;
  out.reserve(64 + rec.ecg.size() * 6);
  out += "{\"device_id\":";
  out += quote(rec.device_id);
  out += ",\"timestamp\":";
  out += std::to_string(rec.timestamp);
  out += ",\"bpm\":";
  out += rec.bpm ? format_number(*rec.bpm) : "null";
  out += ",\"location\":";
  out += quote(rec.location);
  out += ",\"ecg\":[";
  for (std::size_t i = 0; i < rec.ecg.size(); ++i) {
    if (i > 0) out += ',';
    out += format_number(rec.ecg[i]);
  }
  out += "]}";
  return out;
}

TelemetryRecord decode_record(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json.begin(), json.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("telemetry record is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.size() != 5) {
    throw std::invalid_argument("telemetry record must be an object with exactly five keys");
  }
  auto field = [&doc](const char* key) -> const nlohmann::json& {
    const auto it = doc.find(key);
    if (it == doc.end()) throw std::invalid_argument(std::string("telemetry record lacks '") + key + "'");
    return *it;
  };

  TelemetryRecord rec;
  const auto& device = field("device_id");
  const auto& ts = field("timestamp");
  const auto& bpm = field("bpm");
  const auto& location = field("location");
  const auto& ecg = field("ecg");
  if (!device.is_string() || !location.is_string()) {
    throw std::invalid_argument("device_id and location must be strings");
  }
  if (!ts.is_number_integer()) throw std::invalid_argument("timestamp must be an integer");
  if (!bpm.is_null() && !bpm.is_number()) throw std::invalid_argument("bpm must be a number or null");
  if (!ecg.is_array()) throw std::invalid_argument("ecg must be an array");

  rec.device_id = device.get<std::string>();
  rec.location = location.get<std::string>();
  rec.timestamp = ts.get<std::int64_t>();
  if (bpm.is_number()) {
    rec.bpm = bpm.get<double>();
    if (!(*rec.bpm > 0.0)) throw std::invalid_argument("bpm must be > 0 when present");
  }
  rec.ecg.reserve(ecg.size());
  for (const auto& v : ecg) {
    if (!v.is_number()) throw std::invalid_argument("ecg entries must be numbers");
    rec.ecg.push_back(v.get<double>());
  }
  return rec;
}

void AlertPolicy::validate() const {
  if (!(low_bpm > 0.0 && low_bpm < high_bpm)) {
    throw std::invalid_argument("alert policy requires 0 < low_bpm < high_bpm");
  }
}

std::optional<AlertEvent> evaluate_alert(double bpm, const AlertPolicy& policy,
                                         const std::string& location, std::int64_t timestamp) {
  if (!(bpm > 0.0) || !std::isfinite(bpm)) throw std::invalid_argument("bpm must be positive");
  policy.validate();
  const bool low = policy.inclusive_bounds ? bpm <= policy.low_bpm : bpm < policy.low_bpm;
  const bool high = policy.inclusive_bounds ? bpm >= policy.high_bpm : bpm > policy.high_bpm;
  if (!low && !high) return std::nullopt;

  AlertEvent event;
  event.bpm = bpm;
  event.location = location;
  event.timestamp = timestamp;
  event.message = "abnormal heart rate " + format_number(bpm) + " bpm " +
                  (low ? "below low threshold " + format_number(policy.low_bpm)
                       : "above high threshold " + format_number(policy.high_bpm)) +
                  " bpm";
  return event;
}

std::string encode_alert(const AlertEvent& alert) {
  return "{\"alert\":" + quote(alert.message) + ",\"bpm\":" + format_number(alert.bpm) +
         ",\"location\":" + quote(alert.location) +
         ",\"timestamp\":" + std::to_string(alert.timestamp) + "}";
}

FileSink::FileSink(std::string path, int max_attempts)
    : path_(std::move(path)), max_attempts_(std::max(1, max_attempts)) {}

DeliveryReceipt FileSink::publish(std::string_view payload) {
  std::lock_guard lock(mutex_);
  std::string line(payload);
  line += '\n';
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) continue;
    // One write of the complete line; nothing is emitted before the open succeeds.
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (out) return {name(), line.size(), attempt};
  }
  throw DeliveryFailed("delivery to " + name() + " failed after " + std::to_string(max_attempts_) +
                           " attempts",
                       max_attempts_);
}

DeliveryReceipt StdoutSink::publish(std::string_view payload) {
  std::lock_guard lock(mutex_);
  std::cout << payload << '\n' << std::flush;
  if (!std::cout) throw DeliveryFailed("delivery to stdout failed", 1);
  return {name(), payload.size() + 1, 1};
}

HttpSink::HttpSink(int port, int max_attempts) : port_(port), max_attempts_(std::max(1, max_attempts)) {
  if (port <= 0 || port > 65535) throw std::invalid_argument("http sink port out of range");
}

DeliveryReceipt HttpSink::publish(std::string_view payload) {
  std::lock_guard lock(mutex_);
  httplib::Client client("127.0.0.1", port_);
  client.set_connection_timeout(1, 0);
  client.set_read_timeout(2, 0);
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    auto res = client.Post("/telemetry", std::string(payload), "application/json");
    if (res && res->status == 200) return {name(), payload.size(), attempt};
  }
  throw DeliveryFailed("delivery to " + name() + " failed after " + std::to_string(max_attempts_) +
                           " attempts",
                       max_attempts_);
}

struct LoopbackReceiver::Impl {
  httplib::Server server;
  std::thread thread;
  mutable std::mutex mutex;
  std::vector<std::string> payloads;
};

LoopbackReceiver::LoopbackReceiver(int port) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/telemetry", [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(impl->mutex);
      impl->payloads.push_back(req.body);
    }
    res.set_content("ok", "text/plain");
  });
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("loopback receiver could not bind to port " + std::to_string(port));
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

LoopbackReceiver::~LoopbackReceiver() { stop(); }

void LoopbackReceiver::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::vector<std::string> LoopbackReceiver::payloads() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->payloads;
}

std::unique_ptr<Sink> make_sink(std::string_view spec) {
  if (spec == "stdout") return std::make_unique<StdoutSink>();
  if (spec.starts_with("file:") && spec.size() > 5) {
    return std::make_unique<FileSink>(std::string(spec.substr(5)));
  }
  if (spec.starts_with("http:")) {
    int port = 0;
    const auto digits = spec.substr(5);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return std::make_unique<HttpSink>(port);
  }
  throw std::invalid_argument("sink must be file:<path>, stdout or http:<port>, got '" +
                              std::string(spec) + "'");
}

DeliveryReceipt publish(Sink& sink, std::string_view payload) { return sink.publish(payload); }

RetrieveResult retrieve_records(const std::string& source_path) {
  std::ifstream in(source_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + source_path + "' for reading");
  RetrieveResult result;
  std::vector<TelemetryRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      records.push_back(decode_record(line));
    } catch (const std::invalid_argument&) {
      ++result.warnings;
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const TelemetryRecord& a, const TelemetryRecord& b) { return a.timestamp < b.timestamp; });
  for (const auto& rec : records) result.ecg.insert(result.ecg.end(), rec.ecg.begin(), rec.ecg.end());
  result.records = records.size();
  result.samples = result.ecg.size();
  return result;
}

RetrieveResult retrieve_and_plot(const std::string& source_path, const std::string& svg_path,
                                 int fb_width, int fb_height) {
  RetrieveResult result = retrieve_records(source_path);
  export_svg(svg_path, render_svg(std::span<const double>(result.ecg), fb_width, fb_height));
  return result;
}

}  // namespace ecgmon
