#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecgmon {

struct TelemetryRecord {
  std::string device_id;
  std::int64_t timestamp = 0;  // s since epoch
  std::optional<double> bpm;   // encoded as null when absent
  std::string location;
  std::vector<double> ecg;

  bool operator==(const TelemetryRecord&) const = default;
};

inline constexpr std::size_t kDefaultMaxEcgSamples = 5000;

class PayloadTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Canonical JSON: keys device_id, timestamp, bpm, location, ecg in that order,
// no whitespace, shortest round-trip numbers.
std::string encode_record(const TelemetryRecord& rec,
                          std::size_t max_ecg = kDefaultMaxEcgSamples);
// Throws std::invalid_argument on malformed input or a schema mismatch.
TelemetryRecord decode_record(std::string_view json);

std::string format_number(double value);

struct AlertPolicy {
  double low_bpm = 50.0;
  double high_bpm = 120.0;
  // When true a reading equal to a bound also alerts.
  bool inclusive_bounds = false;

  void validate() const;
};

struct AlertEvent {
  double bpm = 0.0;
  std::string message;
  std::string location;
  std::int64_t timestamp = 0;
};

std::optional<AlertEvent> evaluate_alert(double bpm, const AlertPolicy& policy,
                                         const std::string& location, std::int64_t timestamp = 0);
std::string encode_alert(const AlertEvent& alert);

struct DeliveryReceipt {
  std::string sink;
  std::size_t bytes = 0;
  int attempts = 0;
};

class DeliveryFailed : public std::runtime_error {
 public:
  DeliveryFailed(const std::string& what, int attempts)
      : std::runtime_error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// Destination for one-payload-per-line delivery. Implementations serialize
// concurrent publish calls.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual DeliveryReceipt publish(std::string_view payload) = 0;
  virtual std::string name() const = 0;
};

class FileSink : public Sink {
 public:
  explicit FileSink(std::string path, int max_attempts = 3);
  DeliveryReceipt publish(std::string_view payload) override;
  std::string name() const override { return "file:" + path_; }

 private:
  std::string path_;
  int max_attempts_;
  std::mutex mutex_;
};

class StdoutSink : public Sink {
 public:
  DeliveryReceipt publish(std::string_view payload) override;
  std::string name() const override { return "stdout"; }

 private:
  std::mutex mutex_;
};

// HTTP POST of each payload to http://127.0.0.1:<port>/telemetry.
class HttpSink : public Sink {
 public:
  explicit HttpSink(int port, int max_attempts = 3);
  DeliveryReceipt publish(std::string_view payload) override;
  std::string name() const override { return "http:" + std::to_string(port_); }

 private:
  int port_;
  int max_attempts_;
  std::mutex mutex_;
};

// In-process HTTP listener recording every POSTed body in arrival order.
class LoopbackReceiver {
 public:
  // port 0 picks a free port.
  explicit LoopbackReceiver(int port = 0);
  ~LoopbackReceiver();
  LoopbackReceiver(const LoopbackReceiver&) = delete;
  LoopbackReceiver& operator=(const LoopbackReceiver&) = delete;

  int port() const noexcept { return port_; }
  std::vector<std::string> payloads() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

// Parses "file:<path>", "stdout" or "http:<port>".
std::unique_ptr<Sink> make_sink(std::string_view spec);

DeliveryReceipt publish(Sink& sink, std::string_view payload);

struct RetrieveResult {
  std::size_t records = 0;
  std::size_t samples = 0;
  std::size_t warnings = 0;
  std::vector<double> ecg;  // concatenated in timestamp order
};

// Reads JSON lines, skips malformed ones (counted as warnings), orders records
// by timestamp and returns the concatenated ECG.
RetrieveResult retrieve_records(const std::string& source_path);
// retrieve_records followed by an auto-scaled SVG render to `svg_path`.
RetrieveResult retrieve_and_plot(const std::string& source_path, const std::string& svg_path,
                                 int fb_width = 128, int fb_height = 64);

}  // namespace ecgmon
