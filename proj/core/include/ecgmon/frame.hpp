#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecgmon {

enum class Unit { Millivolt, Volt, AdcCode };

std::string_view to_string(Unit unit);
Unit unit_from_string(std::string_view text);

// Fixed-rate time series; everything flowing through the pipeline is one of these.
struct SampleFrame {
  double sample_rate = 0.0;  // Hz
  double start_time = 0.0;   // s
  Unit unit = Unit::Millivolt;
  std::vector<double> values;

  SampleFrame() = default;
  SampleFrame(double rate, Unit u, std::vector<double> v, double t0 = 0.0)
      : sample_rate(rate), start_time(t0), unit(u), values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  double time_at(std::size_t n) const noexcept {
    return start_time + static_cast<double>(n) / sample_rate;
  }
  double duration() const noexcept {
    return static_cast<double>(values.size()) / sample_rate;
  }

  // Throws std::invalid_argument on a non-positive rate or non-finite values.
  void validate() const;
};

// CSV frame format: a `time,value` header followed by one row per sample,
// both columns printed with 9 significant digits.
void write_csv(std::ostream& out, const SampleFrame& frame);
void write_csv_file(const std::string& path, const SampleFrame& frame);

// Reads the CSV format above; the header line is optional. The sample rate is
// inferred from the time column unless `sample_rate` is given. A file with
// fewer than two rows needs an explicit rate.
SampleFrame read_csv(std::istream& in, Unit unit = Unit::Volt,
                     std::optional<double> sample_rate = std::nullopt);
SampleFrame read_csv_file(const std::string& path, Unit unit = Unit::Volt,
                          std::optional<double> sample_rate = std::nullopt);

}  // namespace ecgmon
