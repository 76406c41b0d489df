#include "ecgmon/frame.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ecgmon {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::Millivolt: return "mV";
    case Unit::Volt: return "V";
    case Unit::AdcCode: return "code";
  }
  return "?";
}

Unit unit_from_string(std::string_view text) {
  if (text == "mV" || text == "mv") return Unit::Millivolt;
  if (text == "V" || text == "v") return Unit::Volt;
  if (text == "code") return Unit::AdcCode;
  throw std::invalid_argument("unknown unit '" + std::string(text) + "'");
}

void SampleFrame::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("sample_rate must be positive");
  }
  if (!std::isfinite(start_time)) throw std::invalid_argument("start_time must be finite");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("non-finite value at sample " + std::to_string(i));
    }
  }
}

void write_csv(std::ostream& out, const SampleFrame& frame) {
  out << "time,value\n";
  char line[64];
  for (std::size_t n = 0; n < frame.values.size(); ++n) {
    std::snprintf(line, sizeof line, "%.9g,%.9g\n", frame.time_at(n), frame.values[n]);
    out << line;
  }
}

void write_csv_file(const std::string& path, const SampleFrame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, frame);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

}  // namespace

SampleFrame read_csv(std::istream& in, Unit unit, std::optional<double> sample_rate) {
  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    double t = 0.0;
    double v = 0.0;
    const bool ok = comma != std::string::npos && parse_double(line.substr(0, comma), t) &&
                    parse_double(line.substr(comma + 1), v);
    if (!ok) {
      if (times.empty() && line_no == 1) continue;  // header
      throw std::invalid_argument("malformed CSV row at line " + std::to_string(line_no));
    }
    times.push_back(t);
    values.push_back(v);
  }

  double rate = 0.0;
  if (sample_rate) {
    rate = *sample_rate;
  } else {
    if (times.size() < 2) {
      throw std::invalid_argument("cannot infer sample rate from fewer than two rows");
    }
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw std::invalid_argument("time column is not increasing");
    rate = static_cast<double>(times.size() - 1) / span;
    const double nearest = std::round(rate);
    if (std::abs(rate - nearest) <= 1e-6 * rate) rate = nearest;
  }
  SampleFrame frame(rate, unit, std::move(values), times.empty() ? 0.0 : times.front());
  frame.validate();
  return frame;
}

SampleFrame read_csv_file(const std::string& path, Unit unit, std::optional<double> sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  try {
    return read_csv(in, unit, sample_rate);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace ecgmon
