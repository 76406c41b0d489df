#include "ecgmon/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace ecgmon {

Framebuffer::Framebuffer(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("framebuffer size must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

bool Framebuffer::get(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  return pixels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)] != 0;
}

void Framebuffer::set(int x, int y, bool on) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  pixels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
          static_cast<std::size_t>(x)] = on ? 1 : 0;
  if (dirty_.empty()) {
    dirty_ = {x, y, x, y};
  } else {
    dirty_.x0 = std::min(dirty_.x0, x);
    dirty_.y0 = std::min(dirty_.y0, y);
    dirty_.x1 = std::max(dirty_.x1, x);
    dirty_.y1 = std::max(dirty_.y1, y);
  }
}

void Framebuffer::clear() {
  std::fill(pixels_.begin(), pixels_.end(), 0);
  dirty_ = {0, 0, width_ - 1, height_ - 1};
}

std::size_t Framebuffer::count_set() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), 1));
}

PlotTrace map_to_trace(std::span<const double> values, int fb_width, int fb_height, double v_min,
                       double v_max) {
  if (fb_width <= 0 || fb_height <= 0) throw std::invalid_argument("trace size must be positive");
  if (!(v_max > v_min) || !std::isfinite(v_min) || !std::isfinite(v_max)) {
    throw std::invalid_argument("value range must satisfy v_min < v_max");
  }
  PlotTrace trace;
  trace.height = fb_height;
  trace.v_min = v_min;
  trace.v_max = v_max;
  if (values.empty()) return trace;

  const std::size_t n = values.size();
  const double span = v_max - v_min;
  const int top = fb_height - 1;
  trace.rows.resize(static_cast<std::size_t>(fb_width));
  for (int c = 0; c < fb_width; ++c) {
    // Stride decimation: column c shows sample floor(c * n / width).
    const std::size_t idx = static_cast<std::size_t>(c) * n / static_cast<std::size_t>(fb_width);
    const double scaled = std::round((values[idx] - v_min) / span * top);
    const int level = static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(top)));
    trace.rows[static_cast<std::size_t>(c)] = top - level;
  }
  return trace;
}

PlotTrace map_to_trace(const SampleFrame& frame, int fb_width, int fb_height, double v_min,
                       double v_max) {
  return map_to_trace(std::span<const double>(frame.values), fb_width, fb_height, v_min, v_max);
}

std::pair<double, double> auto_range(std::span<const double> values) {
  if (values.empty()) return {-1.0, 1.0};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mx > *mn) return {*mn, *mx};
  return {*mn - 1.0, *mx + 1.0};
}

namespace {

void line(Framebuffer& fb, int x0, int y0, int x1, int y1, bool on) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    fb.set(x0, y0, on);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void plot_polyline(Framebuffer& fb, const PlotTrace& trace, bool on) {
  const auto& rows = trace.rows;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const int x = static_cast<int>(c);
    if (c == 0) {
      fb.set(x, rows[0], on);
    } else {
      line(fb, x - 1, rows[c - 1], x, rows[c], on);
    }
  }
}

Framebuffer& draw_trace(Framebuffer& fb, const std::optional<PlotTrace>& old, const PlotTrace& next) {
  if (old) plot_polyline(fb, *old, false);
  plot_polyline(fb, next, true);
  return fb;
}

std::string render_svg(const PlotTrace& trace, int fb_width, int fb_height) {
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(fb_width) + "\" height=\"" + std::to_string(fb_height) +
         "\" viewBox=\"0 0 " + std::to_string(fb_width) + " " + std::to_string(fb_height) + "\">\n";
  svg += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  for (std::size_t c = 0; c < trace.rows.size(); ++c) {
    if (c > 0) svg += ' ';
    svg += std::to_string(c);
    svg += ',';
    svg += std::to_string(trace.rows[c]);
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

std::string render_svg(std::span<const double> values, int fb_width, int fb_height) {
  const auto [lo, hi] = auto_range(values);
  return render_svg(map_to_trace(values, fb_width, fb_height, lo, hi), fb_width, fb_height);
}

void export_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string export_ascii(const Framebuffer& fb) {
  std::string text;
  for (int y = 0; y < fb.height(); y += 2) {
    for (int x = 0; x < fb.width(); ++x) {
      const bool top = fb.get(x, y);
      const bool bottom = fb.get(x, y + 1);
      text += top && bottom ? ':' : top ? '\'' : bottom ? '.' : ' ';
    }
    text += '\n';
  }
  return text;
}

}  // namespace ecgmon
