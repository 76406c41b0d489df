#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgmon/frame.hpp"

namespace ecgmon {

struct DirtyRegion {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; empty when x1 < x0
  bool empty() const noexcept { return x1 < x0 || y1 < y0; }
};

// Binary pixel grid standing in for the OLED. Row 0 is the top.
class Framebuffer {
 public:
  Framebuffer(int width = 128, int height = 64);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const;
  // Out-of-bounds writes are ignored.
  void set(int x, int y, bool on);
  void clear();

  std::size_t count_set() const;
  const DirtyRegion& dirty() const noexcept { return dirty_; }
  void reset_dirty() noexcept { dirty_ = {}; }

  bool operator==(const Framebuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ && pixels_ == other.pixels_;
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
  DirtyRegion dirty_;
};

// Screen coordinates of a signal: one row per column, larger values higher up.
// An empty `rows` means there was nothing to plot.
struct PlotTrace {
  std::vector<int> rows;
  int height = 0;
  double v_min = 0.0;
  double v_max = 1.0;
};

PlotTrace map_to_trace(std::span<const double> values, int fb_width, int fb_height, double v_min,
                       double v_max);
PlotTrace map_to_trace(const SampleFrame& frame, int fb_width, int fb_height, double v_min,
                       double v_max);

// Range used by the auto-scaled renderers: data min/max, widened by 1 on each
// side when flat.
std::pair<double, double> auto_range(std::span<const double> values);

// Pixels of a trace's polyline, consecutive points joined by Bresenham lines.
void plot_polyline(Framebuffer& fb, const PlotTrace& trace, bool on);

// Erases `old` (pixels and connecting segments) and draws `next`.
Framebuffer& draw_trace(Framebuffer& fb, const std::optional<PlotTrace>& old,
                        const PlotTrace& next);

std::string render_svg(const PlotTrace& trace, int fb_width, int fb_height);
std::string render_svg(std::span<const double> values, int fb_width = 128, int fb_height = 64);
void export_svg(const std::string& path, const std::string& svg);

// Two pixel rows per text line: ' ' none, '\'' top, '.' bottom, ':' both.
std::string export_ascii(const Framebuffer& fb);

}  // namespace ecgmon
