#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "ecgmon/render.hpp"
#include "oracles.hpp"

namespace ecgmon {
namespace {

std::vector<int> svg_points(const std::string& svg, std::vector<int>* cols = nullptr) {
  const std::regex attr("points=\"([^\"]*)\"");
  std::smatch m;
  EXPECT_TRUE(std::regex_search(svg, m, attr));
  std::vector<int> rows;
  std::istringstream in(m[1].str());
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    if (cols) cols->push_back(std::stoi(pair.substr(0, comma)));
    rows.push_back(std::stoi(pair.substr(comma + 1)));
  }
  return rows;
}

PlotTrace random_trace(std::mt19937_64& gen, int w, int h) {
  std::uniform_real_distribution<double> v(-0.5, 1.5);
  std::vector<double> values(static_cast<std::size_t>(w));
  for (auto& x : values) x = v(gen);
  return map_to_trace(values, w, h, 0.0, 1.0);
}

TEST(MapToTrace, ConstantMinimumIsBottomRow) {
  const std::vector<double> v(300, -2.0);
  const auto t = map_to_trace(v, 128, 64, -2.0, 2.0);
  ASSERT_EQ(t.rows.size(), 128u);
  for (int r : t.rows) EXPECT_EQ(r, 63);
}

TEST(MapToTrace, ConstantMidpointIsMiddleRow) {
  const std::vector<double> v(50, 0.5);
  const auto t = map_to_trace(v, 20, 65, 0.0, 1.0);
  for (int r : t.rows) EXPECT_EQ(r, 32);
}

TEST(MapToTrace, RampIsMonotoneStaircase) {
  const int w = 128;
  std::vector<double> v(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i) / (w - 1);
  const auto t = map_to_trace(v, w, 64, 0.0, 1.0);
  EXPECT_EQ(t.rows.front(), 63);
  EXPECT_EQ(t.rows.back(), 0);
  for (int i = 0; i < w; ++i) {
    const int expected = 63 - static_cast<int>(std::lround(63.0 * i / (w - 1)));
    EXPECT_EQ(t.rows[static_cast<std::size_t>(i)], expected);
    if (i > 0) {
      EXPECT_LE(t.rows[static_cast<std::size_t>(i)], t.rows[static_cast<std::size_t>(i - 1)]);
    }
  }
}

TEST(MapToTrace, ClampsAndDecimates) {
  const std::vector<double> v{-5.0, 0.0, 5.0, 0.5};
  const auto t = map_to_trace(v, 2, 10, 0.0, 1.0);
  // Columns show samples 0 and 2.
  EXPECT_EQ(t.rows, (std::vector<int>{9, 0}));
}

TEST(MapToTrace, DegenerateRangeRejected) {
  const std::vector<double> v{1.0};
  EXPECT_THROW(map_to_trace(v, 10, 10, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(map_to_trace(v, 0, 10, 0.0, 1.0), std::invalid_argument);
}

TEST(MapToTrace, MonotoneInValue) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> d(-1.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = d(gen), b = d(gen);
    const std::vector<double> lo{std::min(a, b)}, hi{std::max(a, b)};
    EXPECT_GE(map_to_trace(lo, 1, 64, 0.0, 1.0).rows[0], map_to_trace(hi, 1, 64, 0.0, 1.0).rows[0]);
  }
}

TEST(DrawTrace, SmallPolylineHandTrace) {
  PlotTrace t;
  t.rows = {0, 3};
  t.height = 4;
  Framebuffer fb(2, 4);
  draw_trace(fb, std::nullopt, t);
  EXPECT_EQ(fb.count_set(), 4u);
  EXPECT_TRUE(fb.get(0, 0));
  EXPECT_TRUE(fb.get(0, 1));
  EXPECT_TRUE(fb.get(1, 2));
  EXPECT_TRUE(fb.get(1, 3));
}

TEST(DrawTrace, PolylineIsConnectedPerColumn) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_trace(gen, 64, 32);
    Framebuffer fb(64, 32);
    draw_trace(fb, std::nullopt, t);
    for (int x = 0; x < 64; ++x) {
      ASSERT_TRUE(fb.get(x, t.rows[static_cast<std::size_t>(x)]));
      // Set pixels of a column form one contiguous run.
      int runs = 0;
      for (int y = 0; y < 32; ++y) {
        if (fb.get(x, y) && (y == 0 || !fb.get(x, y - 1))) ++runs;
      }
      EXPECT_EQ(runs, 1);
      if (x > 0) {
        // Neighbouring columns touch (8-connectivity).
        bool touches = false;
        for (int y = 0; y < 32 && !touches; ++y) {
          touches = fb.get(x, y) && (fb.get(x - 1, y) || fb.get(x - 1, y - 1) || fb.get(x - 1, y + 1));
        }
        EXPECT_TRUE(touches);
      }
    }
  }
}

TEST(DrawTrace, RedrawSameTraceIsIdentity) {
  std::mt19937_64 gen(1);
  const auto a = random_trace(gen, 128, 64);
  Framebuffer fb;
  draw_trace(fb, std::nullopt, a);
  const Framebuffer before = fb;
  draw_trace(fb, a, a);
  EXPECT_EQ(fb, before);
}

TEST(DrawTrace, IncrementalEqualsFreshDraw) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    Framebuffer fb;
    std::optional<PlotTrace> prev;
    PlotTrace last;
    for (int step = 0; step < 10; ++step) {
      last = random_trace(gen, 128, 64);
      draw_trace(fb, prev, last);
      prev = last;
    }
    Framebuffer fresh;
    draw_trace(fresh, std::nullopt, last);
    EXPECT_EQ(fb, fresh);
  }
}

TEST(Framebuffer, OutOfBoundsWritesIgnored) {
  Framebuffer fb(8, 8);
  fb.set(-1, 0, true);
  fb.set(8, 3, true);
  fb.set(2, 100, true);
  EXPECT_EQ(fb.count_set(), 0u);
  EXPECT_TRUE(fb.dirty().empty());
  fb.set(2, 3, true);
  fb.set(5, 1, true);
  EXPECT_EQ(fb.dirty().x0, 2);
  EXPECT_EQ(fb.dirty().y0, 1);
  EXPECT_EQ(fb.dirty().x1, 5);
  EXPECT_EQ(fb.dirty().y1, 3);
  EXPECT_FALSE(fb.get(100, 100));
  EXPECT_THROW(Framebuffer(0, 4), std::invalid_argument);
}

TEST(Svg, DeterministicAndMatchesTrace) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.02 * static_cast<double>(i));
  const auto a = render_svg(v);
  const auto b = render_svg(v);
  EXPECT_EQ(a, b);
  const auto [lo, hi] = auto_range(v);
  std::vector<int> cols;
  EXPECT_EQ(svg_points(a, &cols), map_to_trace(v, 128, 64, lo, hi).rows);
  for (std::size_t c = 0; c < cols.size(); ++c) EXPECT_EQ(cols[c], static_cast<int>(c));
  EXPECT_NE(a.find("version=\"1.1\""), std::string::npos);
  EXPECT_NE(a.find("viewBox=\"0 0 128 64\""), std::string::npos);
}

TEST(Svg, EmptyFrameGivesEmptyPolyline) {
  const auto svg = render_svg(std::vector<double>{});
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("points=\"\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, TwoHertzSineShowsTwoPeaks) {
  std::vector<double> v(500);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(2 * oracle::kPi * 2.0 * static_cast<double>(i) / 500.0);
  auto rows = svg_points(render_svg(v));
  // Screen rows grow downwards; peaks are minima of the row index.
  for (auto& r : rows) r = -r;
  EXPECT_EQ(oracle::count_local_maxima(rows), 2u);
}

TEST(Svg, ExportWritesFileAndReportsPath) {
  const auto path = (std::filesystem::temp_directory_path() / "ecgmon_render_test.svg").string();
  const auto svg = render_svg(std::vector<double>{0.0, 1.0});
  export_svg(path, svg);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), svg);
  std::filesystem::remove(path);
  try {
    export_svg("/nonexistent-dir/x.svg", svg);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.svg"), std::string::npos);
  }
}

TEST(Ascii, TwoRowsPerCharacter) {
  Framebuffer fb(3, 4);
  fb.set(0, 0, true);
  fb.set(1, 1, true);
  fb.set(2, 0, true);
  fb.set(2, 1, true);
  fb.set(0, 3, true);
  EXPECT_EQ(export_ascii(fb), "'.:\n.  \n");
}

}  // namespace
}  // namespace ecgmon
