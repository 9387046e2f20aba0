#pragma once
// Deterministic SVG heat-map rendering of scan grids: one rect per cell,
// gray for failed (NaN) cells, a five-stop interpolated color scale with a
// min/max-annotated legend.  Identical grids produce byte-identical output.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "effham/error.hpp"
#include "effham/scan.hpp"

namespace effham::io {

enum class HeatField { Gamma, OneMinusF };

struct HeatmapStyle {
  std::size_t width = 640;
  std::size_t height = 480;
};

namespace detail_svg {

inline std::string fixed2(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  if (res.ec != std::errc{}) throw Error(ErrorCode::IoError, "coordinate formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string general6(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  if (res.ec != std::errc{}) throw Error(ErrorCode::IoError, "label formatting failed");
  return std::string(buf, res.ptr);
}

struct Rgb {
  double r, g, b;
};

inline std::string hex_color(const Rgb& c) {
  const auto channel = [](double v) {
    const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
    static const char* digits = "0123456789abcdef";
    return std::string{digits[q / 16], digits[q % 16]};
  };
  return "#" + channel(c.r) + channel(c.g) + channel(c.b);
}

/// Five fixed anchors, linearly interpolated over t in [0, 1].
inline Rgb color_at(double t) {
  static constexpr std::array<Rgb, 5> stops = {{{68.0, 1.0, 84.0},
                                                {59.0, 82.0, 139.0},
                                                {33.0, 145.0, 140.0},
                                                {94.0, 201.0, 98.0},
                                                {253.0, 231.0, 37.0}}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const std::size_t lo = std::min<std::size_t>(3, static_cast<std::size_t>(pos));
  const double f = pos - static_cast<double>(lo);
  const Rgb& a = stops[lo];
  const Rgb& b = stops[lo + 1];
  return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
}

inline void text(std::string& out, double x, double y, const std::string& anchor,
                 const std::string& s) {
  out += "<text x=\"" + fixed2(x) + "\" y=\"" + fixed2(y) +
         "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"" + anchor + "\">" + s +
         "</text>\n";
}

}  // namespace detail_svg

inline std::string render_heatmap(const ScanGrid& grid, HeatField field,
                                  const HeatmapStyle& style = {}) {
  using namespace detail_svg;
  if (grid.rows == 0 || grid.cols == 0 || grid.cells.empty())
    throw Error(ErrorCode::EmptyGrid, "cannot render an empty scan grid", "grid");

  const auto value_of = [&](const ScanCell& c) {
    return field == HeatField::Gamma ? c.gamma_char : c.one_minus_f;
  };
  const std::string title = field == HeatField::Gamma ? "Gamma" : "1 - F";

  double vmin = 0.0, vmax = 0.0;
  bool seen = false;
  for (const ScanCell& c : grid.cells) {
    const double v = value_of(c);
    if (!std::isfinite(v)) continue;
    vmin = seen ? std::min(vmin, v) : v;
    vmax = seen ? std::max(vmax, v) : v;
    seen = true;
  }
  const double span = (seen && vmax > vmin) ? (vmax - vmin) : 0.0;

  const double w = static_cast<double>(style.width);
  const double h = static_cast<double>(style.height);
  const double left = 70.0, right = 120.0, top = 40.0, bottom = 55.0;
  const double pw = w - left - right, ph = h - top - bottom;
  const std::size_t nrows = grid.rows, ncols = grid.cols;
  const double cw = pw / static_cast<double>(ncols);
  const double ch = ph / static_cast<double>(nrows);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed2(w) + "\" height=\"" +
         fixed2(h) + "\" viewBox=\"0 0 " + fixed2(w) + " " + fixed2(h) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed2(w) + "\" height=\"" + fixed2(h) +
         "\" fill=\"#ffffff\"/>\n";
  text(out, left + pw / 2.0, 24.0, "middle", title);

  // Cells: row index 0 at the bottom so both axes increase away from origin.
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      const double v = value_of(grid.at(i, j));
      std::string fill = "#808080";
      if (std::isfinite(v)) {
        const double t = span > 0.0 ? (v - vmin) / span : 0.0;
        fill = hex_color(color_at(t));
      }
      const double x = left + static_cast<double>(j) * cw;
      const double y = top + ph - static_cast<double>(i + 1) * ch;
      out += "<rect x=\"" + fixed2(x) + "\" y=\"" + fixed2(y) + "\" width=\"" + fixed2(cw) +
             "\" height=\"" + fixed2(ch) + "\" fill=\"" + fill + "\"/>\n";
    }
  }

  // Axis frame and end labels.
  out += "<rect x=\"" + fixed2(left) + "\" y=\"" + fixed2(top) + "\" width=\"" + fixed2(pw) +
         "\" height=\"" + fixed2(ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  text(out, left, top + ph + 16.0, "middle", general6(grid.at(0, 0).dgamma1_end));
  text(out, left + pw, top + ph + 16.0, "middle", general6(grid.at(0, ncols - 1).dgamma1_end));
  text(out, left + pw / 2.0, top + ph + 34.0, "middle", "dgamma1(T)");
  text(out, left - 6.0, top + ph, "end", general6(grid.at(0, 0).gamma1_end));
  text(out, left - 6.0, top + 10.0, "end", general6(grid.at(nrows - 1, 0).gamma1_end));
  text(out, 16.0, top + ph / 2.0, "middle", "gamma1(T)");

  // Legend: a five-stop vertical gradient with min/max annotations.
  const double lx = left + pw + 24.0, lw = 16.0;
  out += "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n";
  for (int s = 0; s < 5; ++s) {
    const double t = static_cast<double>(s) / 4.0;
    out += "<stop offset=\"" + fixed2(t) + "\" stop-color=\"" + hex_color(color_at(t)) +
           "\"/>\n";
  }
  out += "</linearGradient></defs>\n";
  out += "<rect x=\"" + fixed2(lx) + "\" y=\"" + fixed2(top) + "\" width=\"" + fixed2(lw) +
         "\" height=\"" + fixed2(ph) + "\" fill=\"url(#scale)\" stroke=\"#000000\"/>\n";
  text(out, lx + lw + 6.0, top + ph, "start", seen ? general6(vmin) : "n/a");
  text(out, lx + lw + 6.0, top + 10.0, "start", seen ? general6(vmax) : "n/a");

  out += "</svg>\n";
  return out;
}

}  // namespace effham::io
