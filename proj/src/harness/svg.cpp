#include "signflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace signflow {

namespace {

constexpr double kPanelW = 520.0;
constexpr double kPanelH = 380.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void pad() {
    if (!valid()) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12 * (1.0 + std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void render_panel(std::string& out, const SvgPanel& panel, double ox) {
  Range xr;
  Range yr;
  for (const auto& s : panel.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (panel.log_y && !(s.y[k] > 0.0)) continue;
      xr.add(s.x[k]);
      yr.add(panel.log_y ? std::log10(s.y[k]) : s.y[k]);
    }
  }
  xr.pad();
  if (panel.log_y && yr.valid()) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::ceil(yr.hi);
  }
  yr.pad();
  const double pw = kPanelW - kLeft - kRight;
  const double ph = kPanelH - kTop - kBottom;
  auto px = [&](double x) { return ox + kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  out += "<g class=\"panel\">\n";
  out += "<text x=\"" + num(ox + kPanelW / 2) + "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"14\">" + xml_escape(panel.title) + "</text>\n";
  out += "<rect x=\"" + num(ox + kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Y ticks: decades on log axes, five even ticks otherwise.
  std::vector<double> yticks;
  if (panel.log_y) {
    const double span = yr.hi - yr.lo;
    const int stride = std::max(1, static_cast<int>(std::ceil(span / 8.0)));
    for (double e = std::ceil(yr.lo); e <= yr.hi + 1e-9; e += stride) yticks.push_back(e);
  } else {
    for (int k = 0; k <= 4; ++k) yticks.push_back(yr.lo + (yr.hi - yr.lo) * k / 4.0);
  }
  for (double t : yticks) {
    const std::string label = panel.log_y ? "1e" + tick_label(t) : tick_label(t);
    out += "<line x1=\"" + num(ox + kLeft - 4) + "\" y1=\"" + num(py(t)) + "\" x2=\"" +
           num(ox + kLeft) + "\" y2=\"" + num(py(t)) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + num(ox + kLeft - 6) + "\" y=\"" + num(py(t) + 4) +
           "\" text-anchor=\"end\" font-size=\"10\">" + xml_escape(label) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double t = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 16) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + xml_escape(tick_label(t)) + "</text>\n";
  }
  out += "<text x=\"" + num(ox + kLeft + pw / 2) + "\" y=\"" + num(kPanelH - 10) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + xml_escape(panel.x_label) + "</text>\n";
  out += "<text x=\"" + num(ox + 16) + "\" y=\"" + num(kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " + num(ox + 16) +
         " " + num(kTop + ph / 2) + ")\">" + xml_escape(panel.y_label) + "</text>\n";

  for (std::size_t si = 0; si < panel.series.size(); ++si) {
    const auto& s = panel.series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (panel.log_y && !(s.y[k] > 0.0)) continue;
      const double y = panel.log_y ? std::log10(s.y[k]) : s.y[k];
      if (!points.empty()) points += ' ';
      points += num(px(s.x[k])) + "," + num(py(y));
    }
    out += "<polyline data-series=\"" + xml_escape(s.name) + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"";
    if (s.dashed) out += " stroke-dasharray=\"5,3\"";
    out += " points=\"" + points + "\"/>\n";
    const double ly = kTop + 14 + 14 * static_cast<double>(si);
    out += "<text x=\"" + num(ox + kLeft + pw - 6) + "\" y=\"" + num(ly) +
           "\" text-anchor=\"end\" font-size=\"11\" fill=\"" + color + "\">" +
           xml_escape(s.name) + "</text>\n";
  }
  out += "</g>\n";
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string render_svg(const std::vector<SvgPanel>& panels) {
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(kPanelH) + "\" viewBox=\"0 0 " + num(width) + " " + num(kPanelH) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    render_panel(out, panels[p], kPanelW * static_cast<double>(p));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace signflow
