#pragma once

#include <string>
#include <vector>

namespace signflow {

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct SvgPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = true;  // log10 axis; non-positive values are dropped
  std::vector<SvgSeries> series;
};

/// Self-contained SVG with the panels side by side. Each series becomes a <polyline> carrying
/// a data-series attribute with its name.
std::string render_svg(const std::vector<SvgPanel>& panels);

std::string xml_escape(const std::string& text);

}  // namespace signflow
