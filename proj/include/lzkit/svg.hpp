#pragma once

#include <string>
#include <vector>

namespace lzkit {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  bool line = false;  // false draws point markers
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<PlotSeries> series;
  int width = 720;
  int height = 480;
};

/// Self-contained SVG document: axes with tick labels, one polyline or
/// marker set per series, and a legend. Log axes drop non-positive values.
std::string render_svg(const PlotSpec& spec);

}  // namespace lzkit
