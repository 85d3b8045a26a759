#pragma once

// Tiny static SVG line/marker plots: stacked panels, linear or log-x axes.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cvfad::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool markers = false;  // draw points instead of a polyline
};

struct VLine {
  double x = 0.0;
  std::string label;
};

struct Panel {
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  std::optional<std::pair<double, double>> xlim;
  std::optional<std::pair<double, double>> ylim;
  std::vector<Series> series;
  std::vector<VLine> vlines;
};

struct Figure {
  std::string title;
  int width = 900;
  int panel_height = 320;
  std::vector<Panel> panels;
};

// Non-finite samples break polylines and are skipped as markers.
std::string render(const Figure& fig);

// Qualitative palette, cycles after ten entries.
std::string palette(std::size_t i);
// Blue-to-red ramp for t in [0, 1].
std::string ramp(double t);

}  // namespace cvfad::svg
