#pragma once

#include <string>
#include <vector>

namespace weakshot {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Writes a self-contained SVG line plot (axes, ticks, legend, one polyline per series).
void write_line_plot(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace weakshot
