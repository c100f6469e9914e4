#include "weakshot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "weakshot/errors.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt_tick(double v) {
  // Ticks get a short fixed representation; data fidelity does not matter here.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<SvgSeries>& series) {
  if (series.empty()) throw config_error("svg plot: need at least one series");
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw config_error("svg plot: series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  if (first) throw config_error("svg plot: no finite data points");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " " << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n";

  // Axes with 5 ticks per side.
  f << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
    << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    f << "<line x1=\"" << px(fx) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << px(fx) << "\" y2=\""
      << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">"
      << fmt_tick(fx) << "</text>\n";
    f << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft << "\" y2=\""
      << py(fy) << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">"
      << fmt_tick(fy) << "</text>\n";
  }
  f << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
    << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  f << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      f << fmt_double(px(s.x[i])) << ',' << fmt_double(py(s.y[i])) << ' ';
    }
    f << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(si);
    f << "<line x1=\"" << kLeft + plot_w - 110 << "\" y1=\"" << ly << "\" x2=\""
      << kLeft + plot_w - 90 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"1.5\"/>\n";
    f << "<text x=\"" << kLeft + plot_w - 85 << "\" y=\"" << ly + 4 << "\">" << s.label
      << "</text>\n";
  }
  f << "</svg>\n";
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

}  // namespace weakshot
