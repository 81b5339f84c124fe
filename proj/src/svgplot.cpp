#include "dualprox/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualprox {

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<PlotSeries>& series,
                              bool log_y) {
  double xmin = 0, xmax = 1, ymin = log_y ? 1e300 : 0, ymax = -1e300;
  bool first = true;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      const double yv = s.y[i];
      if (log_y && !(yv > 0.0)) continue;
      if (first) {
        xmin = xmax = s.x[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
      }
      ymin = std::min(ymin, yv);
      ymax = std::max(ymax, yv);
      if (!s.band_lo.empty() && (!log_y || s.band_lo[i] > 0.0))
        ymin = std::min(ymin, s.band_lo[i]);
      if (!s.band_hi.empty()) ymax = std::max(ymax, s.band_hi[i]);
    }
  }
  if (ymax <= ymin) ymax = ymin + 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (log_y) {
    ymin = std::pow(10.0, std::floor(std::log10(ymin)));
    ymax = std::pow(10.0, std::ceil(std::log10(ymax)));
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + plot_w * (x - xmin) / (xmax - xmin); };
  const auto sy = [&](double y) {
    double t;
    if (log_y) {
      y = std::max(y, ymin);
      t = (std::log10(y) - std::log10(ymin)) / (std::log10(ymax) - std::log10(ymin));
    } else {
      t = (y - ymin) / (ymax - ymin);
    }
    return kTop + plot_h * (1.0 - t);
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' font-size='15' "
      << "font-family='sans-serif'>" << title << "</text>\n";

  // axes
  svg << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
      << kHeight - kBottom << "' stroke='black'/>\n";
  svg << "<line x1='" << kLeft << "' y1='" << kHeight - kBottom << "' x2='" << kWidth - kRight
      << "' y2='" << kHeight - kBottom << "' stroke='black'/>\n";

  // y ticks
  if (log_y) {
    for (double v = ymin; v <= ymax * 1.0001; v *= 10.0) {
      const double yy = sy(v);
      svg << "<line x1='" << kLeft - 4 << "' y1='" << yy << "' x2='" << kWidth - kRight << "' y2='"
          << yy << "' stroke='#dddddd'/>\n";
      svg << "<text x='" << kLeft - 8 << "' y='" << yy + 4
          << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(v)
          << "</text>\n";
    }
  } else {
    for (int k = 0; k <= 5; ++k) {
      const double v = ymin + (ymax - ymin) * k / 5.0;
      const double yy = sy(v);
      svg << "<line x1='" << kLeft - 4 << "' y1='" << yy << "' x2='" << kWidth - kRight << "' y2='"
          << yy << "' stroke='#dddddd'/>\n";
      svg << "<text x='" << kLeft - 8 << "' y='" << yy + 4
          << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(v)
          << "</text>\n";
    }
  }
  // x ticks
  for (int k = 0; k <= 5; ++k) {
    const double v = xmin + (xmax - xmin) * k / 5.0;
    const double xx = sx(v);
    svg << "<text x='" << xx << "' y='" << kHeight - kBottom + 18
        << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << fmt(v)
        << "</text>\n";
  }
  svg << "<text x='" << kWidth / 2 << "' y='" << kHeight - 12
      << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << x_label
      << "</text>\n";
  svg << "<text x='16' y='" << kHeight / 2 << "' text-anchor='middle' font-size='12' "
      << "font-family='sans-serif' transform='rotate(-90 16 " << kHeight / 2 << ")'>" << y_label
      << "</text>\n";

  int color = 0;
  int legend_y = kTop + 6;
  for (const auto& s : series) {
    const char* col = kColors[color % 8];
    ++color;
    if (!s.band_lo.empty() && s.band_lo.size() == s.x.size()) {
      svg << "<polygon fill='" << col << "' fill-opacity='0.15' stroke='none' points='";
      for (size_t i = 0; i < s.x.size(); ++i) svg << sx(s.x[i]) << "," << sy(s.band_hi[i]) << " ";
      for (size_t i = s.x.size(); i-- > 0;) svg << sx(s.x[i]) << "," << sy(s.band_lo[i]) << " ";
      svg << "'/>\n";
    }
    svg << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i) svg << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    svg << "'/>\n";
    svg << "<rect x='" << kWidth - kRight - 150 << "' y='" << legend_y - 9
        << "' width='18' height='4' fill='" << col << "'/>\n";
    svg << "<text x='" << kWidth - kRight - 126 << "' y='" << legend_y
        << "' font-size='11' font-family='sans-serif'>" << s.label << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dualprox
