#pragma once

#include <string>
#include <vector>

#include "dualprox/common.hpp"

namespace dualprox {

// One labelled curve plus an optional min/max band around it.
struct PlotSeries {
  std::string label;
  Vec x, y;
  Vec band_lo, band_hi;  // empty = no band
};

// Self-contained SVG line chart with a log10 y axis; no external renderer.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<PlotSeries>& series,
                              bool log_y = true);

}  // namespace dualprox
