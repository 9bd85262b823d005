#pragma once

#include <string>
#include <vector>

namespace nfpe {

struct PlotSeries {
  std::string label;
  std::vector<double> values;
};

/// Static SVG with one panel per series, all sharing the abscissa `t`.
/// Output depends only on the inputs (fixed-precision labels, no timestamps).
std::string svg_panels(const std::string& title, const std::vector<double>& t,
                       const std::vector<PlotSeries>& series);

}  // namespace nfpe
