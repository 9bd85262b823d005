#include "nfpe/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nfpe/errors.hpp"

namespace nfpe {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 220.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kGap = 50.0;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_panels(const std::string& title, const std::vector<double>& t,
                       const std::vector<PlotSeries>& series) {
  for (const auto& s : series)
    if (s.values.size() != t.size()) throw UsageError("svg_panels: series length differs from t");
  const double height = kMarginTop + static_cast<double>(series.size()) * (kPanelHeight + kGap);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
         fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(kWidth / 2, 1) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";

  const double t0 = t.empty() ? 0.0 : t.front();
  const double t1 = t.empty() ? 1.0 : std::max(t.back(), t0 + 1e-300);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const double top = kMarginTop + static_cast<double>(k) * (kPanelHeight + kGap);
    double lo = 0.0, hi = 1.0;
    if (!s.values.empty()) {
      lo = *std::min_element(s.values.begin(), s.values.end());
      hi = *std::max_element(s.values.begin(), s.values.end());
    }
    if (!(hi > lo)) {
      const double pad = std::max(1e-12, std::abs(lo) * 1e-3);
      lo -= pad;
      hi += pad;
    }
    out += "<rect x=\"" + fixed(kMarginLeft, 1) + "\" y=\"" + fixed(top, 1) + "\" width=\"" +
           fixed(plot_w, 1) + "\" height=\"" + fixed(kPanelHeight, 1) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(kMarginLeft - 6, 1) + "\" y=\"" + fixed(top + 10, 1) +
           "\" text-anchor=\"end\">" + sci(hi) + "</text>\n";
    out += "<text x=\"" + fixed(kMarginLeft - 6, 1) + "\" y=\"" + fixed(top + kPanelHeight, 1) +
           "\" text-anchor=\"end\">" + sci(lo) + "</text>\n";
    out += "<text x=\"" + fixed(kMarginLeft, 1) + "\" y=\"" + fixed(top + kPanelHeight + 16, 1) +
           "\">" + sci(t0) + "</text>\n";
    out += "<text x=\"" + fixed(kWidth - kMarginRight, 1) + "\" y=\"" +
           fixed(top + kPanelHeight + 16, 1) + "\" text-anchor=\"end\">" + sci(t1) + "</text>\n";
    out += "<text x=\"" + fixed(kMarginLeft + plot_w / 2, 1) + "\" y=\"" + fixed(top - 6, 1) +
           "\" text-anchor=\"middle\">" + escape(s.label) + " vs t</text>\n";
    out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = kMarginLeft + (t[i] - t0) / (t1 - t0) * plot_w;
      const double y = top + kPanelHeight - (s.values[i] - lo) / (hi - lo) * kPanelHeight;
      if (i) out += ' ';
      out += fixed(x, 2) + ',' + fixed(y, 2);
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace nfpe
