#include "bxn/svg.hpp"

#include <algorithm>
#include <cmath>

#include "bxn/csv.hpp"
#include "bxn/errors.hpp"

namespace bxn {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 56.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                          "#59a14f", "#b07aa1", "#edc948", "#9c755f"};
constexpr int kPaletteSize = 8;

std::string num(double v) { return format_number(std::round(v * 100.0) / 100.0); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double exp10 = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    const double cand = m * exp10;
    if (cand >= v - 1e-12) return cand;
  }
  return 10.0 * exp10;
}

}  // namespace

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& group_labels,
                            const std::vector<BarSeries>& series, double y_max) {
  if (group_labels.empty() || series.empty())
    throw ContractError("grouped_bar_svg: need at least one group and one series");
  const std::size_t G = group_labels.size();
  for (const auto& s : series) {
    if (s.values.size() != G)
      throw ContractError("grouped_bar_svg: series '" + s.label + "' has " +
                          std::to_string(s.values.size()) + " values for " +
                          std::to_string(G) + " groups");
    if (!s.errors.empty() && s.errors.size() != G)
      throw ContractError("grouped_bar_svg: series '" + s.label + "' error arity mismatch");
  }

  if (y_max <= 0.0) {
    double peak = 0.0;
    for (const auto& s : series)
      for (std::size_t g = 0; g < G; ++g)
        peak = std::max(peak, s.values[g] + (s.errors.empty() ? 0.0 : s.errors[g]));
    y_max = nice_ceiling(peak);
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double y0 = kTop + plot_h;
  auto ypos = [&](double v) { return y0 - plot_h * (v / y_max); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n";
  svg += "<rect width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) +
         "\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
         escape(title) + "</text>\n";

  // y axis: 5 gridlines + tick labels
  for (int t = 0; t <= 5; ++t) {
    const double v = y_max * t / 5.0;
    const double y = ypos(v);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kLeft + plot_w) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
           format_number(std::round(v * 1000.0) / 1000.0) + "</text>\n";
  }
  svg += "<text x=\"18\" y=\"" + num(kTop + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " +
         num(kTop + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";

  // bars
  const std::size_t S = series.size();
  const double group_w = plot_w / static_cast<double>(G);
  const double slot_w = group_w * 0.84 / static_cast<double>(S);
  for (std::size_t g = 0; g < G; ++g) {
    const double gx = kLeft + group_w * (static_cast<double>(g) + 0.08);
    for (std::size_t s = 0; s < S; ++s) {
      const double v = std::clamp(series[s].values[g], 0.0, y_max);
      const double x = gx + slot_w * static_cast<double>(s);
      const double y = ypos(v);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(slot_w * 0.9) + "\" height=\"" + num(y0 - y) + "\" fill=\"" +
             kPalette[s % kPaletteSize] + "\"/>\n";
      if (!series[s].errors.empty() && series[s].errors[g] > 0.0) {
        const double lo = ypos(std::clamp(v - series[s].errors[g], 0.0, y_max));
        const double hi = ypos(std::clamp(v + series[s].errors[g], 0.0, y_max));
        const double cx = x + slot_w * 0.45;
        svg += "<line x1=\"" + num(cx) + "\" y1=\"" + num(lo) + "\" x2=\"" + num(cx) +
               "\" y2=\"" + num(hi) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
      }
    }
    svg += "<text x=\"" + num(gx + group_w * 0.42) + "\" y=\"" + num(y0 + 18) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           escape(group_labels[g]) + "</text>\n";
  }
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y0) + "\" x2=\"" +
         num(kLeft + plot_w) + "\" y2=\"" + num(y0) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // legend, one swatch per series
  double lx = kLeft + 8.0;
  const double ly = kTop - 16.0;
  for (std::size_t s = 0; s < S; ++s) {
    svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + kPalette[s % kPaletteSize] + "\"/>\n";
    svg += "<text x=\"" + num(lx + 16) + "\" y=\"" + num(ly + 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].label) +
           "</text>\n";
    lx += 24.0 + 7.2 * static_cast<double>(series[s].label.size());
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace bxn
