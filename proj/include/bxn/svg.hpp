#pragma once

#include <string>
#include <vector>

namespace bxn {

/// One bar series (a model): one value per group (subtrial), optional
/// symmetric error half-widths for whiskers.
struct BarSeries {
  std::string label;
  std::vector<double> values;
  std::vector<double> errors;  // empty or same length as values
};

/// Static grouped bar chart. Groups along x, one bar per series within each
/// group, legend at the top right. y axis starts at 0; y_max <= 0 picks a
/// tick-aligned ceiling from the data. Output depends only on the arguments.
std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& group_labels,
                            const std::vector<BarSeries>& series, double y_max = 0.0);

}  // namespace bxn
