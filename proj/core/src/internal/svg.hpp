#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ssbench::internal {

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line chart: axes, tick labels at the given x positions, one
// polyline per series, legend in the top-right corner.
void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<LineSeries>& series,
                          const std::vector<double>& x_ticks);

}  // namespace ssbench::internal
