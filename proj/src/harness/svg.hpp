#pragma once

#include <string>
#include <vector>

namespace ncdecay::harness {

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

/// Minimal log-log / semilog line plot. Non-positive values are skipped on log axes.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series, bool log_x, bool log_y);

}  // namespace ncdecay::harness
