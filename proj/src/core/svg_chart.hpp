#pragma once

#include <string>
#include <vector>

namespace dfl {

// One polyline with an optional confidence band (ci entries are half-widths
// around y; leave ci empty for a bare line).
struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> ci;
};

struct ChartSpec {
    std::string title;
    std::string x_label = "round";
    std::string y_label;
    double y_min = 0.0;
    double y_max = 1.0;
};

// Self-contained SVG: axes, tick labels, CI bands, legend entries in
// declaration order. Series whose x/y lengths disagree are truncated to the
// shorter length with a warning on stderr.
std::string render_chart_svg(const ChartSpec& spec, const std::vector<ChartSeries>& series);

void render_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series,
                  const std::string& out_path);

} // namespace dfl
