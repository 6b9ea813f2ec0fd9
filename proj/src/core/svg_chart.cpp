#include "core/svg_chart.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "core/error.hpp"

namespace dfl {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 52;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

} // namespace

std::string render_chart_svg(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
    if (series.empty()) raise(ErrorKind::parameter, "render_chart: no series given");

    double x_min = 0.0;
    double x_max = 1.0;
    bool have_x = false;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            std::cerr << "warning: series '" << s.label << "' has mismatched x/y lengths; truncating\n";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!have_x) {
                x_min = x_max = s.x[i];
                have_x = true;
            } else {
                x_min = std::min(x_min, s.x[i]);
                x_max = std::max(x_max, s.x[i]);
            }
        }
    }
    if (!have_x) raise(ErrorKind::parameter, "render_chart: all series empty");
    if (x_max == x_min) x_max = x_min + 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) {
        const double clamped = std::min(spec.y_max, std::max(spec.y_min, y));
        return kMarginTop + (spec.y_max - clamped) / (spec.y_max - spec.y_min) * plot_h;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << escape(spec.title) << "</text>\n";

    // Gridlines and tick labels.
    for (int i = 0; i <= 5; ++i) {
        const double y_val = spec.y_min + (spec.y_max - spec.y_min) * i / 5.0;
        const double y_px = sy(y_val);
        svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(y_px) << "\" x2=\""
            << kWidth - kMarginRight << "\" y2=\"" << fmt(y_px)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y_px + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(y_val)
            << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double x_val = x_min + (x_max - x_min) * i / 5.0;
        const double x_px = sx(x_val);
        svg << "<line x1=\"" << fmt(x_px) << "\" y1=\"" << kMarginTop << "\" x2=\"" << fmt(x_px)
            << "\" y2=\"" << kHeight - kMarginBottom
            << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        char xbuf[32];
        std::snprintf(xbuf, sizeof(xbuf), "%g", x_val);
        svg << "<text x=\"" << fmt(x_px) << "\" y=\"" << kHeight - kMarginBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xbuf
            << "</text>\n";
    }
    svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << fmt(plot_w)
        << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(spec.x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
        << kMarginTop + plot_h / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t idx = 0; idx < series.size(); ++idx) {
        const auto& s = series[idx];
        const char* color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (n == 0) continue;

        if (s.ci.size() >= n) {
            std::ostringstream band;
            for (std::size_t i = 0; i < n; ++i)
                band << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i] + s.ci[i])) << " ";
            for (std::size_t i = n; i-- > 0;)
                band << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i] - s.ci[i])) << " ";
            svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color
                << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        std::ostringstream line;
        for (std::size_t i = 0; i < n; ++i) line << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
        svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.6\"/>\n";
    }

    // Legend, declaration order.
    const double legend_x = kMarginLeft + 12;
    double legend_y = kMarginTop + 14;
    for (std::size_t idx = 0; idx < series.size(); ++idx) {
        const char* color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<line x1=\"" << fmt(legend_x) << "\" y1=\"" << fmt(legend_y - 4) << "\" x2=\""
            << fmt(legend_x + 22) << "\" y2=\"" << fmt(legend_y - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(legend_x + 28) << "\" y=\"" << fmt(legend_y)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[idx].label)
            << "</text>\n";
        legend_y += 16;
    }

    svg << "</svg>\n";
    return svg.str();
}

void render_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series,
                  const std::string& out_path) {
    const std::string svg = render_chart_svg(spec, series);
    std::ofstream out(out_path);
    if (!out) raise(ErrorKind::io, "cannot open for write: " + out_path);
    out << svg;
    if (!out) raise(ErrorKind::io, "write failed: " + out_path);
}

} // namespace dfl
