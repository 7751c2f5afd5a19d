#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ssta {

struct ChartSeries {
    std::string label;
    std::string color;  // CSS color
    std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}

}  // namespace detail

// Self-contained SVG line chart. Presentation only; nothing parses these
// back.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<ChartSeries>& series) {
    const double width = 800, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::short_num(width) +
           "\" height=\"" + detail::short_num(height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::short_num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           detail::xml_escape(title) + "</text>\n";

    // axes
    svg += "<line x1=\"" + detail::short_num(ml) + "\" y1=\"" + detail::short_num(height - mb) +
           "\" x2=\"" + detail::short_num(width - mr) + "\" y2=\"" + detail::short_num(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::short_num(ml) + "\" y1=\"" + detail::short_num(mt) + "\" x2=\"" +
           detail::short_num(ml) + "\" y2=\"" + detail::short_num(height - mb) + "\" stroke=\"black\"/>\n";

    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        double fx = xmin + (xmax - xmin) * i / ticks;
        double fy = ymin + (ymax - ymin) * i / ticks;
        svg += "<line x1=\"" + detail::short_num(px(fx)) + "\" y1=\"" + detail::short_num(height - mb) +
               "\" x2=\"" + detail::short_num(px(fx)) + "\" y2=\"" + detail::short_num(height - mb + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::short_num(px(fx)) + "\" y=\"" + detail::short_num(height - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + detail::short_num(fx) + "</text>\n";
        svg += "<line x1=\"" + detail::short_num(ml - 5) + "\" y1=\"" + detail::short_num(py(fy)) +
               "\" x2=\"" + detail::short_num(ml) + "\" y2=\"" + detail::short_num(py(fy)) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::short_num(ml - 8) + "\" y=\"" + detail::short_num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + detail::short_num(fy) + "</text>\n";
    }
    svg += "<text x=\"" + detail::short_num((ml + width - mr) / 2) + "\" y=\"" +
           detail::short_num(height - 12) + "\" text-anchor=\"middle\" font-size=\"13\">" +
           detail::xml_escape(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::short_num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
           detail::short_num((mt + height - mb) / 2) + ")\">" + detail::xml_escape(y_label) +
           "</text>\n";

    for (const auto& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            svg += detail::short_num(px(x)) + "," + detail::short_num(py(y)) + " ";
        }
        svg += "\"/>\n";
    }

    double ly = mt + 8;
    for (const auto& s : series) {
        svg += "<line x1=\"" + detail::short_num(width - mr - 150) + "\" y1=\"" + detail::short_num(ly) +
               "\" x2=\"" + detail::short_num(width - mr - 125) + "\" y2=\"" + detail::short_num(ly) +
               "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::short_num(width - mr - 120) + "\" y=\"" + detail::short_num(ly + 4) +
               "\" font-size=\"12\">" + detail::xml_escape(s.label) + "</text>\n";
        ly += 18;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace ssta
