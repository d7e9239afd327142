// kdaido/svg.hpp
//
// Minimal static SVG emitter for result displays: one coordinate frame with
// tick-labelled axes plus any number of polyline or scatter series.  No
// plotting dependency; output is deterministic for equal inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kdaido/errors.hpp"

namespace kdaido {

struct svg_series {
    std::vector<std::pair<double, double>> points;
    std::string color = "#1f6fb2";
    bool line = true;  // false: scatter markers only
    std::string label;
};

namespace detail_svg {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// round the raw span to a 1/2/5 decade tick step
inline double tick_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace detail_svg

inline std::string render_svg(const std::vector<svg_series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
    using detail_svg::num;
    const double width = 640.0, height = 440.0;
    const double ml = 70.0, mr = 24.0, mt = 36.0, mb = 52.0;

    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool seen = false;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!seen) {
                x_min = x_max = x;
                y_min = y_max = y;
                seen = true;
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= y_min) y_max = y_min + 1.0;
    const double x_pad = 0.04 * (x_max - x_min), y_pad = 0.06 * (y_max - y_min);
    x_min -= x_pad;
    x_max += x_pad;
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
           "font-family=\"sans-serif\">" + title + "</text>\n";

    // frame
    out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(width - ml - mr) +
           "\" height=\"" + num(height - mt - mb) + "\" fill=\"none\" stroke=\"#444\"/>\n";

    const double xs = detail_svg::tick_step(x_max - x_min);
    for (double x = std::ceil(x_min / xs) * xs; x <= x_max + 1e-12 * xs; x += xs) {
        out += "<line x1=\"" + num(px(x)) + "\" y1=\"" + num(height - mb) + "\" x2=\"" + num(px(x)) +
               "\" y2=\"" + num(height - mb + 5) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(px(x)) + "\" y=\"" + num(height - mb + 19) +
               "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" + num(x) +
               "</text>\n";
    }
    const double ys = detail_svg::tick_step(y_max - y_min);
    for (double y = std::ceil(y_min / ys) * ys; y <= y_max + 1e-12 * ys; y += ys) {
        out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(y)) + "\" x2=\"" + num(ml) +
               "\" y2=\"" + num(py(y)) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(ml - 9) + "\" y=\"" + num(py(y) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(y) +
               "</text>\n";
    }
    out += "<text x=\"" + num((ml + width - mr) / 2) + "\" y=\"" + num(height - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label +
           "</text>\n";
    out += "<text x=\"16\" y=\"" + num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
           num((mt + height - mb) / 2) + ")\">" + y_label + "</text>\n";

    double legend_y = mt + 16.0;
    for (const auto& s : series) {
        if (s.line) {
            std::string pts;
            for (const auto& [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                pts += num(px(x)) + "," + num(py(y)) + " ";
            }
            out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.6\" points=\"" +
                   pts + "\"/>\n";
        } else {
            for (const auto& [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
                       "\" r=\"2.6\" fill=\"" + s.color + "\"/>\n";
            }
        }
        if (!s.label.empty()) {
            out += "<line x1=\"" + num(width - mr - 120) + "\" y1=\"" + num(legend_y - 4) + "\" x2=\"" +
                   num(width - mr - 96) + "\" y2=\"" + num(legend_y - 4) + "\" stroke=\"" + s.color +
                   "\" stroke-width=\"3\"/>\n";
            out += "<text x=\"" + num(width - mr - 90) + "\" y=\"" + num(legend_y) +
                   "\" font-size=\"11\" font-family=\"sans-serif\">" + s.label + "</text>\n";
            legend_y += 16.0;
        }
    }
    out += "</svg>\n";
    return out;
}

inline void write_svg(const std::vector<svg_series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path + " for writing");
    os << render_svg(series, title, x_label, y_label);
}

}  // namespace kdaido
