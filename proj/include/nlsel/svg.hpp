#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"
#include "nlsel/io.hpp"

namespace nlsel {

// Standalone SVG emitters on a fixed 960x540 canvas. All numbers are printed
// with fixed precision so identical input produces identical bytes.

namespace svg_detail {

constexpr double canvas_w = 960.0, canvas_h = 540.0;
constexpr double margin_l = 70.0, margin_r = 20.0, margin_t = 20.0, margin_b = 50.0;

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Round-ish tick step covering [lo, hi] with ~n ticks.
inline double tick_step(double lo, double hi, int n) {
    const double raw = (hi - lo) / n;
    if (!(raw > 0)) return 1.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2 * mag;
    if (r < 7.5) return 5 * mag;
    return 10 * mag;
}

inline void axes(std::string& out, double x0, double x1, double y0, double y1) {
    const double px0 = margin_l, px1 = canvas_w - margin_r;
    const double py0 = canvas_h - margin_b, py1 = margin_t;
    auto sx = [&](double x) { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); };
    auto sy = [&](double y) { return py0 + (y - y0) / (y1 - y0) * (py1 - py0); };
    out += "<rect x='" + num(px0) + "' y='" + num(py1) + "' width='" + num(px1 - px0) +
           "' height='" + num(py0 - py1) + "' fill='none' stroke='black'/>\n";
    const double xs = tick_step(x0, x1, 8);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9; t += xs) {
        out += "<line x1='" + num(sx(t)) + "' y1='" + num(py0) + "' x2='" + num(sx(t)) + "' y2='" +
               num(py0 + 5) + "' stroke='black'/>\n";
        out += "<text x='" + num(sx(t)) + "' y='" + num(py0 + 20) +
               "' font-size='12' text-anchor='middle'>" + tick_label(t) + "</text>\n";
    }
    const double ys = tick_step(y0, y1, 6);
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9; t += ys) {
        out += "<line x1='" + num(px0 - 5) + "' y1='" + num(sy(t)) + "' x2='" + num(px0) +
               "' y2='" + num(sy(t)) + "' stroke='black'/>\n";
        out += "<text x='" + num(px0 - 8) + "' y='" + num(sy(t) + 4) +
               "' font-size='12' text-anchor='end'>" + tick_label(t) + "</text>\n";
    }
}

} // namespace svg_detail

/// Line plot of one or more equal-length series (CSV rows).
inline void emit_line_plot(const CsvTable& table, const std::string& path) {
    using namespace svg_detail;
    if (table.cols < 2) throw DataError("plot: need at least 2 columns");
    double lo = table.data[0], hi = table.data[0];
    for (double v : table.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='960' height='540'>\n";
    out += "<rect width='960' height='540' fill='white'/>\n";
    axes(out, 0, static_cast<double>(table.cols - 1), lo, hi);
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    const double px0 = margin_l, px1 = canvas_w - margin_r;
    const double py0 = canvas_h - margin_b, py1 = margin_t;
    for (std::size_t r = 0; r < table.rows; ++r) {
        out += "<polyline fill='none' stroke='";
        out += colors[r % 6];
        out += "' stroke-width='1' points='";
        for (std::size_t c = 0; c < table.cols; ++c) {
            const double x = px0 + static_cast<double>(c) / static_cast<double>(table.cols - 1) * (px1 - px0);
            const double y = py0 + (table.data[r * table.cols + c] - lo) / (hi - lo) * (py1 - py0);
            out += num(x) + "," + num(y) + " ";
        }
        out += "'/>\n";
    }
    out += "</svg>\n";
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << out;
}

/// Grayscale heatmap of a CSV matrix, one rect per cell, min-max scaled.
inline void emit_heatmap(const CsvTable& table, const std::string& path) {
    using namespace svg_detail;
    double lo = table.data[0], hi = table.data[0];
    for (double v : table.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = (hi > lo) ? hi - lo : 1.0;
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='960' height='540'>\n";
    out += "<rect width='960' height='540' fill='white'/>\n";
    const double px0 = margin_l, px1 = canvas_w - margin_r;
    const double py0 = canvas_h - margin_b, py1 = margin_t;
    const double cw = (px1 - px0) / static_cast<double>(table.cols);
    const double ch = (py0 - py1) / static_cast<double>(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t c = 0; c < table.cols; ++c) {
            const int g = static_cast<int>(255.0 * (table.data[r * table.cols + c] - lo) / span + 0.5);
            char color[8];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", g, g, g);
            out += "<rect x='" + num(px0 + cw * static_cast<double>(c)) + "' y='" +
                   num(py1 + ch * static_cast<double>(r)) + "' width='" + num(cw + 0.5) +
                   "' height='" + num(ch + 0.5) + "' fill='" + color + "'/>\n";
        }
    axes(out, 0, static_cast<double>(table.cols), 0, static_cast<double>(table.rows));
    out += "</svg>\n";
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << out;
}

} // namespace nlsel
