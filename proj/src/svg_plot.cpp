/*
 Copyright 2026 The nmpc-lab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "nmpc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nmpc {

namespace {

const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
    "#637939", "#7b4173", "#3182bd", "#e6550d",
};
constexpr int kPaletteSize = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));

// Plot margins inside the canvas.
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 34.0, kBottom = 46.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

/// Tick step of the form {1,2,5} * 10^k giving roughly `target` intervals.
double nice_step(double range, int target) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double nice = 10.0;
    if (frac <= 1.0) nice = 1.0;
    else if (frac <= 2.0) nice = 2.0;
    else if (frac <= 5.0) nice = 5.0;
    return nice * mag;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log_scale = false;

    double to_unit(double v) const {
        if (log_scale) {
            return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        }
        return (v - lo) / (hi - lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log_scale) {
            const int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
            const int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
            for (int e = e0; e <= e1; ++e) out.push_back(std::pow(10.0, e));
            if (out.empty()) out = {lo, hi};
        } else {
            const double step = nice_step(hi - lo, 6);
            const double first = std::ceil(lo / step) * step;
            for (double v = first; v <= hi + 1e-9 * step; v += step) {
                out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
            }
        }
        return out;
    }
};

void draw_frame_and_axes(std::ostream& os, const PlotOptions& opts, const Axis& xa,
                         const Axis& ya) {
    const double w = opts.width, h = opts.height;
    const double px0 = kLeft, px1 = w - kRight;
    const double py0 = h - kBottom, py1 = kTop;

    os << "<rect x='" << fmt_px(px0) << "' y='" << fmt_px(py1) << "' width='"
       << fmt_px(px1 - px0) << "' height='" << fmt_px(py0 - py1)
       << "' fill='none' stroke='#333' stroke-width='1'/>\n";

    for (double t : xa.ticks()) {
        const double px = px0 + xa.to_unit(t) * (px1 - px0);
        os << "<line x1='" << fmt_px(px) << "' y1='" << fmt_px(py0) << "' x2='"
           << fmt_px(px) << "' y2='" << fmt_px(py0 + 4) << "' stroke='#333'/>\n";
        os << "<text x='" << fmt_px(px) << "' y='" << fmt_px(py0 + 17)
           << "' font-size='11' text-anchor='middle'>" << fmt(t) << "</text>\n";
    }
    for (double t : ya.ticks()) {
        const double py = py0 - ya.to_unit(t) * (py0 - py1);
        os << "<line x1='" << fmt_px(px0 - 4) << "' y1='" << fmt_px(py) << "' x2='"
           << fmt_px(px0) << "' y2='" << fmt_px(py) << "' stroke='#333'/>\n";
        os << "<line x1='" << fmt_px(px0) << "' y1='" << fmt_px(py) << "' x2='"
           << fmt_px(px1) << "' y2='" << fmt_px(py)
           << "' stroke='#ddd' stroke-width='0.5'/>\n";
        os << "<text x='" << fmt_px(px0 - 7) << "' y='" << fmt_px(py + 4)
           << "' font-size='11' text-anchor='end'>" << fmt(t) << "</text>\n";
    }

    os << "<text x='" << fmt_px((px0 + px1) / 2) << "' y='" << fmt_px(h - 8)
       << "' font-size='12' text-anchor='middle'>" << opts.x_label << "</text>\n";
    os << "<text x='14' y='" << fmt_px((py0 + py1) / 2)
       << "' font-size='12' text-anchor='middle' transform='rotate(-90 14 "
       << fmt_px((py0 + py1) / 2) << ")'>" << opts.y_label << "</text>\n";
    os << "<text x='" << fmt_px((px0 + px1) / 2) << "' y='20' font-size='13' "
          "text-anchor='middle' font-weight='bold'>"
       << opts.title << "</text>\n";
}

}  // namespace

std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& opts) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    double y_pos_min = x_lo;  // smallest positive y, for the log floor
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
            if (s.y[i] > 0.0) y_pos_min = std::min(y_pos_min, s.y[i]);
        }
    }
    if (!std::isfinite(x_lo) || !std::isfinite(y_lo)) {
        x_lo = 0.0; x_hi = 1.0; y_lo = 0.0; y_hi = 1.0;
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;

    Axis xa{x_lo, x_hi, false};
    Axis ya;
    ya.log_scale = opts.log_y;
    if (opts.log_y) {
        if (!std::isfinite(y_pos_min)) y_pos_min = 1e-12;
        ya.lo = y_pos_min;
        ya.hi = std::max(y_hi, y_pos_min * 10.0);
    } else {
        const double pad = 0.05 * std::max(y_hi - y_lo, 1e-12);
        ya.lo = std::min(0.0, y_lo) - (y_lo < 0.0 ? pad : 0.0);
        ya.hi = y_hi + pad;
        if (ya.hi <= ya.lo) ya.hi = ya.lo + 1.0;
    }

    const double px0 = kLeft, px1 = opts.width - kRight;
    const double py0 = opts.height - kBottom, py1 = kTop;

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << opts.width
       << "' height='" << opts.height << "' viewBox='0 0 " << opts.width << " "
       << opts.height << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n";
    draw_frame_and_axes(os, opts, xa, ya);

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.4' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (opts.log_y && y <= 0.0) y = ya.lo;  // clamp zeros to the floor
            const double px = px0 + xa.to_unit(s.x[i]) * (px1 - px0);
            const double py = py0 - ya.to_unit(y) * (py0 - py1);
            os << fmt_px(px) << "," << fmt_px(py) << " ";
        }
        os << "'/>\n";
    }

    // Legend, two columns when crowded.
    const int per_col = 8;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const int col = static_cast<int>(si) / per_col;
        const int row = static_cast<int>(si) % per_col;
        const double lx = px0 + 12 + 150.0 * col;
        const double ly = py1 + 14 + 15.0 * row;
        os << "<line x1='" << fmt_px(lx) << "' y1='" << fmt_px(ly - 3) << "' x2='"
           << fmt_px(lx + 18) << "' y2='" << fmt_px(ly - 3) << "' stroke='"
           << kPalette[si % kPaletteSize] << "' stroke-width='2'/>\n";
        os << "<text x='" << fmt_px(lx + 23) << "' y='" << fmt_px(ly)
           << "' font-size='10'>" << series[si].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_histogram(const std::vector<double>& values, int bins,
                             const PlotOptions& opts) {
    if (bins < 1) {
        throw std::invalid_argument("render_histogram: bins must be >= 1");
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (values.empty() || !std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi <= lo) hi = lo + 1.0;

    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double v : values) {
        int b = static_cast<int>((v - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    const int max_count = counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end());

    Axis xa{lo, hi, false};
    Axis ya{0.0, static_cast<double>(std::max(1, max_count)) * 1.05, false};

    const double px0 = kLeft, px1 = opts.width - kRight;
    const double py0 = opts.height - kBottom, py1 = kTop;

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << opts.width
       << "' height='" << opts.height << "' viewBox='0 0 " << opts.width << " "
       << opts.height << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n";
    draw_frame_and_axes(os, opts, xa, ya);

    for (int b = 0; b < bins; ++b) {
        const double x_left = lo + b * width;
        const double px_l = px0 + xa.to_unit(x_left) * (px1 - px0);
        const double px_r = px0 + xa.to_unit(x_left + width) * (px1 - px0);
        const double py = py0 - ya.to_unit(counts[static_cast<std::size_t>(b)]) * (py0 - py1);
        os << "<rect x='" << fmt_px(px_l) << "' y='" << fmt_px(py) << "' width='"
           << fmt_px(std::max(0.5, px_r - px_l - 0.5)) << "' height='"
           << fmt_px(py0 - py) << "' fill='#4c78a8' stroke='#333' stroke-width='0.4'/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::string& path, const std::string& svg) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    os << svg;
}

}  // namespace nmpc
