#include "pigflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pigflow::svg {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 28;
constexpr int kMarginBottom = 44;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (!valid()) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::vector<double> ticks(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> out;
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + step * 1e-9; t += step) out.push_back(t);
    return out;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

void open_svg(std::string& out, int w, int h, const std::string& title) {
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        out += "<text x=\"" + std::to_string(w / 2) +
               "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\""
               " font-size=\"14\">" +
               escape(title) + "</text>\n";
}

void draw_axes(std::string& out, int w, int h, const Range& rx,
               const Range& ry, const std::string& xl, const std::string& yl) {
    const int x0 = kMarginLeft, x1 = w - kMarginRight;
    const int y0 = h - kMarginBottom, y1 = kMarginTop;
    const auto px = [&](double v) {
        return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0);
    };
    const auto py = [&](double v) {
        return y0 - (v - ry.lo) / (ry.hi - ry.lo) * (y0 - y1);
    };
    out += "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\""
           " font-size=\"11\">\n";
    out += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" +
           std::to_string(y0) + "\" x2=\"" + std::to_string(x1) + "\" y2=\"" +
           std::to_string(y0) + "\"/>\n";
    out += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" +
           std::to_string(y0) + "\" x2=\"" + std::to_string(x0) + "\" y2=\"" +
           std::to_string(y1) + "\"/>\n";
    for (double t : ticks(rx.lo, rx.hi)) {
        const std::string x = num(px(t));
        out += "<line x1=\"" + x + "\" y1=\"" + std::to_string(y0) +
               "\" x2=\"" + x + "\" y2=\"" + std::to_string(y0 + 4) + "\"/>\n";
        out += "<text x=\"" + x + "\" y=\"" + std::to_string(y0 + 16) +
               "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#222\">" +
               tick_label(t) + "</text>\n";
    }
    for (double t : ticks(ry.lo, ry.hi)) {
        const std::string y = num(py(t));
        out += "<line x1=\"" + std::to_string(x0 - 4) + "\" y1=\"" + y +
               "\" x2=\"" + std::to_string(x0) + "\" y2=\"" + y + "\"/>\n";
        out += "<text x=\"" + std::to_string(x0 - 7) + "\" y=\"" + y +
               "\" text-anchor=\"end\" dominant-baseline=\"middle\""
               " stroke=\"none\" fill=\"#222\">" +
               tick_label(t) + "</text>\n";
    }
    if (!xl.empty())
        out += "<text x=\"" + std::to_string((x0 + x1) / 2) + "\" y=\"" +
               std::to_string(h - 8) +
               "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#222\">" +
               escape(xl) + "</text>\n";
    if (!yl.empty())
        out += "<text transform=\"rotate(-90 14 " +
               std::to_string((y0 + y1) / 2) + ")\" x=\"14\" y=\"" +
               std::to_string((y0 + y1) / 2) +
               "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#222\">" +
               escape(yl) + "</text>\n";
    out += "</g>\n";
}

} // namespace

std::string render_line_chart(const LineChart& chart) {
    Range rx, ry;
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            rx.add(s.x[i]);
            if (std::isfinite(s.y[i])) ry.add(s.y[i]);
        }
    rx.pad();
    ry.pad();

    const int w = chart.width, h = chart.height;
    const int x0 = kMarginLeft, x1 = w - kMarginRight;
    const int y0 = h - kMarginBottom, y1 = kMarginTop;
    const auto px = [&](double v) {
        return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0);
    };
    const auto py = [&](double v) {
        return y0 - (v - ry.lo) / (ry.hi - ry.lo) * (y0 - y1);
    };

    std::string out;
    open_svg(out, w, h, chart.title);
    draw_axes(out, w, h, rx, ry, chart.x_label, chart.y_label);

    int legend_y = kMarginTop + 4;
    for (const auto& s : chart.series) {
        // Thin long series per stride, keeping min and max samples.
        std::vector<std::pair<double, double>> pts;
        const std::size_t n = s.x.size();
        const std::size_t stride =
            std::max<std::size_t>(1, n / static_cast<std::size_t>(
                                          std::max(1, chart.max_points)));
        for (std::size_t base = 0; base < n; base += stride) {
            const std::size_t end = std::min(base + stride, n);
            std::size_t imin = base, imax = base;
            bool any = false;
            for (std::size_t i = base; i < end; ++i) {
                if (!std::isfinite(s.y[i])) {
                    // keep one NaN to break the line
                    if (!any) pts.emplace_back(s.x[i], s.y[i]);
                    continue;
                }
                if (!any) {
                    imin = imax = i;
                    any = true;
                } else {
                    if (s.y[i] < s.y[imin]) imin = i;
                    if (s.y[i] > s.y[imax]) imax = i;
                }
            }
            if (!any) continue;
            if (imin > imax) std::swap(imin, imax);
            pts.emplace_back(s.x[imin], s.y[imin]);
            if (imax != imin) pts.emplace_back(s.x[imax], s.y[imax]);
        }

        out += "<g fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1\">\n";
        std::string run;
        std::size_t run_len = 0;
        const auto flush = [&]() {
            if (run_len >= 2)
                out += "<polyline points=\"" + run + "\"/>\n";
            else if (run_len == 1)
                out += "<circle cx=\"" + run.substr(0, run.find(',')) +
                       "\" cy=\"" +
                       run.substr(run.find(',') + 1,
                                  run.find(' ') - run.find(',') - 1) +
                       "\" r=\"1\" fill=\"" + s.color + "\"/>\n";
            run.clear();
            run_len = 0;
        };
        for (const auto& [xv, yv] : pts) {
            if (!std::isfinite(yv)) {
                flush();
                continue;
            }
            run += num(px(xv)) + "," + num(py(yv)) + " ";
            ++run_len;
        }
        flush();
        out += "</g>\n";
        if (!s.label.empty()) {
            out += "<g font-family=\"sans-serif\" font-size=\"11\">";
            out += "<line x1=\"" + std::to_string(x1 - 140) + "\" y1=\"" +
                   std::to_string(legend_y) + "\" x2=\"" +
                   std::to_string(x1 - 120) + "\" y2=\"" +
                   std::to_string(legend_y) + "\" stroke=\"" + s.color +
                   "\"/>";
            out += "<text x=\"" + std::to_string(x1 - 114) + "\" y=\"" +
                   std::to_string(legend_y + 4) + "\" fill=\"#222\">" +
                   escape(s.label) + "</text></g>\n";
            legend_y += 16;
        }
    }
    out += "</svg>\n";
    return out;
}

std::string render_heat_map(const HeatMap& map) {
    std::string out;
    const int w = map.width, h = map.height;
    open_svg(out, w, h, map.title);

    Range rx, ry;
    for (double v : map.x) rx.add(v);
    for (double v : map.y) ry.add(v);
    rx.pad();
    ry.pad();
    draw_axes(out, w, h, rx, ry, map.x_label, map.y_label);

    const int x0 = kMarginLeft, x1 = w - kMarginRight;
    const int y0 = h - kMarginBottom, y1 = kMarginTop;
    const std::size_t n_cols = map.cells.size();
    const std::size_t n_rows = n_cols ? map.cells[0].size() : 0;
    if (n_cols == 0 || n_rows == 0) {
        out += "</svg>\n";
        return out;
    }
    const std::size_t col_bin = std::max<std::size_t>(
        1, n_cols / static_cast<std::size_t>(map.max_cols));
    const std::size_t row_bin = std::max<std::size_t>(
        1, n_rows / static_cast<std::size_t>(map.max_rows));
    const std::size_t oc = (n_cols + col_bin - 1) / col_bin;
    const std::size_t orows = (n_rows + row_bin - 1) / row_bin;
    const double cw = static_cast<double>(x1 - x0) / static_cast<double>(oc);
    const double ch = static_cast<double>(y0 - y1) / static_cast<double>(orows);

    out += "<g stroke=\"none\">\n";
    for (std::size_t c = 0; c < oc; ++c) {
        for (std::size_t r = 0; r < orows; ++r) {
            double v = 0.0;
            for (std::size_t ci = c * col_bin;
                 ci < std::min((c + 1) * col_bin, n_cols); ++ci)
                for (std::size_t ri = r * row_bin;
                     ri < std::min((r + 1) * row_bin, n_rows); ++ri)
                    v = std::max(v, map.cells[ci][ri]);
            const int gray =
                250 - static_cast<int>(std::clamp(v, 0.0, 1.0) * 230.0);
            if (gray >= 250) continue; // keep background white
            const double px = x0 + static_cast<double>(c) * cw;
            // row 0 is the lowest y value, drawn at the bottom
            const double py = y0 - static_cast<double>(r + 1) * ch;
            out += "<rect x=\"" + num(px) + "\" y=\"" + num(py) +
                   "\" width=\"" + num(cw + 0.5) + "\" height=\"" +
                   num(ch + 0.5) + "\" fill=\"rgb(" + std::to_string(gray) +
                   "," + std::to_string(gray) + "," + std::to_string(gray) +
                   ")\"/>\n";
        }
    }
    out += "</g>\n";

    if (!map.overlay_x.empty()) {
        const auto pxf = [&](double v) {
            return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0);
        };
        const auto pyf = [&](double v) {
            return y0 - (v - ry.lo) / (ry.hi - ry.lo) * (y0 - y1);
        };
        std::string pts;
        for (std::size_t i = 0; i < map.overlay_x.size(); ++i)
            pts += num(pxf(map.overlay_x[i])) + "," +
                   num(pyf(map.overlay_y[i])) + " ";
        out += "<polyline fill=\"none\" stroke=\"#d62728\""
               " stroke-width=\"1.5\" points=\"" +
               pts + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace pigflow::svg
