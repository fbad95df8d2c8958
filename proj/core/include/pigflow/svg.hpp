#pragma once

#include <string>
#include <vector>

namespace pigflow::svg {

/// One polyline; NaN y-values break the line into disconnected runs.
struct LineSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
    int width = 960;
    int height = 360;
    // Long series are thinned to this many strides, keeping each
    // stride's min and max so spikes stay visible.
    int max_points = 2000;
};

std::string render_line_chart(const LineChart& chart);

/// Grayscale time x lag density plot; darker cells mean values closer
/// to 1. An optional overlay path is drawn on top.
struct HeatMap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;                  // per column
    std::vector<double> y;                  // per row
    std::vector<std::vector<double>> cells; // [column][row], in [-1,1]
    std::vector<double> overlay_x;
    std::vector<double> overlay_y;
    int width = 960;
    int height = 480;
    int max_cols = 360;
    int max_rows = 240;
};

std::string render_heat_map(const HeatMap& map);

} // namespace pigflow::svg
