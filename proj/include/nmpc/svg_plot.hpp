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
#ifndef NMPC_SVG_PLOT_HPP
#define NMPC_SVG_PLOT_HPP

#include <string>
#include <vector>

namespace nmpc {

/// One labelled curve.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    int width = 880;
    int height = 540;
};

/// Renders labelled curves with axes, ticks and a legend. Output is fully
/// deterministic (no timestamps or generator metadata).
std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& opts);

/// Fixed-width-bin histogram auto-scaled to the value range.
std::string render_histogram(const std::vector<double>& values, int bins,
                             const PlotOptions& opts);

void write_svg(const std::string& path, const std::string& svg);

}  // namespace nmpc

#endif  // NMPC_SVG_PLOT_HPP
