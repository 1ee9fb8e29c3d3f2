#pragma once

#include "tsbench/evaluation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsbench::harness {

struct Point {
    std::string x;
    double y = 0.0;
};

struct Series {
    std::string label;
    std::vector<Point> points;
};

struct Panel {
    std::string title;
    std::vector<Series> series;
};

struct Figure {
    std::string name;  ///< file stem
    std::string title;
    std::string y_label;
    std::vector<Panel> panels;
};

/// Figure families built from metrics rows: MSE by method, by window, and by length, facetted by source.
std::vector<Figure> build_figures(const std::vector<eval::MetricsRow>& rows);

std::string render_svg(const Figure& fig);

/// Writes one SVG per non-empty family. Throws on empty input.
std::vector<std::filesystem::path> emit_plots(const std::vector<eval::MetricsRow>& rows,
                                              const std::filesystem::path& dir);

}  // namespace tsbench::harness
