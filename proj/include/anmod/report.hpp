#pragma once

// Convergence reports from a run history: CSV tables and SVG line charts.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anmod/engine.hpp"

namespace anmod {

struct Series {
    std::string title;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    std::optional<double> reference;  // drawn as a dashed horizontal line
};

/// Standalone SVG line chart with axes and tick labels.
std::string render_svg(const Series& series, int width = 640, int height = 400);

struct ReportFiles {
    std::filesystem::path errors_csv;
    std::filesystem::path variables_csv;
    std::vector<std::filesystem::path> charts;
};

/// errors.csv (relative error per target per iteration), variables.csv
/// (design values per iteration), target_<name>.svg and variable_<name>.svg.
ReportFiles write_report(const RunHistory& history, const std::filesystem::path& dir);

}  // namespace anmod
